"""Average rate and quality differences between two rate-quality curves.

Both deltas integrate an interpolant over the overlapping range of the two
curves: the rate delta integrates log-rate against quality and reports a
percentage, the quality delta integrates quality against log-rate. Cubic
polynomial fitting is the default; a monotone piecewise-cubic interpolant is
available for curves that a single cubic fits poorly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

METHODS = ("cubic", "pchip")


class CurveDataError(ValueError):
    """The tabulated curve cannot be used for delta computation."""


@dataclass(frozen=True, eq=False)
class RateMetricCurve:
    """Tabulated (rate, metric) operating points, canonicalized by rate."""

    rates: np.ndarray
    metrics: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        rates = np.asarray(self.rates, dtype=float)
        metrics = np.asarray(self.metrics, dtype=float)
        if rates.shape != metrics.shape or rates.ndim != 1:
            raise CurveDataError("rates and metrics must be equal-length vectors")
        if rates.size < 4:
            raise CurveDataError(
                f"need at least 4 points for a cubic fit, got {rates.size}"
            )
        if np.any(rates <= 0.0):
            raise CurveDataError("rates must be positive")
        order = np.argsort(rates)
        rates, metrics = rates[order], metrics[order]
        if np.any(np.diff(rates) == 0.0):
            raise CurveDataError(f"duplicate rate in curve {self.name!r}")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "metrics", metrics)


@dataclass(frozen=True)
class BDResult:
    bd_rate_percent: float
    bd_metric: float
    overlap_rate: tuple[float, float]
    overlap_metric: tuple[float, float]
    method: str


def _poly_average(x: np.ndarray, y: np.ndarray, lo: float, hi: float) -> float:
    p = np.polyfit(x, y, 3)
    integral = np.polyint(p)
    return float((np.polyval(integral, hi) - np.polyval(integral, lo)) / (hi - lo))


def _pchip_average(x: np.ndarray, y: np.ndarray, lo: float, hi: float) -> float:
    order = np.argsort(x)
    x, y = x[order], y[order]
    if np.any(np.diff(x) <= 0.0):
        raise CurveDataError("interpolation axis is not strictly increasing")
    f = PchipInterpolator(x, y)
    return float(f.integrate(lo, hi) / (hi - lo))


def _average(method: str, x, y, lo: float, hi: float) -> float:
    if hi <= lo:
        raise CurveDataError("curves do not overlap")
    if method == "cubic":
        return _poly_average(np.asarray(x), np.asarray(y), lo, hi)
    return _pchip_average(np.asarray(x), np.asarray(y), lo, hi)


def _check_method(method: str) -> None:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def bd_rate(
    reference: RateMetricCurve, test: RateMetricCurve, method: str = "cubic"
) -> BDResult:
    """Average rate change of `test` against `reference` at equal quality,
    in percent; negative means the test curve spends fewer bits."""
    _check_method(method)
    lo = max(reference.metrics.min(), test.metrics.min())
    hi = min(reference.metrics.max(), test.metrics.max())
    avg_ref = _average(method, reference.metrics, np.log10(reference.rates), lo, hi)
    avg_test = _average(method, test.metrics, np.log10(test.rates), lo, hi)
    delta = 10.0 ** (avg_test - avg_ref) - 1.0
    return BDResult(
        bd_rate_percent=float(delta * 100.0),
        bd_metric=_bd_metric_value(reference, test, method),
        overlap_rate=_rate_overlap(reference, test),
        overlap_metric=(float(lo), float(hi)),
        method=method,
    )


def _rate_overlap(a: RateMetricCurve, b: RateMetricCurve) -> tuple[float, float]:
    lo = max(a.rates.min(), b.rates.min())
    hi = min(a.rates.max(), b.rates.max())
    return float(lo), float(hi)


def _bd_metric_value(
    reference: RateMetricCurve, test: RateMetricCurve, method: str
) -> float:
    lo, hi = np.log10(_rate_overlap(reference, test))
    avg_ref = _average(method, np.log10(reference.rates), reference.metrics, lo, hi)
    avg_test = _average(method, np.log10(test.rates), test.metrics, lo, hi)
    return float(avg_test - avg_ref)


def bd_metric(
    reference: RateMetricCurve, test: RateMetricCurve, method: str = "cubic"
) -> BDResult:
    """Average quality change of `test` against `reference` at equal rate."""
    return bd_rate(reference, test, method)


def load_curve(path: str | Path, name: str = "") -> RateMetricCurve:
    """Read a two-column CSV (rate, metric), with an optional header row."""
    path = Path(path)
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if lineno == 1 and any(not _is_number(p) for p in parts):
            continue
        if len(parts) != 2:
            raise CurveDataError(f"{path}:{lineno}: expected two columns")
        if not all(_is_number(p) for p in parts):
            raise CurveDataError(f"{path}:{lineno}: non-numeric value")
        rows.append((float(parts[0]), float(parts[1])))
    if not rows:
        raise CurveDataError(f"{path}: no data rows")
    rates, metrics = zip(*rows)
    return RateMetricCurve(np.array(rates), np.array(metrics), name=name or path.stem)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True
