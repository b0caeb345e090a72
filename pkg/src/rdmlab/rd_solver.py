"""Blahut-Arimoto computation of rate-distortion functions on finite alphabets.

The solver sweeps the Lagrange slope of the rate-distortion trade-off; each
slope yields one point on the lower convex envelope of the achievable region,
together with the channel that achieves it. A simplex-grid brute-force
minimizer acts as an independent oracle for tiny instances.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .probspace import (
    ARITHMETIC_TOL,
    Alphabet,
    AlphabetMismatchError,
    Channel,
    DistortionMatrix,
    FiniteDistribution,
    expected_distortion,
    mutual_information,
)

_LN2 = float(np.log(2.0))


class ConvergenceError(RuntimeError):
    """Blahut-Arimoto failed to converge; carries the last iterate."""

    def __init__(self, message: str, last_point: "RDPoint", residual: float):
        super().__init__(message)
        self.last_point = last_point
        self.residual = residual


class SweepError(RuntimeError):
    """One or more slopes in a sweep failed to converge."""

    def __init__(self, failed_slopes: list[float]):
        super().__init__(f"solver failed at slopes {failed_slopes}")
        self.failed_slopes = failed_slopes


class InstanceTooLargeError(ValueError):
    """Brute-force enumeration would exceed the supported instance size."""


def _default_slope_grid() -> tuple[float, ...]:
    # 64 log-spaced slopes covering the curvature range of desk-scale instances.
    return tuple(np.logspace(-3.0, 3.0, 64))


@dataclass(frozen=True)
class RDSolverConfig:
    slope_grid: tuple[float, ...] = field(default_factory=_default_slope_grid)
    max_iterations: int = 50_000
    convergence_tol: float = 1e-9
    support_prune_tol: float = 1e-300

    def __post_init__(self) -> None:
        grid = tuple(float(s) for s in self.slope_grid)
        if not grid:
            raise ValueError("slope grid must be non-empty")
        if any(s < 0 for s in grid):
            raise ValueError("slopes must be non-negative")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("slope grid must be strictly increasing")
        if self.convergence_tol <= 0:
            raise ValueError("convergence tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max iterations must be positive")
        if self.support_prune_tol < 0:
            raise ValueError("support prune tolerance must be non-negative")
        object.__setattr__(self, "slope_grid", grid)


@dataclass(frozen=True, eq=False)
class RDPoint:
    """One achievable (rate, distortion) point and the channel that attains it."""

    rate: float
    distortion: float
    slope: float
    channel: Channel


@dataclass(frozen=True, eq=False)
class RDCurve:
    """Achievable points sorted by distortion, rate non-increasing and convex."""

    points: tuple[RDPoint, ...]
    tag: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        dists = [p.distortion for p in self.points]
        if any(b <= a for a, b in zip(dists, dists[1:])):
            raise ValueError("curve points must be strictly increasing in distortion")

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points])

    @property
    def distortions(self) -> np.ndarray:
        return np.array([p.distortion for p in self.points])

    def rate_at(self, distortion: float) -> float:
        """Rate at a distortion level, linearly interpolated on the convex curve."""
        d = self.distortions
        r = self.rates
        if distortion <= d[0]:
            return float(r[0])
        if distortion >= d[-1]:
            return float(r[-1])
        return float(np.interp(distortion, d, r))


def d_max(source: FiniteDistribution, d: DistortionMatrix) -> float:
    """Zero-rate distortion: best single reproduction letter."""
    _check(source, d)
    return float(np.min(source.mass @ d.values))


def d_min(source: FiniteDistribution, d: DistortionMatrix) -> float:
    """Lowest achievable distortion: expectation of per-row minima."""
    _check(source, d)
    return float(source.mass @ d.values.min(axis=1))


def _check(source: FiniteDistribution, d: DistortionMatrix) -> None:
    if source.alphabet != d.row_alphabet:
        raise AlphabetMismatchError("source alphabet does not match distortion rows")


def _zero_rate_point(
    source: FiniteDistribution, d: DistortionMatrix, slope: float
) -> RDPoint:
    best = int(np.argmin(source.mass @ d.values))
    channel = Channel.constant(source.alphabet, d.col_alphabet, best)
    return RDPoint(
        rate=mutual_information(source, channel),
        distortion=expected_distortion(source, channel, d),
        slope=slope,
        channel=channel,
    )


def _min_distortion_point(source: FiniteDistribution, d: DistortionMatrix) -> RDPoint:
    rows = np.zeros_like(d.values)
    rows[np.arange(d.values.shape[0]), d.values.argmin(axis=1)] = 1.0
    channel = Channel(source.alphabet, d.col_alphabet, rows)
    return RDPoint(
        rate=mutual_information(source, channel),
        distortion=expected_distortion(source, channel, d),
        slope=float("inf"),
        channel=channel,
    )


def _finish(
    source: FiniteDistribution,
    d: DistortionMatrix,
    cond: np.ndarray,
    slope: float,
) -> RDPoint:
    """Repair zero-mass rows, rebuild the channel, and re-evaluate exactly."""
    rows = np.array(cond)
    dead = source.mass <= 0.0
    if np.any(dead):
        rows[dead] = 0.0
        rows[dead, d.values[dead].argmin(axis=1)] = 1.0
    rows /= rows.sum(axis=1, keepdims=True)
    channel = Channel(source.alphabet, d.col_alphabet, rows, tol=ARITHMETIC_TOL)
    return RDPoint(
        rate=mutual_information(source, channel),
        distortion=expected_distortion(source, channel, d),
        slope=slope,
        channel=channel,
    )


def blahut_arimoto(
    source: FiniteDistribution,
    d: DistortionMatrix,
    slope: float,
    config: RDSolverConfig | None = None,
) -> RDPoint:
    """Solve min I + slope*D for one slope (in bits per unit distortion).

    Starts from a uniform reproduction marginal; stops when the rate change
    per iteration or the duality-gap bound drops below the convergence
    tolerance, whichever happens first.
    """
    config = config or RDSolverConfig()
    _check(source, d)
    if slope == 0.0:
        return _zero_rate_point(source, d, slope)

    p = source.mass
    live = p > 0.0
    weights = p[live]
    # Exponent kernel; slope is measured in bits, hence the ln 2 factor.
    kernel = np.exp(-slope * _LN2 * d.values[live])
    m = d.values.shape[1]
    q = np.full(m, 1.0 / m)
    kernel_d = kernel * d.values[live]
    gap = np.inf
    rate_nats = np.inf

    def achieving_channel() -> np.ndarray:
        scores = kernel * q
        cond = scores / scores.sum(axis=1)[:, None]
        full_cond = np.zeros_like(d.values)
        full_cond[live] = cond
        return full_cond

    for _ in range(config.max_iterations):
        scores = kernel * q
        z = scores.sum(axis=1)
        q_next = (weights / z) @ scores
        # Duality gap: the growth factor of the reproduction marginal bounds
        # suboptimality of the Lagrangian (Csiszar's bound, in nats).
        with np.errstate(divide="ignore", invalid="ignore"):
            growth = np.where(q > 0.0, q_next / np.where(q > 0.0, q, 1.0), 0.0)
        gap = float(np.log(max(growth.max(), 1.0)))
        # Rate of the current iterate from the Lagrangian identity
        # I = -sum(w ln z) - slope*ln2*D, in nats; two matvecs, no logs of
        # the full conditional matrix.
        inv_z = weights / z
        distortion = float(inv_z @ (kernel_d @ q))
        pos = q_next > 0.0
        kl = float(
            np.sum(q_next[pos] * np.log(q_next[pos] / np.where(pos, q, 1.0)[pos]))
        )
        new_rate = float(-(weights @ np.log(z))) - slope * _LN2 * distortion - kl
        residual = abs(new_rate - rate_nats)
        rate_nats = new_rate
        q = q_next
        if config.support_prune_tol > 0.0:
            pruned = q < config.support_prune_tol
            if np.any(pruned) and not np.all(pruned):
                q = np.where(pruned, 0.0, q)
                q /= q.sum()
        if gap < config.convergence_tol * _LN2 or residual < config.convergence_tol * _LN2:
            return _finish(source, d, achieving_channel(), slope)

    last = _finish(source, d, achieving_channel(), slope)
    raise ConvergenceError(
        f"no convergence after {config.max_iterations} iterations "
        f"(duality gap {gap:.3e} nats)",
        last_point=last,
        residual=gap,
    )


def sweep(
    source: FiniteDistribution,
    d: DistortionMatrix,
    config: RDSolverConfig | None = None,
    tag: str | None = None,
    workers: int = 1,
) -> RDCurve:
    """One point per slope plus the analytic endpoints, dominated points discarded."""
    config = config or RDSolverConfig()
    _check(source, d)
    failed: list[float] = []
    points: list[RDPoint] = []

    def solve(s: float) -> RDPoint | None:
        try:
            return blahut_arimoto(source, d, s, config)
        except ConvergenceError:
            failed.append(s)
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve, config.slope_grid))
    else:
        results = [solve(s) for s in config.slope_grid]
    points = [p for p in results if p is not None]
    if failed:
        raise SweepError(sorted(failed))

    points.append(_min_distortion_point(source, d))
    points.append(_zero_rate_point(source, d, 0.0))
    return RDCurve(points=tuple(_envelope(points)), tag=tag)


def _envelope(points: list[RDPoint]) -> list[RDPoint]:
    """Sort by distortion, dedup, and keep the lower convex envelope."""
    points = sorted(points, key=lambda p: (p.distortion, p.rate))
    dedup: list[RDPoint] = []
    for p in points:
        if dedup and p.distortion - dedup[-1].distortion <= 1e-12:
            continue  # keep the lower-rate point, which sorts first
        dedup.append(p)
    # Pareto: rate must strictly improve as distortion grows, so any point
    # whose rate does not drop below the running minimum is dominated.
    pareto: list[RDPoint] = []
    for p in dedup:
        if not pareto or p.rate < pareto[-1].rate - 1e-15:
            pareto.append(p)
    # Convexity repair: drop points above the chord of their neighbours.
    hull: list[RDPoint] = []
    for p in pareto:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            lhs = (b.rate - a.rate) * (p.distortion - b.distortion)
            rhs = (p.rate - b.rate) * (b.distortion - a.distortion)
            if lhs <= rhs + 1e-15:
                break
            hull.pop()
        hull.append(p)
    return hull


def rate_at_distortion(
    source: FiniteDistribution,
    d: DistortionMatrix,
    cap: float,
    config: RDSolverConfig | None = None,
) -> RDPoint:
    """R(cap) and an achieving channel, via bisection on the slope.

    When the curve has a linear segment at the cap, the two bracketing
    channels are time-shared; the mixture is feasible and its rate is no
    worse than the chord.
    """
    config = config or RDSolverConfig()
    _check(source, d)
    hi_pt = _min_distortion_point(source, d)
    lo_pt = _zero_rate_point(source, d, 0.0)
    if cap >= lo_pt.distortion - 1e-15:
        return RDPoint(0.0, lo_pt.distortion, 0.0, lo_pt.channel)
    if cap <= hi_pt.distortion + 1e-15:
        if cap < hi_pt.distortion - 1e-12:
            raise ValueError(
                f"distortion cap {cap} below the minimum achievable {hi_pt.distortion}"
            )
        return hi_pt

    lo, hi = 0.0, 1.0
    hi_solved = blahut_arimoto(source, d, hi, config)
    while hi_solved.distortion > cap and hi < 1e7:
        lo, lo_pt = hi, hi_solved
        hi *= 4.0
        hi_solved = blahut_arimoto(source, d, hi, config)
    for _ in range(80):
        if hi - lo < 1e-12 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        mid_pt = blahut_arimoto(source, d, mid, config)
        if abs(mid_pt.distortion - cap) < 1e-11:
            return mid_pt
        if mid_pt.distortion > cap:
            lo, lo_pt = mid, mid_pt
        else:
            hi, hi_solved = mid, mid_pt
    if lo_pt.distortion - hi_solved.distortion < 1e-12:
        return hi_solved
    lam = (cap - hi_solved.distortion) / (lo_pt.distortion - hi_solved.distortion)
    mixed = lam * lo_pt.channel.rows + (1.0 - lam) * hi_solved.channel.rows
    channel = Channel(source.alphabet, d.col_alphabet, mixed, tol=ARITHMETIC_TOL)
    return RDPoint(
        rate=mutual_information(source, channel),
        distortion=expected_distortion(source, channel, d),
        slope=0.5 * (lo + hi),
        channel=channel,
    )


def _simplex_grid(parts: int, steps: int) -> np.ndarray:
    """All probability vectors with `parts` entries on the steps-subdivision grid."""
    combos = []
    for cuts in itertools.combinations(range(steps + parts - 1), parts - 1):
        prev = -1
        counts = []
        for c in cuts:
            counts.append(c - prev - 1)
            prev = c
        counts.append(steps + parts - 2 - prev)
        combos.append(counts)
    return np.asarray(combos, dtype=float) / steps


def brute_force_rd(
    source: FiniteDistribution,
    d: DistortionMatrix,
    distortion_cap: float,
    grid_steps: int,
) -> float:
    """Minimize I over grid-quantized channels subject to E[d] <= cap, in bits.

    Upper-bounds the true R(cap); independent of the Blahut-Arimoto path.
    """
    return brute_force_rd_point(source, d, distortion_cap, grid_steps)[0]


def brute_force_rd_point(
    source: FiniteDistribution,
    d: DistortionMatrix,
    distortion_cap: float,
    grid_steps: int,
) -> tuple[float, float]:
    """Grid minimum as (rate, achieved distortion).

    The achieved distortion is useful as a cap that the grid can hit exactly,
    which removes the slack term from the grid's approximation error.
    """
    _check(source, d)
    n, m = d.values.shape
    if n > 4 or m > 3 or grid_steps > 20:
        raise InstanceTooLargeError(
            f"brute force supports at most 4x3 alphabets and 20 grid steps, "
            f"got {n}x{m} with {grid_steps}"
        )
    cands = _simplex_grid(m, grid_steps)
    k = len(cands)
    if float(k) ** n > 3e7:
        raise InstanceTooLargeError("grid enumeration would exceed 3e7 channels")

    p = source.mass
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(cands > 0.0, np.log2(np.where(cands > 0.0, cands, 1.0)), 0.0)
    cand_entropy = -(cands * logs).sum(axis=1)  # H(row) per candidate, bits
    # Per source symbol: candidate distortion contribution.
    cand_dist = cands @ d.values.T  # (k, n)

    # Vectorize the last two source rows; loop the remaining prefix.
    tail = min(n, 2)
    if tail == 2:
        pair_marg = (
            p[n - 2] * cands[:, None, :] + p[n - 1] * cands[None, :, :]
        ).reshape(-1, m)
        pair_dist = (
            p[n - 2] * cand_dist[:, None, n - 2] + p[n - 1] * cand_dist[None, :, n - 1]
        ).ravel()
        pair_cent = (
            p[n - 2] * cand_entropy[:, None] + p[n - 1] * cand_entropy[None, :]
        ).ravel()
    else:
        pair_marg = p[0] * cands
        pair_dist = p[0] * cand_dist[:, 0]
        pair_cent = p[0] * cand_entropy

    best = np.inf
    best_dist = np.inf
    prefix_rows = n - tail
    for prefix in itertools.product(range(k), repeat=prefix_rows):
        marg = pair_marg.copy()
        dist = pair_dist.copy()
        cent = pair_cent.copy()
        for row, ci in enumerate(prefix):
            marg += p[row] * cands[ci]
            dist += p[row] * cand_dist[ci, row]
            cent += p[row] * cand_entropy[ci]
        feasible = dist <= distortion_cap + 1e-12
        if not np.any(feasible):
            continue
        fm = marg[feasible]
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.where(fm > 0.0, np.log2(np.where(fm > 0.0, fm, 1.0)), 0.0)
        marg_entropy = -(fm * lg).sum(axis=1)
        rates = marg_entropy - cent[feasible]
        idx = int(rates.argmin())
        candidate = float(rates[idx])
        if candidate < best:
            best = candidate
            best_dist = float(dist[feasible][idx])
    if not np.isfinite(best):
        raise ValueError(f"no grid channel satisfies distortion cap {distortion_cap}")
    return max(0.0, best), best_dist
