"""Two-class synthetic experiment contrasting raw inputs with a learned-style
feature space.

Inputs are (u, v) points: u is a wide uninformative coordinate and v carries
the class. The feature map g folds each class onto a small circle, after which
a one-bit quantizer separates the classes perfectly; the same rate spent on
the raw inputs only resolves u and decides the class by coin flip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.vq import kmeans2

from .task_appropriateness import (
    AppropriatenessReport,
    LabeledFeatureSet,
    compute_report,
    save_feature_set,
)

CLASS_NAMES = ("squares", "circles")
_V_CENTERS = (1.0, 3.0)  # class-conditional centers of v
_V_HALF_WIDTH = 0.2
_CIRCLE_CENTERS = ((7.5, 1.0), (2.5, 3.0))  # feature-space centers per class
_RADIUS = 0.2


@dataclass(frozen=True, eq=False)
class ToyDataset:
    inputs: np.ndarray  # (N, 2) raw (u, v)
    features: np.ndarray  # (N, 2) after the feature map
    labels: np.ndarray  # (N,) 0 = squares, 1 = circles


def sample_dataset(n: int, seed: int = 0) -> ToyDataset:
    """Draw n points, balanced classes, u ~ U[0, 10], v ~ U[center +/- 0.2]."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, n)
    u = rng.uniform(0.0, 10.0, n)
    centers = np.asarray(_V_CENTERS)[labels]
    v = rng.uniform(centers - _V_HALF_WIDTH, centers + _V_HALF_WIDTH)
    inputs = np.column_stack([u, v])
    return ToyDataset(inputs=inputs, features=map_g(inputs), labels=labels)


def map_g(inputs: np.ndarray) -> np.ndarray:
    """Fold each point onto its class circle.

    The v coordinate passes through; the u coordinate collapses to the class
    center's first coordinate plus a signed chord length, so every image point
    lies on a radius-0.2 circle around the class center. sign(u - 5) picks the
    half of the circle, with u = 5 sent to the left half.
    """
    inputs = np.atleast_2d(inputs)
    u, v = inputs[:, 0], inputs[:, 1]
    labels = (v > 2.0).astype(int)
    cx = np.asarray([c[0] for c in _CIRCLE_CENTERS])[labels]
    cv = np.asarray([c[1] for c in _CIRCLE_CENTERS])[labels]
    chord = np.sqrt(np.abs(_RADIUS**2 - (v - cv) ** 2))
    sign = np.where(u > 5.0, 1.0, -1.0)
    return np.column_stack([cx + sign * chord, v])


def map_h(features: np.ndarray) -> np.ndarray:
    """Classify a feature (or raw input) point: class 1 iff the second
    coordinate exceeds 2."""
    features = np.atleast_2d(features)
    return (features[:, 1] > 2.0).astype(int)


@dataclass(frozen=True, eq=False)
class OneBitQuantizer:
    """Nearest-representative quantizer with two codewords."""

    representatives: np.ndarray  # (2, 2)

    def assign(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        d = ((points[:, None, :] - self.representatives[None, :, :]) ** 2).sum(axis=2)
        return d.argmin(axis=1)

    def reproduce(self, points: np.ndarray) -> np.ndarray:
        return self.representatives[self.assign(points)]

    def mse(self, points: np.ndarray) -> float:
        err = np.atleast_2d(points) - self.reproduce(points)
        return float(np.einsum("ij,ij->i", err, err).mean())


def analytic_input_quantizer() -> OneBitQuantizer:
    """The distortion-optimal one-bit quantizer of the raw inputs: split on
    u at 5; each cell's centroid sits at the overall class-average v = 2."""
    return OneBitQuantizer(np.array([[2.5, 2.0], [7.5, 2.0]]))


def analytic_feature_quantizer() -> OneBitQuantizer:
    """The distortion-optimal one-bit quantizer of the features: one codeword
    per class circle center."""
    return OneBitQuantizer(np.array(_CIRCLE_CENTERS, dtype=float))


def analytic_input_mse() -> float:
    """Per-cell MSE of the optimal input quantizer: u variance within a half
    plus the squared offset and spread of v around the pooled mean."""
    return 25.0 / 12.0 + 1.0 + 0.04 / 3.0


def fit_one_bit_quantizer(points: np.ndarray, seed: int = 0) -> OneBitQuantizer:
    """Two-codeword Lloyd fit (k-means with ++-style seeding)."""
    centroids, _ = kmeans2(np.asarray(points, dtype=float), 2, minit="++", seed=seed)
    order = np.argsort(centroids[:, 0])
    return OneBitQuantizer(centroids[order])


def task_error_under_quantizer(
    quantizer: OneBitQuantizer, points: np.ndarray, labels: np.ndarray
) -> float:
    """Fraction of points whose class, read off the reproduction through the
    classifier head, disagrees with the true label."""
    predicted = map_h(quantizer.reproduce(points))
    return float((predicted != np.asarray(labels)).mean())


@dataclass(frozen=True, eq=False)
class ToyReport:
    dataset_size: int
    seed: int
    input_report: AppropriatenessReport
    feature_report: AppropriatenessReport
    input_quantizer: OneBitQuantizer
    feature_quantizer: OneBitQuantizer
    input_mse: float
    input_mse_analytic: float
    input_task_error: float
    feature_task_error: float

    def to_json(self) -> dict:
        return {
            "dataset_size": self.dataset_size,
            "seed": self.seed,
            "rho_inputs": self.input_report.rho,
            "rho_features": self.feature_report.rho,
            "input_quantizer": self.input_quantizer.representatives.tolist(),
            "feature_quantizer": self.feature_quantizer.representatives.tolist(),
            "input_mse": self.input_mse,
            "input_mse_analytic": self.input_mse_analytic,
            "input_task_error": self.input_task_error,
            "feature_task_error": self.feature_task_error,
        }


def _feature_set(points: np.ndarray, labels: np.ndarray, meta: str) -> LabeledFeatureSet:
    return LabeledFeatureSet(points, labels, num_classes=2, metadata=meta)


def run_experiment(n: int = 200_000, seed: int = 0, fit: bool = False) -> ToyReport:
    """Sample, score both representations, quantize each to one bit, and
    measure distortion and task error.

    With fit=True the quantizers come from a Lloyd fit on the sample instead
    of the closed-form optima.
    """
    ds = sample_dataset(n, seed)
    input_report = compute_report(_feature_set(ds.inputs, ds.labels, "toy inputs"))
    feature_report = compute_report(_feature_set(ds.features, ds.labels, "toy features"))
    if fit:
        qx = fit_one_bit_quantizer(ds.inputs, seed)
        qy = fit_one_bit_quantizer(ds.features, seed)
    else:
        qx = analytic_input_quantizer()
        qy = analytic_feature_quantizer()
    return ToyReport(
        dataset_size=n,
        seed=seed,
        input_report=input_report,
        feature_report=feature_report,
        input_quantizer=qx,
        feature_quantizer=qy,
        input_mse=qx.mse(ds.inputs),
        input_mse_analytic=analytic_input_mse(),
        input_task_error=task_error_under_quantizer(qx, ds.inputs, ds.labels),
        feature_task_error=task_error_under_quantizer(qy, ds.features, ds.labels),
    )


def export_feature_sets(ds: ToyDataset, directory) -> dict[str, str]:
    """Write both representations as binary feature sets; returns the paths."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, points in (("inputs", ds.inputs), ("features", ds.features)):
        path = directory / f"toy_{name}.lfs"
        save_feature_set(_feature_set(points, ds.labels, f"toy {name}"), path)
        paths[name] = str(path)
    return paths
