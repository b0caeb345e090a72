"""Task appropriateness of a representation: how far apart the label clusters
sit relative to their internal spread.

A labeled feature set is scored per class by the squared-error distortion to
its own centroid (intra) and between centroids (inter); the per-class score is
the worst inter / sqrt(intra_i * intra_j) ratio against any other class, and the
overall score is the prior-weighted average. Feature sets load from a compact
binary container or from CSV.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

LFS_MAGIC = b"LFSV"
LFS_VERSION = 1


class FeatureSetFormatError(ValueError):
    """The file is not a readable labeled feature set."""


@dataclass(frozen=True, eq=False)
class LabeledFeatureSet:
    """N feature vectors of dimension d with integer class labels in [0, C)."""

    features: np.ndarray  # (N, d) float
    labels: np.ndarray  # (N,) int
    num_classes: int
    metadata: str = ""

    def __post_init__(self) -> None:
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {features.shape}")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must be a vector with one entry per row")
        if features.shape[0] == 0:
            raise ValueError("feature set is empty")
        if self.num_classes < 1:
            raise ValueError("num_classes must be positive")
        if labels.min() < 0 or labels.max() >= self.num_classes:
            raise ValueError("labels out of range for num_classes")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class ClassStats:
    label: int
    prior: float
    count: int
    intra: float  # mean squared distance to the class centroid
    rho: float  # worst normalized separation against any other class


@dataclass(frozen=True)
class AppropriatenessReport:
    classes: tuple[ClassStats, ...]
    inter: np.ndarray  # (C, C) squared centroid distances
    rho: float  # prior-weighted average of per-class scores

    def to_json(self) -> dict:
        return {
            "rho": self.rho,
            "classes": [
                {
                    "label": c.label,
                    "prior": c.prior,
                    "count": c.count,
                    "intra": c.intra,
                    "rho": c.rho,
                }
                for c in self.classes
            ],
            "inter": self.inter.tolist(),
        }


def compute_report(fs: LabeledFeatureSet) -> AppropriatenessReport:
    """Score every class and the overall prior-weighted appropriateness.

    Intra-class distortion is the biased variance around the empirical
    centroid (the distortion-minimizing single reproduction point). Classes
    need at least two members and nonzero spread for the ratio to be defined.
    """
    c = fs.num_classes
    counts = np.bincount(fs.labels, minlength=c)
    present = np.nonzero(counts)[0]
    if present.size < 2:
        raise ValueError("appropriateness needs at least two populated classes")
    few = [int(i) for i in present if counts[i] < 2]
    if few:
        raise ValueError(f"classes {few} have fewer than two members")

    centroids = np.zeros((c, fs.dimension))
    np.add.at(centroids, fs.labels, fs.features)
    centroids[present] /= counts[present, None]

    intra = np.zeros(c)
    sq = np.einsum("ij,ij->i", fs.features - centroids[fs.labels],
                   fs.features - centroids[fs.labels])
    np.add.at(intra, fs.labels, sq)
    intra[present] /= counts[present]
    degenerate = [int(i) for i in present if intra[i] <= 0.0]
    if degenerate:
        raise ValueError(
            f"classes {degenerate} have zero variance; separation is unbounded"
        )

    diff = centroids[present, None, :] - centroids[None, present, :]
    inter_present = np.einsum("ijk,ijk->ij", diff, diff)
    inter = np.full((c, c), np.nan)
    inter[np.ix_(present, present)] = inter_present

    priors = counts / counts.sum()
    stats = []
    rho_total = 0.0
    for a, i in enumerate(present):
        ratios = [
            inter_present[a, b] / np.sqrt(intra[i] * intra[j])
            for b, j in enumerate(present)
            if j != i
        ]
        rho_i = float(min(ratios))
        stats.append(
            ClassStats(
                label=int(i),
                prior=float(priors[i]),
                count=int(counts[i]),
                intra=float(intra[i]),
                rho=rho_i,
            )
        )
        rho_total += priors[i] * rho_i
    return AppropriatenessReport(classes=tuple(stats), inter=inter, rho=float(rho_total))


def save_feature_set(fs: LabeledFeatureSet, path: str | Path) -> None:
    """Write the binary container (little-endian, float32 features)."""
    meta = fs.metadata.encode("utf-8")
    if len(meta) > 0xFFFF:
        raise ValueError("metadata exceeds 65535 bytes")
    buf = io.BytesIO()
    buf.write(LFS_MAGIC)
    buf.write(struct.pack("<B", LFS_VERSION))
    buf.write(struct.pack("<III", len(fs), fs.dimension, fs.num_classes))
    buf.write(struct.pack("<H", len(meta)))
    buf.write(meta)
    feats = fs.features.astype("<f4")
    for label, row in zip(fs.labels, feats):
        buf.write(struct.pack("<I", int(label)))
        buf.write(row.tobytes())
    Path(path).write_bytes(buf.getvalue())


def _load_binary(raw: bytes, path: Path) -> LabeledFeatureSet:
    if len(raw) < 19:
        raise FeatureSetFormatError(f"{path}: truncated header")
    if raw[:4] != LFS_MAGIC:
        raise FeatureSetFormatError(f"{path}: bad magic {raw[:4]!r}")
    version = raw[4]
    if version != LFS_VERSION:
        raise FeatureSetFormatError(f"{path}: unsupported version {version}")
    n, d, c = struct.unpack_from("<III", raw, 5)
    (meta_len,) = struct.unpack_from("<H", raw, 17)
    offset = 19
    meta = raw[offset : offset + meta_len].decode("utf-8")
    offset += meta_len
    record = 4 + 4 * d
    if len(raw) != offset + n * record:
        raise FeatureSetFormatError(
            f"{path}: expected {offset + n * record} bytes, got {len(raw)}"
        )
    body = np.frombuffer(raw, dtype=np.uint8, offset=offset).reshape(n, record)
    labels = body[:, :4].copy().view("<u4").reshape(n).astype(np.int64)
    features = body[:, 4:].copy().view("<f4").reshape(n, d).astype(np.float64)
    return LabeledFeatureSet(features, labels, num_classes=c, metadata=meta)


def _load_csv(path: Path) -> LabeledFeatureSet:
    labels: list[int] = []
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (lineno == 1 and row[0].strip().lower() == "label"):
                continue
            try:
                labels.append(int(row[0]))
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise FeatureSetFormatError(f"{path}:{lineno}: {exc}") from None
            if len(rows) > 1 and len(rows[-1]) != len(rows[0]):
                raise FeatureSetFormatError(
                    f"{path}:{lineno}: inconsistent feature dimension"
                )
    if not rows:
        raise FeatureSetFormatError(f"{path}: no data rows")
    return LabeledFeatureSet(
        np.array(rows), np.array(labels), num_classes=max(labels) + 1
    )


def load_feature_set(path: str | Path) -> LabeledFeatureSet:
    """Load a feature set from the binary container or from CSV.

    The format is sniffed from the leading bytes, not the file extension.
    """
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == LFS_MAGIC:
        return _load_binary(raw, path)
    return _load_csv(path)


@dataclass(frozen=True)
class DepthSweepResult:
    names: tuple[str, ...]
    scores: tuple[float, ...]
    monotone_nondecreasing: bool

    def to_json(self) -> dict:
        return {
            "names": list(self.names),
            "scores": list(self.scores),
            "monotone_nondecreasing": self.monotone_nondecreasing,
        }


def depth_sweep(sets: dict[str, LabeledFeatureSet]) -> DepthSweepResult:
    """Score several representations of the same data, in the given order."""
    names = tuple(sets)
    scores = tuple(compute_report(fs).rho for fs in sets.values())
    monotone = all(b >= a for a, b in zip(scores, scores[1:]))
    return DepthSweepResult(names=names, scores=scores, monotone_nondecreasing=monotone)
