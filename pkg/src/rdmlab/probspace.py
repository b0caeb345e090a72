"""Finite probability spaces and the information-theoretic primitives built on them.

Alphabets, distributions, channels (row-stochastic conditional laws), and
deterministic maps are immutable value objects; every operation here is a pure
function, so instances can be shared freely across threads.

All rates and entropies are in bits (base-2 logarithms), with 0*log(0) := 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

# Probability budget: exact on construction from user data, slightly looser
# after internal floating-point arithmetic.
CONSTRUCTION_TOL = 1e-12
ARITHMETIC_TOL = 1e-10


class AlphabetMismatchError(ValueError):
    """Operands disagree on the alphabet at a junction."""


class HypothesisViolatedError(ValueError):
    """A reproduction letter's task output lies outside the image of the task model."""


@dataclass(frozen=True)
class Alphabet:
    """A finite symbol set, optionally with distinct human-readable labels."""

    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.size, (int, np.integer)) or self.size < 1:
            raise ValueError(f"alphabet size must be a positive integer, got {self.size!r}")
        object.__setattr__(self, "size", int(self.size))
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size:
                raise ValueError(
                    f"expected {self.size} labels, got {len(labels)}"
                )
            if len(set(labels)) != len(labels):
                raise ValueError("alphabet labels must be distinct")
            object.__setattr__(self, "labels", labels)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """A probability mass function over a finite alphabet."""

    alphabet: Alphabet
    mass: np.ndarray
    tol: float = field(default=CONSTRUCTION_TOL, repr=False)

    def __post_init__(self) -> None:
        mass = np.array(self.mass, dtype=float)
        if mass.shape != (self.alphabet.size,):
            raise ValueError(
                f"mass must have shape ({self.alphabet.size},), got {mass.shape}"
            )
        if np.any(mass < 0.0):
            raise ValueError("mass entries must be non-negative")
        total = float(mass.sum())
        if abs(total - 1.0) > self.tol:
            raise ValueError(f"mass must sum to 1 within {self.tol}, got {total!r}")
        object.__setattr__(self, "mass", _freeze(mass))

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "FiniteDistribution":
        return cls(alphabet, np.full(alphabet.size, 1.0 / alphabet.size))

    @classmethod
    def point_mass(cls, alphabet: Alphabet, symbol: int) -> "FiniteDistribution":
        mass = np.zeros(alphabet.size)
        mass[symbol] = 1.0
        return cls(alphabet, mass)


@dataclass(frozen=True, eq=False)
class Channel:
    """A conditional distribution p(b|a) as a row-stochastic matrix."""

    input: Alphabet
    output: Alphabet
    rows: np.ndarray
    tol: float = field(default=CONSTRUCTION_TOL, repr=False)

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=float)
        if rows.shape != (self.input.size, self.output.size):
            raise ValueError(
                f"rows must have shape {(self.input.size, self.output.size)}, got {rows.shape}"
            )
        if np.any(rows < 0.0):
            raise ValueError("channel rows must be non-negative")
        sums = rows.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > self.tol)[0]
        if bad.size:
            raise ValueError(
                f"channel row {bad[0]} sums to {sums[bad[0]]!r}, not 1 within {self.tol}"
            )
        object.__setattr__(self, "rows", _freeze(rows))

    @classmethod
    def from_map(cls, m: "DeterministicMap") -> "Channel":
        """Lift a deterministic map to a channel of point-mass rows."""
        rows = np.zeros((m.input.size, m.output.size))
        rows[np.arange(m.input.size), m.table] = 1.0
        return cls(m.input, m.output, rows)

    @classmethod
    def constant(cls, input: Alphabet, output: Alphabet, symbol: int) -> "Channel":
        rows = np.zeros((input.size, output.size))
        rows[:, symbol] = 1.0
        return cls(input, output, rows)


@dataclass(frozen=True)
class DeterministicMap:
    """A deterministic function between finite alphabets, as a lookup table."""

    input: Alphabet
    output: Alphabet
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        table = tuple(int(t) for t in self.table)
        if len(table) != self.input.size:
            raise ValueError(
                f"table must have {self.input.size} entries, got {len(table)}"
            )
        for i, t in enumerate(table):
            if not 0 <= t < self.output.size:
                raise ValueError(f"table[{i}] = {t} is not a valid output index")
        object.__setattr__(self, "table", table)

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "DeterministicMap":
        return cls(alphabet, alphabet, tuple(range(alphabet.size)))

    def __call__(self, i: int) -> int:
        return self.table[i]

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=int)


@dataclass(frozen=True)
class TaskModel:
    """A deterministic task model as an ordered chain of stage maps.

    Stage boundary k is the alphabet between stages k-1 and k; boundary 0 is
    the input space and boundary len(stages) is the task-output space. A cut
    name ("X", "Y1", ...) addresses a boundary. "X" and "T" are always defined.
    """

    stages: tuple[DeterministicMap, ...]
    cuts: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        stages = tuple(self.stages)
        if not stages:
            raise ValueError("a task model needs at least one stage")
        for k in range(len(stages) - 1):
            if stages[k].output != stages[k + 1].input:
                raise AlphabetMismatchError(
                    f"stage {k} output does not match stage {k + 1} input"
                )
        cuts = {str(name): int(pos) for name, pos in dict(self.cuts).items()}
        for name, pos in cuts.items():
            if not 0 <= pos <= len(stages):
                raise ValueError(f"cut {name!r} references boundary {pos}, out of range")
        cuts.setdefault("X", 0)
        cuts.setdefault("T", len(stages))
        object.__setattr__(self, "stages", stages)
        object.__setattr__(self, "cuts", cuts)

    @property
    def depth(self) -> int:
        return len(self.stages)

    def alphabet_at(self, boundary: int) -> Alphabet:
        if boundary == 0:
            return self.stages[0].input
        return self.stages[boundary - 1].output

    def cut_position(self, name: str) -> int:
        try:
            return self.cuts[name]
        except KeyError:
            raise ValueError(
                f"unknown cut {name!r}; known cuts: {sorted(self.cuts)}"
            ) from None

    def map_between(self, start: int, stop: int) -> DeterministicMap:
        """The composed deterministic map from boundary `start` to boundary `stop`."""
        if not 0 <= start <= stop <= self.depth:
            raise ValueError(f"invalid boundary range ({start}, {stop})")
        m = DeterministicMap.identity(self.alphabet_at(start))
        for stage in self.stages[start:stop]:
            m = compose(m, stage)
        return m

    @property
    def end_to_end(self) -> DeterministicMap:
        return self.map_between(0, self.depth)

    @property
    def image(self) -> frozenset[int]:
        """The image of the full task model over all inputs."""
        return frozenset(self.end_to_end.table)


@dataclass(frozen=True, eq=False)
class DistortionMatrix:
    """Pairwise distortion values between a source and a reproduction alphabet."""

    row_alphabet: Alphabet
    col_alphabet: Alphabet
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        shape = (self.row_alphabet.size, self.col_alphabet.size)
        if values.shape != shape:
            raise ValueError(f"values must have shape {shape}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("distortion values must be finite")
        if np.any(values < 0.0):
            raise ValueError("distortion values must be non-negative")
        object.__setattr__(self, "values", _freeze(values))


# ---------------------------------------------------------------------------
# Operations


def compose(a: DeterministicMap, b: DeterministicMap) -> DeterministicMap:
    """b after a: result(i) = b(a(i))."""
    if a.output != b.input:
        raise AlphabetMismatchError("cannot compose: first map's output != second map's input")
    return DeterministicMap(a.input, b.output, tuple(b.table[t] for t in a.table))


def pushforward(p: FiniteDistribution, m: DeterministicMap) -> FiniteDistribution:
    """The distribution of m(A) when A ~ p."""
    if p.alphabet != m.input:
        raise AlphabetMismatchError("distribution alphabet does not match map input")
    mass = np.zeros(m.output.size)
    np.add.at(mass, m.array, p.mass)
    return FiniteDistribution(m.output, mass, tol=ARITHMETIC_TOL)


def channel_compose(c: Channel, m: DeterministicMap) -> Channel:
    """Post-compose a channel with a deterministic map: A -> B -> C."""
    if c.output != m.input:
        raise AlphabetMismatchError("channel output does not match map input")
    rows = np.zeros((c.input.size, m.output.size))
    np.add.at(rows.T, m.array, c.rows.T)
    return Channel(c.input, m.output, rows, tol=ARITHMETIC_TOL)


def map_then_channel(m: DeterministicMap, c: Channel) -> Channel:
    """Pre-compose a channel with a deterministic map: A -> B -> C."""
    if m.output != c.input:
        raise AlphabetMismatchError("map output does not match channel input")
    return Channel(m.input, c.output, c.rows[m.array], tol=ARITHMETIC_TOL)


def entropy(p: FiniteDistribution) -> float:
    """Shannon entropy in bits."""
    mass = p.mass[p.mass > 0.0]
    return float(max(0.0, -np.sum(mass * np.log2(mass))))


def mutual_information(p: FiniteDistribution, c: Channel) -> float:
    """I(A; B) in bits for A ~ p and B | A ~ c."""
    if p.alphabet != c.input:
        raise AlphabetMismatchError("distribution alphabet does not match channel input")
    joint = p.mass[:, None] * c.rows
    marginal = joint.sum(axis=0)
    support = joint > 0.0
    prod = p.mass[:, None] * marginal[None, :]
    terms = np.zeros_like(joint)
    terms[support] = joint[support] * np.log2(joint[support] / prod[support])
    total = float(terms.sum())
    # Totals below 1e-14 bits are accumulation noise, not information.
    return total if total > 1e-14 else 0.0


def expected_distortion(
    p: FiniteDistribution, c: Channel, d: DistortionMatrix
) -> float:
    """E[d(A, B)] for A ~ p and B | A ~ c."""
    if p.alphabet != c.input:
        raise AlphabetMismatchError("distribution alphabet does not match channel input")
    if d.row_alphabet != c.input or d.col_alphabet != c.output:
        raise AlphabetMismatchError("distortion matrix does not match channel alphabets")
    return float(np.sum(p.mass[:, None] * c.rows * d.values))


def merge_reproduction_letters(c: Channel, keep: int, drop: int) -> Channel:
    """Move all mass from reproduction letter `drop` onto `keep`."""
    if keep == drop:
        raise ValueError("keep and drop must differ")
    for idx in (keep, drop):
        if not 0 <= idx < c.output.size:
            raise ValueError(f"reproduction letter {idx} out of range")
    rows = np.array(c.rows)
    rows[:, keep] += rows[:, drop]
    rows[:, drop] = 0.0
    return Channel(c.input, c.output, rows, tol=ARITHMETIC_TOL)


def lift_reproduction(c: Channel, model: TaskModel, cut: str) -> Channel:
    """Replace each reproduction letter at `cut` by an input-space representative.

    Each letter y-hat is mapped through the task backend and then to the
    lowest-index input whose task output matches; requires every letter's
    backend output to lie in the image of the full task model.
    """
    pos = model.cut_position(cut)
    if c.output != model.alphabet_at(pos):
        raise AlphabetMismatchError("channel output does not match the cut alphabet")
    backend = model.map_between(pos, model.depth)
    f = model.end_to_end
    representative: dict[int, int] = {}
    for x, t in enumerate(f.table):
        representative.setdefault(t, x)
    table = []
    for y_hat in range(c.output.size):
        t = backend(y_hat)
        if t not in representative:
            raise HypothesisViolatedError(
                f"backend output {t} of reproduction letter {y_hat} is not "
                "reachable by the task model"
            )
        table.append(representative[t])
    lift = DeterministicMap(c.output, model.alphabet_at(0), tuple(table))
    return channel_compose(c, lift)
