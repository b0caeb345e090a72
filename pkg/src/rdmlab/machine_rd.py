"""Reductions of machine-oriented rate-distortion functions to plain (source,
distortion-matrix) pairs, plus evaluation of induced distortions and the
supervised-versus-unsupervised rate gap.

Every coding approach (full-input, model splitting, direct) becomes an
ordinary rate-distortion problem once the task model is folded into the
distortion matrix; the solver never needs to know about the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .probspace import (
    Alphabet,
    AlphabetMismatchError,
    Channel,
    DistortionMatrix,
    FiniteDistribution,
    TaskModel,
    mutual_information,
    pushforward,
)
from .rd_solver import RDCurve, RDSolverConfig, rate_at_distortion, sweep

VARIANTS = ("full", "split", "direct")


@dataclass(frozen=True)
class CodingApproach:
    """Which signal is quantized, where the model is cut, and where distortion
    is measured.

    variant "full" encodes the input itself, "split" encodes the feature at
    `cut`, "direct" encodes the input but reproduces the feature at `cut`.
    `reproduction` optionally restricts the reproduction letters to a subset
    of the reproduction alphabet (indices); by default the whole alphabet of
    the quantized/reproduced space is available.
    """

    variant: str
    cut: str | None = None
    target: str = "T"
    reproduction: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.variant in ("split", "direct") and self.cut is None:
            raise ValueError(f"variant {self.variant!r} requires a cut name")
        if self.reproduction is not None:
            rep = tuple(int(i) for i in self.reproduction)
            if not rep:
                raise ValueError("reproduction restriction must be non-empty")
            if len(set(rep)) != len(rep):
                raise ValueError("reproduction restriction has duplicate letters")
            object.__setattr__(self, "reproduction", rep)


@dataclass(frozen=True, eq=False)
class MachineRDInstance:
    """A source law, a task model, and distortion matrices keyed by cut name."""

    source_law: FiniteDistribution
    model: TaskModel
    distortions: Mapping[str, DistortionMatrix]

    def __post_init__(self) -> None:
        if self.source_law.alphabet != self.model.alphabet_at(0):
            raise AlphabetMismatchError("source law does not live on the model input")
        dists = dict(self.distortions)
        if "T" not in dists:
            raise ValueError("a task distortion matrix (key 'T') is required")
        for name, mat in dists.items():
            alph = self.model.alphabet_at(self.model.cut_position(name))
            if mat.row_alphabet != alph or mat.col_alphabet != alph:
                raise AlphabetMismatchError(
                    f"distortion {name!r} is not square over the {name!r} alphabet"
                )
        object.__setattr__(self, "distortions", dists)

    def distortion_at(self, target: str) -> DistortionMatrix:
        try:
            return self.distortions[target]
        except KeyError:
            raise ValueError(
                f"no distortion matrix for target {target!r}; "
                f"available: {sorted(self.distortions)}"
            ) from None


def _positions(instance: MachineRDInstance, approach: CodingApproach) -> tuple[int, int, int]:
    """(input boundary, reproduction boundary, target boundary) for the approach."""
    model = instance.model
    target_pos = model.cut_position(approach.target)
    if approach.variant == "full":
        in_pos, rep_pos = 0, 0
    else:
        cut_pos = model.cut_position(approach.cut)
        in_pos = 0 if approach.variant == "direct" else cut_pos
        rep_pos = cut_pos
    if target_pos < rep_pos:
        raise ValueError(
            f"distortion target {approach.target!r} is shallower than the cut"
        )
    return in_pos, rep_pos, target_pos


def _sub_alphabet(base: Alphabet, letters: tuple[int, ...]) -> Alphabet:
    for i in letters:
        if not 0 <= i < base.size:
            raise ValueError(f"reproduction letter {i} out of range for the cut alphabet")
    return Alphabet(len(letters), labels=tuple(base.label(i) for i in letters))


def reduce(
    instance: MachineRDInstance, approach: CodingApproach
) -> tuple[FiniteDistribution, DistortionMatrix]:
    """Fold the task model into a plain (source, distortion matrix) pair."""
    model = instance.model
    in_pos, rep_pos, target_pos = _positions(instance, approach)
    target_d = instance.distortion_at(approach.target).values

    to_target_in = model.map_between(in_pos, target_pos).array
    to_target_rep = model.map_between(rep_pos, target_pos).array

    if in_pos == 0:
        source = instance.source_law
    else:
        source = pushforward(instance.source_law, model.map_between(0, in_pos))

    letters = approach.reproduction or tuple(range(model.alphabet_at(rep_pos).size))
    rep_alphabet = (
        model.alphabet_at(rep_pos)
        if approach.reproduction is None
        else _sub_alphabet(model.alphabet_at(rep_pos), letters)
    )
    cols = to_target_rep[np.asarray(letters)]
    values = target_d[np.ix_(to_target_in, cols)]
    return source, DistortionMatrix(source.alphabet, rep_alphabet, values)


def machine_rd(
    instance: MachineRDInstance,
    approach: CodingApproach,
    config: RDSolverConfig | None = None,
) -> RDCurve:
    """Rate-distortion curve of the reduced pair, tagged with the approach."""
    source, dmat = reduce(instance, approach)
    tag = f"{approach.variant}@{approach.cut or 'X'}->{approach.target}"
    return sweep(source, dmat, config, tag=tag)


def induced_distortion(
    instance: MachineRDInstance,
    approach: CodingApproach,
    channel: Channel,
    target: str,
) -> float:
    """Expected distortion of a channel, measured at `target` instead of the
    approach's own target. Pure evaluation, no optimization."""
    model = instance.model
    in_pos, rep_pos, _ = _positions(instance, approach)
    target_pos = model.cut_position(target)
    if target_pos < rep_pos:
        raise ValueError(f"target {target!r} is shallower than the reproduction space")
    target_d = instance.distortion_at(target).values

    letters = approach.reproduction or tuple(range(model.alphabet_at(rep_pos).size))
    if channel.output.size != len(letters):
        raise AlphabetMismatchError("channel output does not match the approach's letters")
    if channel.input != (
        instance.source_law.alphabet if in_pos == 0 else model.alphabet_at(in_pos)
    ):
        raise AlphabetMismatchError("channel input does not match the approach's source")

    to_target_in = model.map_between(in_pos, target_pos).array
    to_target_rep = model.map_between(rep_pos, target_pos).array[np.asarray(letters)]
    if in_pos == 0:
        p = instance.source_law.mass
    else:
        p = pushforward(instance.source_law, model.map_between(0, in_pos)).mass
    values = target_d[np.ix_(to_target_in, to_target_rep)]
    return float(np.sum(p[:, None] * channel.rows * values))


@dataclass(frozen=True)
class SupervisedGapResult:
    rate_unsupervised: float
    induced_task_distortion: float
    rate_supervised: float
    gap: float


def supervised_gap(
    instance: MachineRDInstance,
    input_distortion_cap: float,
    config: RDSolverConfig | None = None,
) -> SupervisedGapResult:
    """Rate saved by optimizing at the task instead of at the input.

    Solves R(D_X) for input distortion, evaluates the optimizer's induced task
    distortion D_T', then solves the task problem at D_T'. The gap is
    non-negative up to solver noise; it is a consequence of the task rate
    function being no larger at the induced distortion.
    """
    input_approach = CodingApproach("full", target="X")
    task_approach = CodingApproach("full", target="T")
    src_x, d_x = reduce(instance, input_approach)
    unsup = rate_at_distortion(src_x, d_x, input_distortion_cap, config)
    d_task = induced_distortion(instance, input_approach, unsup.channel, "T")
    src_t, d_t = reduce(instance, task_approach)
    sup = rate_at_distortion(src_t, d_t, d_task, config)
    return SupervisedGapResult(
        rate_unsupervised=unsup.rate,
        induced_task_distortion=d_task,
        rate_supervised=sup.rate,
        gap=unsup.rate - sup.rate,
    )


def distortion_levels(
    instance: MachineRDInstance,
    approach: CodingApproach,
    count: int,
) -> np.ndarray:
    """Interior distortion levels spanning (d_min, d_max) of the reduced pair."""
    from .rd_solver import d_max as _dmax, d_min as _dmin

    source, dmat = reduce(instance, approach)
    lo, hi = _dmin(source, dmat), _dmax(source, dmat)
    fractions = (np.arange(count) + 1.0) / (count + 1.0)
    return lo + (hi - lo) * fractions


def compare_curves(a: RDCurve, b: RDCurve, levels: np.ndarray) -> float:
    """Largest absolute rate difference at matched distortion levels.

    Matched-distortion comparison interpolates linearly on each convex curve;
    both curves should come from the same slope grid so that interpolation
    error cancels.
    """
    return float(
        max(abs(a.rate_at(float(d)) - b.rate_at(float(d))) for d in levels)
    )
