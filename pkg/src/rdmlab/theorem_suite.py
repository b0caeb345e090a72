"""Randomized-instance verification harness for the coding-for-machines
equalities and inequalities.

Each check compares rate-distortion curves (or rate gaps) produced by
independent reductions of the same instance; a Verdict aggregates the worst
violation across seeds and distortion levels and is reproducible bit-for-bit
from its seeds and configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .machine_rd import (
    CodingApproach,
    MachineRDInstance,
    compare_curves,
    distortion_levels,
    machine_rd,
    reduce,
    supervised_gap,
)
from .probspace import (
    Alphabet,
    Channel,
    DeterministicMap,
    DistortionMatrix,
    FiniteDistribution,
    TaskModel,
    expected_distortion,
    merge_reproduction_letters,
    mutual_information,
)
from .rd_solver import RDSolverConfig, rate_at_distortion

DISTORTION_KINDS = ("ZeroOne", "RandomNonneg", "Hamming")

# Equality checks compare interpolated curves; inequality checks are one-sided.
EQUALITY_TOL = 1e-6
INEQUALITY_TOL = 1e-8
STRICT_GAP = 1e-4


@dataclass(frozen=True)
class InstanceSpec:
    """Sizes, seed, and distortion family for one sampled instance."""

    sizes: tuple[int, int, int, int]  # |X|, |Y1|, |Y2|, |T|
    seed: int = 0
    distortion_kind: str = "ZeroOne"
    enforce_thm2_conditions: bool = False
    enforce_thm4_conditions: bool = False

    def __post_init__(self) -> None:
        nx, ny1, ny2, nt = self.sizes
        if not (nx >= ny1 >= ny2 >= nt >= 2):
            raise ValueError(
                f"sizes must be non-increasing with |T| >= 2, got {self.sizes}"
            )
        if self.distortion_kind not in DISTORTION_KINDS:
            raise ValueError(f"unknown distortion kind {self.distortion_kind!r}")


@dataclass(frozen=True)
class Verdict:
    theorem: str
    instances: int
    max_violation: float
    tolerance: float
    passed: bool
    failing_seeds: tuple[int, ...]
    errors: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "instances": self.instances,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "failing_seeds": list(self.failing_seeds),
            "errors": list(self.errors),
        }


def _surjective_map(rng: np.random.Generator, a: Alphabet, b: Alphabet) -> DeterministicMap:
    # Guarantee surjectivity by seeding one preimage per output symbol.
    table = np.concatenate(
        [rng.permutation(b.size), rng.integers(0, b.size, a.size - b.size)]
    )
    rng.shuffle(table)
    return DeterministicMap(a, b, tuple(int(t) for t in table))


def _distortion(rng: np.random.Generator, alphabet: Alphabet, kind: str) -> DistortionMatrix:
    n = alphabet.size
    if kind in ("ZeroOne", "Hamming"):
        values = 1.0 - np.eye(n)
    else:
        values = rng.uniform(0.2, 1.0, (n, n))
        np.fill_diagonal(values, 0.0)
    return DistortionMatrix(alphabet, alphabet, values)


def generate_instance(spec: InstanceSpec) -> MachineRDInstance:
    """Deterministic random instance: surjective stages, full-support source."""
    rng = np.random.default_rng(spec.seed)
    nx, ny1, ny2, nt = spec.sizes
    ax, ay1, ay2, at = (Alphabet(n) for n in spec.sizes)
    g1 = _surjective_map(rng, ax, ay1)
    g2 = _surjective_map(rng, ay1, ay2)
    h2 = _surjective_map(rng, ay2, at)
    if spec.enforce_thm4_conditions:
        # Need two inputs sharing a task output; resample h2 until the
        # composed f is non-injective (guaranteed when nx > nt, but verify).
        for _ in range(100):
            f = tuple(h2.table[g2.table[g1.table[i]]] for i in range(nx))
            if len(set(f)) < nx:
                break
            h2 = _surjective_map(rng, ay2, at)
        else:
            raise ValueError("could not construct a non-injective task model")
    model = TaskModel(stages=(g1, g2, h2), cuts={"Y1": 1, "Y2": 2})
    mass = rng.random(nx) + 0.5
    source = FiniteDistribution(ax, mass / mass.sum())
    distortions = {
        "T": _distortion(rng, at, spec.distortion_kind),
        "X": _distortion(rng, ax, spec.distortion_kind),
        "Y1": _distortion(rng, ay1, spec.distortion_kind),
        "Y2": _distortion(rng, ay2, spec.distortion_kind),
    }
    return MachineRDInstance(source, model, distortions)


def thm4_strict_instance(seed: int = 0) -> tuple[MachineRDInstance, float]:
    """A small instance plus input-distortion cap engineered so the supervised
    rate is strictly below the input rate: two input letters share each task
    output but have different posteriors under input-optimal coding."""
    rng = np.random.default_rng(seed)
    ax, ay1, ay2, at = Alphabet(4), Alphabet(3), Alphabet(2), Alphabet(2)
    g1 = DeterministicMap(ax, ay1, (0, 0, 1, 2))
    g2 = DeterministicMap(ay1, ay2, (0, 1, 1))
    h2 = DeterministicMap.identity(at)
    model = TaskModel(stages=(g1, g2, h2), cuts={"Y1": 1, "Y2": 2})
    mass = np.array([0.3, 0.2, 0.3, 0.2]) + rng.uniform(0.0, 0.05, 4)
    source = FiniteDistribution(ax, mass / mass.sum())
    distortions = {
        "T": DistortionMatrix(at, at, 1.0 - np.eye(2)),
        "X": DistortionMatrix(ax, ax, 1.0 - np.eye(4)),
        "Y1": DistortionMatrix(ay1, ay1, 1.0 - np.eye(3)),
        "Y2": DistortionMatrix(ay2, ay2, 1.0 - np.eye(2)),
    }
    return MachineRDInstance(source, model, distortions), 0.25


def _check_equalities(
    instance: MachineRDInstance,
    approaches: list[CodingApproach],
    levels_count: int,
    config: RDSolverConfig,
) -> float:
    curves = [machine_rd(instance, a, config) for a in approaches]
    levels = distortion_levels(instance, approaches[0], levels_count)
    worst = 0.0
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            worst = max(worst, compare_curves(curves[i], curves[j], levels))
    return worst


def _check_deeper_split(
    instance: MachineRDInstance,
    levels_count: int,
    config: RDSolverConfig,
    rng: np.random.Generator,
) -> float:
    """R_{Y2}(D;T) <= R_{Y1}(D;T): a restricted Y1 reproduction set maps through
    g2 to a Y2 set that can only do better (data processing)."""
    ny1 = instance.model.alphabet_at(1).size
    size = int(rng.integers(2, ny1 + 1))
    letters1 = tuple(sorted(rng.choice(ny1, size=size, replace=False).tolist()))
    g2 = instance.model.map_between(1, 2)
    letters2 = tuple(sorted({g2(i) for i in letters1}))
    a1 = CodingApproach("split", cut="Y1", target="T", reproduction=letters1)
    a2 = CodingApproach("split", cut="Y2", target="T", reproduction=letters2)
    src1, d1 = reduce(instance, a1)
    src2, d2 = reduce(instance, a2)
    levels = distortion_levels(instance, a1, levels_count)
    worst = 0.0
    for level in levels:
        r1 = rate_at_distortion(src1, d1, float(level), config).rate
        r2 = rate_at_distortion(src2, d2, float(level), config).rate
        worst = max(worst, r2 - r1)
    return worst


def thm2a_instance(seed: int = 0) -> MachineRDInstance:
    """Instance with reproduction letters whose backend output falls outside
    the task-model image, but with no-worse in-image alternatives (0/1 task
    distortion makes any in-image letter at least as good)."""
    rng = np.random.default_rng(seed)
    ax, ay1, ay2, at = Alphabet(6), Alphabet(4), Alphabet(3), Alphabet(3)
    # g1 deliberately misses letter 3 of Y1; g2 sends it to a Y2 letter whose
    # task output is unreachable through g1.
    table = (0, 1, 2) + tuple(int(t) for t in rng.integers(0, 3, 3))
    g1 = DeterministicMap(ax, ay1, table)
    g2 = DeterministicMap(ay1, ay2, (0, 1, 1, 2))
    h2 = DeterministicMap.identity(at)
    model = TaskModel(stages=(g1, g2, h2), cuts={"Y1": 1, "Y2": 2})
    mass = rng.random(6) + 0.5
    source = FiniteDistribution(ax, mass / mass.sum())
    distortions = {
        "T": DistortionMatrix(at, at, 1.0 - np.eye(3)),
        "X": DistortionMatrix(ax, ax, 1.0 - np.eye(6)),
        "Y1": DistortionMatrix(ay1, ay1, 1.0 - np.eye(4)),
        "Y2": DistortionMatrix(ay2, ay2, 1.0 - np.eye(3)),
    }
    return MachineRDInstance(source, model, distortions)


def _check_merge(
    instance: MachineRDInstance,
    config: RDSolverConfig,
    rng: np.random.Generator,
    samples: int = 10,
) -> float:
    """Merging reproduction letters with identical task output preserves task
    distortion and never increases mutual information; strictly decreases it
    when the merged letters' posteriors differ."""
    approach = CodingApproach("full", target="T")
    source, dmat = reduce(instance, approach)
    f = instance.model.end_to_end
    pairs = [
        (i, j)
        for i in range(f.input.size)
        for j in range(i + 1, f.input.size)
        if f(i) == f(j)
    ]
    if not pairs:
        return 0.0
    worst = 0.0
    for _ in range(samples):
        rows = rng.random((source.alphabet.size, dmat.col_alphabet.size)) + 0.05
        rows /= rows.sum(axis=1, keepdims=True)
        channel = Channel(source.alphabet, dmat.col_alphabet, rows)
        keep, drop = pairs[int(rng.integers(len(pairs)))]
        merged = merge_reproduction_letters(channel, keep, drop)
        d_before = expected_distortion(source, channel, dmat)
        d_after = expected_distortion(source, merged, dmat)
        worst = max(worst, abs(d_after - d_before) / max(1.0, d_before))
        delta_i = mutual_information(source, merged) - mutual_information(source, channel)
        worst = max(worst, delta_i)
        q = source.mass @ channel.rows
        post_keep = source.mass * channel.rows[:, keep] / q[keep]
        post_drop = source.mass * channel.rows[:, drop] / q[drop]
        if np.max(np.abs(post_keep - post_drop)) > 1e-6:
            worst = max(worst, delta_i + 1e-9)  # must be strictly negative
    return worst


def _default_config() -> RDSolverConfig:
    # Equality checks compare curves swept on a shared slope grid, so solver
    # error cancels pointwise; a lighter grid and tolerance keep large
    # randomized batches fast without loosening the verdicts.
    grid = tuple(float(s) for s in np.logspace(-3.0, 3.0, 48))
    return RDSolverConfig(slope_grid=grid, convergence_tol=1e-9)


THEOREMS = (
    "thm1",
    "thm2",
    "thm2a",
    "cor-splits",
    "cor-distill",
    "deeper-split",
    "thm3",
    "thm4",
    "merge",
)


def default_specs(count: int, distortion_kind: str = "ZeroOne") -> list[InstanceSpec]:
    sizes_cycle = [(4, 3, 2, 2), (6, 4, 3, 3), (8, 5, 3, 2), (6, 3, 2, 2), (8, 6, 4, 3)]
    return [
        InstanceSpec(sizes=sizes_cycle[i % len(sizes_cycle)], seed=i,
                     distortion_kind=distortion_kind)
        for i in range(count)
    ]


def verify(
    theorem: str,
    specs: list[InstanceSpec],
    distortion_levels_count: int = 5,
    tolerance: float = EQUALITY_TOL,
    config: RDSolverConfig | None = None,
) -> Verdict:
    """Run one theorem check over every spec and aggregate violations."""
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}; valid ids: {list(THEOREMS)}")
    config = config or _default_config()
    worst = 0.0
    failing: list[int] = []
    errors: list[str] = []
    for spec in specs:
        try:
            violation = _run_one(theorem, spec, distortion_levels_count, config)
        except Exception as exc:  # solver failures recorded, not fatal
            errors.append(f"seed {spec.seed}: {exc}")
            failing.append(spec.seed)
            continue
        if violation > tolerance:
            failing.append(spec.seed)
        worst = max(worst, violation)
    passed = worst <= tolerance and not errors
    return Verdict(
        theorem=theorem,
        instances=len(specs),
        max_violation=worst,
        tolerance=tolerance,
        passed=passed,
        failing_seeds=tuple(failing),
        errors=tuple(errors),
    )


def _run_one(
    theorem: str, spec: InstanceSpec, levels: int, config: RDSolverConfig
) -> float:
    rng = np.random.default_rng(spec.seed + 0x5EED)
    if theorem == "thm1":
        instance = generate_instance(spec)
        return _check_equalities(
            instance,
            [CodingApproach("direct", cut="Y1"), CodingApproach("split", cut="Y1")],
            levels,
            config,
        )
    if theorem == "thm2":
        instance = generate_instance(spec)
        return _check_equalities(
            instance,
            [CodingApproach("full"), CodingApproach("split", cut="Y1")],
            levels,
            config,
        )
    if theorem == "thm2a":
        instance = thm2a_instance(spec.seed)
        return _check_equalities(
            instance,
            [CodingApproach("full"), CodingApproach("split", cut="Y1")],
            levels,
            config,
        )
    if theorem == "cor-splits":
        instance = generate_instance(spec)
        return _check_equalities(
            instance,
            [
                CodingApproach("split", cut="Y1"),
                CodingApproach("split", cut="Y2"),
                CodingApproach("full"),
            ],
            levels,
            config,
        )
    if theorem == "cor-distill":
        instance = generate_instance(spec)
        return _check_equalities(
            instance,
            [
                CodingApproach("direct", cut="Y1", target="Y2"),
                CodingApproach("split", cut="Y1", target="Y2"),
                CodingApproach("split", cut="Y2", target="Y2"),
            ],
            levels,
            config,
        )
    if theorem == "deeper-split":
        instance = generate_instance(spec)
        return _check_deeper_split(instance, min(levels, 3), config, rng)
    if theorem == "thm3":
        instance = generate_instance(spec)
        from .rd_solver import d_max as _dmax

        src_x, d_x = reduce(instance, CodingApproach("full", target="X"))
        cap = 0.4 * _dmax(src_x, d_x)
        result = supervised_gap(instance, cap, config)
        return max(0.0, -result.gap)
    if theorem == "thm4":
        instance, cap = thm4_strict_instance(spec.seed)
        result = supervised_gap(instance, cap, config)
        return max(0.0, STRICT_GAP - result.gap)
    if theorem == "merge":
        spec4 = InstanceSpec(
            sizes=spec.sizes,
            seed=spec.seed,
            distortion_kind=spec.distortion_kind,
            enforce_thm4_conditions=True,
        )
        instance = generate_instance(spec4)
        return _check_merge(instance, config, rng)
    raise AssertionError(theorem)


def verify_merge_property(
    spec: InstanceSpec, samples: int = 100, config: RDSolverConfig | None = None
) -> Verdict:
    """Dedicated merge-transform check with a larger channel sample."""
    config = config or _default_config()
    rng = np.random.default_rng(spec.seed + 0x5EED)
    spec4 = InstanceSpec(
        sizes=spec.sizes,
        seed=spec.seed,
        distortion_kind=spec.distortion_kind,
        enforce_thm4_conditions=True,
    )
    instance = generate_instance(spec4)
    worst = _check_merge(instance, config, rng, samples=samples)
    tol = 1e-9
    return Verdict(
        theorem="merge",
        instances=samples,
        max_violation=worst,
        tolerance=tol,
        passed=worst <= tol,
        failing_seeds=() if worst <= tol else (spec.seed,),
    )
