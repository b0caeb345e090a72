import json

import numpy as np
import pytest

from rdmlab.theorem_suite import (
    THEOREMS,
    InstanceSpec,
    default_specs,
    generate_instance,
    thm2a_instance,
    thm4_strict_instance,
    verify,
    verify_merge_property,
)


def test_spec_validates_sizes():
    with pytest.raises(ValueError):
        InstanceSpec(sizes=(2, 3, 2, 2))
    with pytest.raises(ValueError):
        InstanceSpec(sizes=(4, 3, 2, 1))
    with pytest.raises(ValueError):
        InstanceSpec(sizes=(4, 3, 2, 2), distortion_kind="bogus")


def test_generate_instance_is_deterministic():
    spec = InstanceSpec(sizes=(6, 4, 3, 2), seed=5)
    a = generate_instance(spec)
    b = generate_instance(spec)
    np.testing.assert_array_equal(a.source_law.mass, b.source_law.mass)
    for s1, s2 in zip(a.model.stages, b.model.stages):
        assert s1.table == s2.table


def test_generated_stages_are_surjective():
    for seed in range(10):
        inst = generate_instance(InstanceSpec(sizes=(8, 5, 3, 2), seed=seed))
        for stage in inst.model.stages:
            assert set(stage.table) == set(range(stage.output.size))


def test_unknown_theorem_lists_valid_ids():
    with pytest.raises(ValueError, match="thm1"):
        verify("bogus", default_specs(1))


@pytest.mark.parametrize("theorem", THEOREMS)
def test_each_theorem_passes_on_small_batch(theorem):
    verdict = verify(theorem, default_specs(3))
    assert verdict.passed, (theorem, verdict.max_violation, verdict.errors)


def test_verdict_serializes_and_reproduces():
    a = verify("thm1", default_specs(2))
    b = verify("thm1", default_specs(2))
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(
        b.to_json(), sort_keys=True
    )


def test_zero_tolerance_rejects_float_noise():
    # A zero tolerance treats ordinary rounding as a violation; this is the
    # documented misuse mode, not a solver defect.
    verdict = verify("thm2", default_specs(2), tolerance=0.0)
    assert not verdict.passed


def test_thm4_instance_has_strict_gap():
    from rdmlab.machine_rd import supervised_gap

    instance, cap = thm4_strict_instance(0)
    result = supervised_gap(instance, cap)
    assert result.gap > 1e-4


def test_thm2a_instance_misses_a_frontend_letter():
    inst = thm2a_instance(0)
    g1 = inst.model.stages[0]
    assert set(g1.table) != set(range(g1.output.size))


def test_merge_property_large_sample():
    verdict = verify_merge_property(InstanceSpec(sizes=(6, 4, 3, 3), seed=0),
                                    samples=100)
    assert verdict.passed, verdict.max_violation


def test_randomized_distortions_also_pass():
    specs = default_specs(2, distortion_kind="RandomNonneg")
    assert verify("thm1", specs).passed
    assert verify("cor-distill", specs).passed
