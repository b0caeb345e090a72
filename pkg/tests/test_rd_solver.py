import numpy as np
import pytest

from rdmlab.probspace import Alphabet, DistortionMatrix, FiniteDistribution
from rdmlab.rd_solver import (
    InstanceTooLargeError,
    RDSolverConfig,
    blahut_arimoto,
    brute_force_rd,
    brute_force_rd_point,
    d_max,
    d_min,
    rate_at_distortion,
    sweep,
)


def binary_source(p=0.5):
    a = Alphabet(2)
    return (
        FiniteDistribution(a, np.array([p, 1 - p])),
        DistortionMatrix(a, a, 1.0 - np.eye(2)),
    )


def random_pair(n, m, seed):
    rng = np.random.default_rng(seed)
    mass = rng.random(n) + 0.2
    src = FiniteDistribution(Alphabet(n), mass / mass.sum())
    vals = rng.uniform(0.0, 1.0, (n, m))
    for i in range(min(n, m)):
        vals[i, i] = 0.0
    return src, DistortionMatrix(Alphabet(n), Alphabet(m), vals)


def h_binary(x):
    return -(x * np.log2(x) + (1 - x) * np.log2(1 - x))


def test_binary_hamming_closed_form():
    src, dm = binary_source()
    for cap in (0.02, 0.1, 0.3, 0.45):
        pt = rate_at_distortion(src, dm, cap)
        assert pt.rate == pytest.approx(1.0 - h_binary(cap), abs=1e-6)
        assert pt.distortion <= cap + 1e-9


def test_zero_cap_gives_source_entropy():
    src, dm = binary_source(0.3)
    pt = rate_at_distortion(src, dm, 0.0)
    assert pt.rate == pytest.approx(h_binary(0.3), abs=1e-6)


def test_cap_at_or_beyond_dmax_gives_zero_rate():
    src, dm = binary_source(0.3)
    assert rate_at_distortion(src, dm, d_max(src, dm)).rate == pytest.approx(0.0, abs=1e-9)
    assert rate_at_distortion(src, dm, 0.9).rate == 0.0


def test_d_endpoints():
    src, dm = binary_source(0.3)
    assert d_min(src, dm) == 0.0
    assert d_max(src, dm) == pytest.approx(0.3)


def test_blahut_arimoto_point_is_consistent():
    src, dm = random_pair(4, 3, 0)
    pt = blahut_arimoto(src, dm, 2.0, RDSolverConfig())
    from rdmlab.probspace import expected_distortion, mutual_information

    assert pt.rate == pytest.approx(mutual_information(src, pt.channel))
    assert pt.distortion == pytest.approx(expected_distortion(src, pt.channel, dm))


def test_sweep_curve_is_monotone_and_convex():
    src, dm = random_pair(5, 4, 1)
    curve = sweep(src, dm)
    d = curve.distortions
    r = curve.rates
    assert np.all(np.diff(d) > 0)
    assert np.all(np.diff(r) < 1e-15)
    slopes = np.diff(r) / np.diff(d)
    assert np.all(np.diff(slopes) >= -1e-7), "curve must be convex"


def test_sweep_spans_the_distortion_range():
    src, dm = random_pair(4, 4, 2)
    curve = sweep(src, dm)
    assert curve.distortions[0] == pytest.approx(d_min(src, dm), abs=1e-9)
    assert curve.distortions[-1] == pytest.approx(d_max(src, dm), abs=1e-9)
    assert curve.rates[-1] == pytest.approx(0.0, abs=1e-9)


def test_rate_at_interpolates_between_points():
    src, dm = binary_source()
    curve = sweep(src, dm)
    for cap in (0.1, 0.2, 0.3):
        # Chords of a convex curve overestimate slightly between grid points.
        assert curve.rate_at(cap) == pytest.approx(1.0 - h_binary(cap), abs=5e-3)


def test_rate_at_distortion_channel_meets_cap():
    from rdmlab.probspace import expected_distortion

    src, dm = random_pair(4, 3, 3)
    cap = 0.5 * (d_min(src, dm) + d_max(src, dm))
    pt = rate_at_distortion(src, dm, cap)
    assert expected_distortion(src, pt.channel, dm) <= cap + 1e-9


def test_symmetric_ternary_matches_brute_force():
    a = Alphabet(3)
    src = FiniteDistribution(a, np.full(3, 1.0 / 3.0))
    dm = DistortionMatrix(a, a, 1.0 - np.eye(3))
    for cap in (0.2, 0.4):
        r_ba = rate_at_distortion(src, dm, cap).rate
        r_bf = brute_force_rd(src, dm, cap, grid_steps=20)
        assert r_bf >= r_ba - 1e-9
        assert r_bf - r_ba < 2e-2


def test_sweep_points_within_brute_force_bound():
    src, dm = random_pair(4, 3, 4)
    curve = sweep(src, dm)
    for p in curve.points:
        if d_min(src, dm) < p.distortion < d_max(src, dm):
            r_bf = brute_force_rd(src, dm, p.distortion, grid_steps=10)
            assert r_bf >= p.rate - 1e-9


def test_brute_force_rejects_large_instances():
    src, dm = random_pair(5, 3, 5)
    with pytest.raises(InstanceTooLargeError):
        brute_force_rd(src, dm, 0.2, grid_steps=10)
    src, dm = random_pair(4, 3, 5)
    with pytest.raises(InstanceTooLargeError):
        brute_force_rd(src, dm, 0.2, grid_steps=21)


def test_brute_force_point_reports_achieved_distortion():
    src, dm = random_pair(3, 3, 6)
    cap = 0.5 * (d_min(src, dm) + d_max(src, dm))
    rate, achieved = brute_force_rd_point(src, dm, cap, grid_steps=10)
    assert achieved <= cap + 1e-9
    assert rate >= 0.0


def test_infeasible_cap_raises():
    src, dm = random_pair(3, 3, 7)
    with pytest.raises(ValueError):
        brute_force_rd(src, dm, d_min(src, dm) - 0.5, grid_steps=10)


def test_sweep_parallel_matches_serial():
    src, dm = random_pair(5, 4, 8)
    serial = sweep(src, dm, workers=1)
    parallel = sweep(src, dm, workers=4)
    np.testing.assert_allclose(serial.rates, parallel.rates, atol=1e-12)
    np.testing.assert_allclose(serial.distortions, parallel.distortions, atol=1e-12)
