import numpy as np
import pytest

from rdmlab.task_appropriateness import (
    FeatureSetFormatError,
    LabeledFeatureSet,
    compute_report,
    depth_sweep,
    load_feature_set,
    save_feature_set,
)


def two_blob_set(separation=10.0, n=200, seed=0):
    rng = np.random.default_rng(seed)
    half = n // 2
    feats = np.vstack(
        [
            rng.normal(0.0, 1.0, (half, 3)),
            rng.normal(separation, 1.0, (n - half, 3)),
        ]
    )
    labels = np.repeat([0, 1], [half, n - half])
    return LabeledFeatureSet(feats, labels, num_classes=2)


def test_validation():
    with pytest.raises(ValueError):
        LabeledFeatureSet(np.zeros((0, 2)), np.zeros(0, dtype=int), num_classes=1)
    with pytest.raises(ValueError):
        LabeledFeatureSet(np.zeros((3, 2)), np.array([0, 1, 2]), num_classes=2)


def test_report_on_known_clusters():
    # Two singleton-ish clusters with hand-checkable moments.
    feats = np.array([[0.0], [2.0], [10.0], [12.0]])
    labels = np.array([0, 0, 1, 1])
    fs = LabeledFeatureSet(feats, labels, num_classes=2)
    report = compute_report(fs)
    # Centroids 1 and 11, biased variance 1 each, centroid gap squared 100.
    assert report.classes[0].intra == pytest.approx(1.0)
    assert report.classes[1].intra == pytest.approx(1.0)
    assert report.inter[0, 1] == pytest.approx(100.0)
    assert report.rho == pytest.approx(100.0)


def test_rho_grows_with_separation():
    r1 = compute_report(two_blob_set(5.0)).rho
    r2 = compute_report(two_blob_set(20.0)).rho
    assert r2 > r1


def test_priors_weight_the_average():
    feats = np.array([[0.0], [2.0], [10.0], [12.0], [10.5], [11.5]])
    labels = np.array([0, 0, 1, 1, 1, 1])
    fs = LabeledFeatureSet(feats, labels, num_classes=2)
    report = compute_report(fs)
    priors = [c.prior for c in report.classes]
    assert priors == pytest.approx([2 / 6, 4 / 6])
    expected = sum(p * c.rho for p, c in zip(priors, report.classes))
    assert report.rho == pytest.approx(expected)


def test_single_member_class_rejected():
    fs = LabeledFeatureSet(
        np.array([[0.0], [1.0], [5.0]]), np.array([0, 0, 1]), num_classes=2
    )
    with pytest.raises(ValueError, match="fewer than two"):
        compute_report(fs)


def test_zero_variance_class_rejected():
    fs = LabeledFeatureSet(
        np.array([[0.0], [0.0], [5.0], [6.0]]), np.array([0, 0, 1, 1]), num_classes=2
    )
    with pytest.raises(ValueError, match="zero variance"):
        compute_report(fs)


def test_binary_round_trip(tmp_path):
    fs = two_blob_set(n=50)
    path = tmp_path / "blobs.lfs"
    save_feature_set(
        LabeledFeatureSet(fs.features, fs.labels, 2, metadata="hello"), path
    )
    loaded = load_feature_set(path)
    assert loaded.metadata == "hello"
    assert loaded.num_classes == 2
    np.testing.assert_array_equal(loaded.labels, fs.labels)
    np.testing.assert_allclose(
        loaded.features, fs.features.astype(np.float32), rtol=0, atol=0
    )


def test_binary_rejects_corruption(tmp_path):
    fs = two_blob_set(n=10)
    path = tmp_path / "blobs.lfs"
    save_feature_set(fs, path)
    raw = path.read_bytes()
    (tmp_path / "trunc.lfs").write_bytes(raw[:-3])
    with pytest.raises(FeatureSetFormatError, match="bytes"):
        load_feature_set(tmp_path / "trunc.lfs")
    (tmp_path / "ver.lfs").write_bytes(raw[:4] + b"\x02" + raw[5:])
    with pytest.raises(FeatureSetFormatError, match="version"):
        load_feature_set(tmp_path / "ver.lfs")


def test_csv_loading(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("label,f0,f1\n0,1.0,2.0\n0,1.5,2.5\n1,5.0,6.0\n1,5.5,6.5\n")
    fs = load_feature_set(path)
    assert len(fs) == 4
    assert fs.dimension == 2
    assert fs.num_classes == 2


def test_csv_rejects_ragged_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("label,f0,f1\n0,1.0,2.0\n1,3.0\n")
    with pytest.raises(FeatureSetFormatError, match="dimension"):
        load_feature_set(path)


def test_depth_sweep_orders_and_flags(tmp_path):
    weak = two_blob_set(2.0)
    strong = two_blob_set(30.0)
    result = depth_sweep({"weak": weak, "strong": strong})
    assert result.names == ("weak", "strong")
    assert result.monotone_nondecreasing
    backwards = depth_sweep({"strong": strong, "weak": weak})
    assert not backwards.monotone_nondecreasing
