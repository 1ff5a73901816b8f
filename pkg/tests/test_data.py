import numpy as np
import pytest

from decopt.data import Dataset, load_libsvm, partition, synthetic_logistic
from decopt.errors import DataFormatError, ProblemError


def write(tmp_path, text):
    path = tmp_path / "data.libsvm"
    path.write_text(text)
    return path


def test_single_feature_line(tmp_path):
    ds = load_libsvm(write(tmp_path, "+1 3:0.5\n"), d_hint=4)
    np.testing.assert_array_equal(ds.features, [[0.0, 0.0, 0.5, 0.0]])
    np.testing.assert_array_equal(ds.labels, [1.0])


def test_featureless_line_and_zero_label(tmp_path):
    ds = load_libsvm(write(tmp_path, "-1\n0 1:2\n1 2:1.5 # trailing comment\n\n"))
    assert ds.d == 2 and ds.n == 3
    np.testing.assert_array_equal(ds.labels, [-1.0, -1.0, 1.0])
    np.testing.assert_array_equal(ds.features[0], [0.0, 0.0])


@pytest.mark.parametrize(
    "text, line",
    [
        ("+1 1:1\n2 1:1\n", 2),
        ("+1 1-1\n", 1),
        ("+1 0:1\n", 1),
        ("+1 2:1 1:1\n", 1),
        ("+1 1:1\n-1 5:1\n", 2),
        ("x 1:1\n", 1),
        ("+1 a:1\n", 1),
    ],
)
def test_malformed_lines_report_line_number(tmp_path, text, line):
    with pytest.raises(DataFormatError) as exc:
        load_libsvm(write(tmp_path, text), d_hint=4)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_empty_file(tmp_path):
    with pytest.raises(DataFormatError):
        load_libsvm(write(tmp_path, "\n# nothing\n"))


def test_dataset_validation():
    with pytest.raises(ProblemError):
        Dataset(np.ones((2, 2)), np.array([1.0, 0.5]))
    with pytest.raises(ProblemError):
        Dataset(np.array([[np.nan, 1.0]]), np.array([1.0]))
    with pytest.raises(ProblemError):
        Dataset(np.ones(3), np.ones(3))


def test_partition_disjoint_and_deterministic():
    ds = Dataset(np.arange(8.0)[:, None], np.ones(8))
    shards = partition(ds, 2, 3, seed=0)
    rows = np.concatenate([s.features[:, 0] for s in shards])
    assert len(set(rows.tolist())) == 6
    again = partition(ds, 2, 3, seed=0)
    for s, t in zip(shards, again):
        np.testing.assert_array_equal(s.features, t.features)


def test_partition_small_case():
    ds = Dataset(np.arange(4.0)[:, None], np.ones(4))
    shards = partition(ds, 2, 2, seed=1)
    assert sorted(np.concatenate([s.features[:, 0] for s in shards]).tolist()) == [0.0, 1.0, 2.0, 3.0]


def test_partition_errors():
    ds = Dataset(np.ones((5, 1)), np.ones(5))
    with pytest.raises(ProblemError):
        partition(ds, 2, 3, seed=0)
    with pytest.raises(ValueError):
        partition(ds, 0, 1, seed=0)


def test_synthetic_generator():
    shards = synthetic_logistic(3, 10, 4, seed=7)
    assert len(shards) == 3 and all(s.features.shape == (10, 4) for s in shards)
    again = synthetic_logistic(3, 10, 4, seed=7)
    np.testing.assert_array_equal(shards[2].features, again[2].features)
    labels = np.concatenate([s.labels for s in shards])
    assert set(labels.tolist()) <= {-1.0, 1.0}
    with pytest.raises(ValueError):
        synthetic_logistic(1, 2, 2, seed=0, label_noise=0.6)
