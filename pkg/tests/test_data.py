import numpy as np
import pytest

from mdlpenalty.core import InvalidInputError
from mdlpenalty.data import gen_synth_regression, load_csv, standardize, train_test_split


def test_generator_is_deterministic():
    a, b = gen_synth_regression(30, seed=4), gen_synth_regression(30, seed=4)
    assert a.X.tobytes() == b.X.tobytes() and a.y.tobytes() == b.y.tobytes()
    assert a.p == 50 and a.meta["informative_count"] == 5 and not a.meta["correlated"]


def test_correlated_design_lives_in_ten_dimensions():
    d = gen_synth_regression(40, correlated=True, seed=1)
    s = np.linalg.svd(d.X, compute_uv=False)
    assert np.all(s[10:] < 1e-8) and s[9] > 1e-3


def test_noiseless_informative_columns_recover_coefficients():
    d = gen_synth_regression(60, noise_sd=0.0, seed=2)
    beta = np.linalg.lstsq(d.X[:, :5], d.y, rcond=None)[0]
    np.testing.assert_allclose(beta, np.ones(5), atol=1e-8)


def test_minimum_size():
    with pytest.raises(InvalidInputError):
        gen_synth_regression(1)


def test_standardize_is_idempotent(rng):
    X = rng.normal(3.0, 2.0, size=(25, 4))
    Z = standardize(X)
    assert np.abs(Z.mean(axis=0)).max() < 1e-10
    np.testing.assert_allclose(Z.std(axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(standardize(Z), Z, atol=1e-12)


def test_constant_column_is_only_centered():
    Z = standardize(np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]))
    assert np.all(Z[:, 1] == 0)


def write(tmp_path, text):
    p = tmp_path / "d.csv"
    p.write_text(text, encoding="utf-8")
    return p


def test_csv_fixture_parses_exactly(tmp_path):
    p = write(tmp_path, "a,y,b\n1,2,3\n4.5,-1,6\n0,0,1e-3\n")
    d = load_csv(p, "y")
    np.testing.assert_array_equal(d.X, [[1, 3], [4.5, 6], [0, 1e-3]])
    np.testing.assert_array_equal(d.y, [2, -1, 0])
    assert d.feature_names == ("a", "b")


def test_csv_standardized(tmp_path):
    p = write(tmp_path, "a,y\n1,2\n4,3\n7,1\n")
    d = load_csv(p, "y", standardize_features=True)
    assert abs(d.X.mean()) < 1e-10 and d.meta["standardized"]


def test_csv_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "missing.csv", "y")
    with pytest.raises(KeyError, match="target"):
        load_csv(write(tmp_path, "a,b\n1,2\n"), "target")
    with pytest.raises(InvalidInputError, match="row 2"):
        load_csv(write(tmp_path, "a,y\n1,2\nx,3\n"), "y")
    with pytest.raises(InvalidInputError, match="row 1"):
        load_csv(write(tmp_path, "a,y\nnan,2\n"), "y")


def test_split_partitions_rows():
    train, test = train_test_split(50, 0.1, 3)
    assert test.size == 5 and np.intersect1d(train, test).size == 0
    assert sorted(np.r_[train, test].tolist()) == list(range(50))
    with pytest.raises(InvalidInputError):
        train_test_split(10, 1.0, 0)
