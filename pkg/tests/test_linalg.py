import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from decopt.linalg import eigvalsh, extreme_eigenvalues, perron_pair_3x3, spectral_norm_sym


@given(n=st.integers(1, 30), seed=st.integers(0, 2**31 - 1))
def test_eigvalsh_matches_numpy(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    a = a + a.T
    np.testing.assert_allclose(eigvalsh(a), np.linalg.eigvalsh(a), atol=1e-10 * (1 + abs(a).max()))


def test_eigvalsh_ascending_and_exact_on_diagonal():
    vals = eigvalsh(np.diag([3.0, -1.0, 2.0]))
    assert vals.tolist() == [-1.0, 2.0, 3.0]


def test_eigvalsh_rejects_nonsymmetric_and_nonsquare():
    with pytest.raises(ValueError):
        eigvalsh(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        eigvalsh(np.ones((2, 3)))


def test_extreme_and_norm():
    a = np.diag([-5.0, 1.0, 4.0])
    assert extreme_eigenvalues(a) == (-5.0, 4.0)
    assert spectral_norm_sym(a) == 5.0


@given(seed=st.integers(0, 2**31 - 1))
def test_perron_pair_matches_general_eigensolver(seed):
    a = np.random.default_rng(seed).uniform(0.01, 3.0, (3, 3))
    lam, v = perron_pair_3x3(a)
    vals, vecs = np.linalg.eig(a)
    k = np.argmax(vals.real)
    ref = vecs[:, k].real / vecs[2, k].real
    assert lam == pytest.approx(vals[k].real, rel=1e-10)
    np.testing.assert_allclose(v, ref, rtol=1e-8)
    assert v[2] == 1.0 and (v > 0).all()
    np.testing.assert_allclose(a @ v, lam * v, rtol=1e-9)
