import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from decopt.consensus import (
    consensus_error,
    contraction_bound,
    fastmix,
    fastmix_step_size,
    mean_row,
    plain_mix,
)
from decopt.errors import DimensionError
from decopt.graph import build_mixing_matrix, generate_erdos_renyi, generate_named


def spectral_fastmix(w, x0, K):
    """FastMix through the eigendecomposition: scalar recurrence per eigenvalue."""
    lam, vecs = np.linalg.eigh(w.entries)
    eta = fastmix_step_size(w.lambda2)
    prev = np.ones_like(lam)
    cur = np.ones_like(lam)
    for _ in range(K):
        prev, cur = cur, (1.0 + eta) * lam * cur - eta * prev
    return vecs @ (cur[:, None] * (vecs.T @ x0))


def mode_amplitudes(w, K):
    lam = np.linalg.eigvalsh(w.entries)
    eta = fastmix_step_size(w.lambda2)
    prev = np.ones_like(lam)
    cur = np.ones_like(lam)
    for _ in range(K):
        prev, cur = cur, (1.0 + eta) * lam * cur - eta * prev
    return lam, cur


def er_case(seed, m_max=50):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, m_max + 1))
    p = float(rng.uniform(max(0.1, 1.5 * math.log(m) / m), 0.9))
    w = build_mixing_matrix(generate_erdos_renyi(m, p, seed))
    x0 = rng.standard_normal((m, int(rng.integers(1, 5)))) * 10 ** rng.uniform(-2, 2)
    return w, x0, rng


def test_step_size_values():
    assert fastmix_step_size(0.0) == 0.0
    s = math.sqrt(1 - 0.75**2)
    assert fastmix_step_size(0.75) == pytest.approx((1 - s) / (1 + s))


def test_consensus_is_fixed_point():
    w = build_mixing_matrix(generate_erdos_renyi(10, 0.4, 0))
    x0 = np.tile([1.5, -2.0, 3.0], (10, 1))
    for K in (1, 5, 20):
        np.testing.assert_allclose(fastmix(x0, w, K), x0, atol=1e-14)


def test_path_two_averages_in_one_round():
    w = build_mixing_matrix(generate_named("path", 2))
    np.testing.assert_allclose(fastmix(np.array([[1.0], [0.0]]), w, 1), [[0.5], [0.5]], atol=1e-15)


def test_k_zero_is_identity_copy():
    w = build_mixing_matrix(generate_named("ring", 5))
    x0 = np.arange(10.0).reshape(5, 2)
    out = fastmix(x0, w, 0)
    assert out is not x0 and (out == x0).all()
    assert (plain_mix(x0, w, 0) == x0).all()


def test_vector_input_keeps_shape():
    w = build_mixing_matrix(generate_named("ring", 5))
    x = np.arange(5.0)
    assert fastmix(x, w, 3).shape == (5,)
    assert plain_mix(x, w, 3).shape == (5,)


def test_dimension_and_argument_errors():
    w = build_mixing_matrix(generate_named("ring", 5))
    with pytest.raises(DimensionError):
        fastmix(np.zeros((4, 2)), w, 1)
    with pytest.raises(DimensionError):
        plain_mix(np.zeros((5, 2, 1)), w, 1)
    with pytest.raises(ValueError):
        fastmix(np.zeros((5, 2)), w, -1)


@pytest.mark.parametrize("seed", range(10))
def test_matches_spectral_oracle(seed):
    w, x0, rng = er_case(seed, m_max=30)
    K = int(rng.integers(0, 25))
    np.testing.assert_allclose(fastmix(x0, w, K), spectral_fastmix(w, x0, K), atol=1e-10 * (1 + abs(x0).max()))


@given(seed=st.integers(0, 100_000), K=st.integers(0, 30))
def test_average_preserved(seed, K):
    w, x0, _ = er_case(seed)
    xbar = mean_row(x0)
    drift = np.linalg.norm(mean_row(fastmix(x0, w, K)) - xbar)
    assert drift <= 1e-12 * (1.0 + np.linalg.norm(xbar))


@given(seed=st.integers(0, 100_000), a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_linear(seed, a, b):
    w, x, rng = er_case(seed, m_max=20)
    y = rng.standard_normal(x.shape)
    K = int(rng.integers(0, 15))
    lhs = fastmix(a * x + b * y, w, K)
    rhs = a * fastmix(x, w, K) + b * fastmix(y, w, K)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + abs(x).max() + abs(y).max()))


@given(seed=st.integers(0, 100_000), K=st.integers(0, 30))
def test_contraction_by_worst_mode(seed, K):
    # error shrinks by at most the largest recurrence amplitude over non-consensus modes
    w, x0, _ = er_case(seed)
    lam, amp = mode_amplitudes(w, K)
    worst = np.abs(amp[:-1]).max() if lam.size > 1 else 0.0
    assert consensus_error(fastmix(x0, w, K)) <= worst * consensus_error(x0) + 1e-9


@pytest.mark.parametrize("lambda2", [0.3, 0.75, 0.95, 0.999])
@pytest.mark.parametrize("K", [1, 2, 5, 20])
def test_slowest_mode_is_critically_damped(lambda2, K):
    # at lambda2 the recurrence has a double root r = lambda2 / (1 + sqrt(1 - lambda2^2))
    eta = fastmix_step_size(lambda2)
    prev = cur = 1.0
    for _ in range(K):
        prev, cur = cur, (1.0 + eta) * lambda2 * cur - eta * prev
    r = lambda2 / (1.0 + math.sqrt(1.0 - lambda2**2))
    assert cur == pytest.approx(r**K * (1.0 + (1.0 - r) * K), rel=1e-10)


def test_ring_four_stated_bound():
    # bound evaluated with base 3/4; the ring's actual second eigenvalue is 1/2
    w = build_mixing_matrix(generate_named("ring", 4))
    x0 = np.random.default_rng(0).standard_normal((4, 3))
    out = fastmix(x0, w, 5)
    assert consensus_error(out) <= contraction_bound(0.75, 5) * consensus_error(x0) + 1e-12


def test_advertised_rate_exceeded_by_slowest_mode():
    # x0 along the lambda2 eigenvector: the amplitude r^K (1 + (1 - r) K) beats (1 - sqrt(1 - lambda2))^K
    w = build_mixing_matrix(generate_named("ring", 4))
    lam, vecs = np.linalg.eigh(w.entries)
    x0 = vecs[:, [-2]]
    ratio = consensus_error(fastmix(x0, w, 5)) / consensus_error(x0)
    assert ratio > contraction_bound(w.lambda2, 5)
    r = w.lambda2 / (1.0 + math.sqrt(1.0 - w.lambda2**2))
    assert ratio == pytest.approx(r**5 * (1 + (1 - r) * 5), rel=1e-10)


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("K", [3, 6, 12])
def test_beats_plain_gossip_on_slowest_mode(seed, K):
    w, _, _ = er_case(seed, m_max=40)
    lam, vecs = np.linalg.eigh(w.entries)
    x0 = vecs[:, [-2]]
    assert consensus_error(fastmix(x0, w, K)) <= consensus_error(plain_mix(x0, w, K)) + 1e-12


def test_plain_gossip_can_beat_fastmix_on_fast_modes():
    # for modes far below lambda2 the recurrence decays like sqrt(eta)^K, slower than lambda^K
    w = build_mixing_matrix(generate_named("path", 12))
    lam, vecs = np.linalg.eigh(w.entries)
    x0 = vecs[:, [0]]
    assert consensus_error(fastmix(x0, w, 4)) > consensus_error(plain_mix(x0, w, 4))


def test_plain_mix_matrix_power_oracle():
    w = build_mixing_matrix(generate_named("ring", 4))
    x0 = np.eye(4)[:, [0]]
    np.testing.assert_allclose(plain_mix(x0, w, 3), np.linalg.matrix_power(w.entries, 3) @ x0, atol=1e-15)


def test_plain_mix_complete_graph_averages():
    w = build_mixing_matrix(generate_named("complete", 6))
    x0 = np.random.default_rng(1).standard_normal((6, 2))
    np.testing.assert_allclose(plain_mix(x0, w, 1), np.tile(x0.mean(axis=0), (6, 1)), atol=1e-14)


def test_consensus_error_values(rng):
    assert consensus_error(np.ones((4, 3))) == 0.0
    assert consensus_error(np.array([[1.0], [-1.0]])) == pytest.approx(math.sqrt(2))
    x = rng.standard_normal((7, 3))
    assert consensus_error(x) == pytest.approx(math.sqrt(((x - x.mean(0)) ** 2).sum()))


def test_contraction_bound_values():
    assert contraction_bound(0.75, 2) == pytest.approx(0.25)
    assert contraction_bound(0.0, 3) == 0.0
    assert contraction_bound(0.5, 0) == 1.0
