import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ris_sop.manifold import CgOptions, conjugate_gradient, inner, project, retract, transport


def circle_point(rng, n):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, (n, 1)))


@settings(max_examples=40)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_projection_is_tangent(n, seed):
    rng = np.random.default_rng(seed)
    q = circle_point(rng, n)
    g = rng.standard_normal((n, 1)) + 1j * rng.standard_normal((n, 1))
    t = project(q, g)
    assert np.max(np.abs((t * q.conj()).real)) <= 1e-10
    assert np.allclose(project(q, t), t, atol=1e-12)
    assert np.allclose(transport(q, g), t)


@settings(max_examples=40)
@given(st.integers(1, 12), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_retraction_lands_on_manifold(n, p, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    v = project(x, rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p)))
    y = retract(x, 0.7 * v)
    assert np.allclose(np.linalg.norm(y, axis=1), 1.0, atol=1e-12)
    assert np.allclose(retract(x, np.zeros_like(x)), x, atol=1e-15)


def test_retraction_survives_cancellation():
    x = np.array([[1.0 + 0j], [1j]])
    y = retract(x, -x)
    assert np.allclose(np.abs(y), 1.0)


def _quadratic(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    s = a.conj().T @ a
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)

    def cost(q):
        return -float(np.vdot(q, s @ q).real + 2 * np.vdot(v, q).real)

    def egrad(q):
        return -2.0 * (s @ q + v)

    return cost, egrad


def test_cg_descends_and_converges():
    cost, egrad = _quadratic(6, 1)
    q0 = np.ones(6, dtype=complex)
    seen = []
    res = conjugate_gradient(cost, egrad, q0, CgOptions(), initial_step=0.01, callback=lambda s: seen.append(s.iter))
    assert res.converged and res.grad_norm <= 1e-6
    assert res.cost <= cost(q0)
    assert all(b <= a + 1e-12 for a, b in zip(res.costs, res.costs[1:]))
    assert np.allclose(np.abs(res.x), 1.0, atol=1e-12)
    assert seen == list(range(1, res.iterations + 1))


def test_cg_zero_gradient_returns_start():
    q0 = np.exp(1j * np.arange(4.0))
    res = conjugate_gradient(lambda q: 0.0, lambda q: np.zeros_like(q), q0)
    assert res.converged and res.iterations == 0
    assert np.array_equal(res.x, q0)


def test_cg_rejects_non_finite_gradient():
    with pytest.raises(FloatingPointError):
        conjugate_gradient(lambda q: 0.0, lambda q: np.full_like(q, np.nan), np.ones(3, dtype=complex))


def test_cg_iteration_cap():
    cost, egrad = _quadratic(10, 2)
    res = conjugate_gradient(cost, egrad, np.ones(10, dtype=complex), CgOptions(max_iter=3), initial_step=0.01)
    assert res.iterations == 3 and not res.converged


def test_inner_is_real_part():
    a = np.array([1 + 1j, 2])
    b = np.array([1j, 1])
    assert inner(a, b) == pytest.approx(np.real(np.vdot(a, b)))
