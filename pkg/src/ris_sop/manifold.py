"""Riemannian conjugate gradient on products of complex unit spheres.

Points are complex arrays ``X`` of shape (n, p) whose rows have unit norm.
With ``p = 1`` this is the complex circle manifold ``{q : |q_i| = 1}``; with
``p > 1`` it is the oblique manifold used for low-rank factorizations of
unit-diagonal PSD matrices.

Euclidean gradients follow the convention ``egrad = 2 * df/dconj(X)`` so the
directional derivative along ``V`` is ``Re <egrad, V>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "CgOptions",
    "CgState",
    "CgResult",
    "inner",
    "project",
    "retract",
    "transport",
    "conjugate_gradient",
]


def inner(a, b) -> float:
    """Real inner product ``Re tr(a^H b)``."""
    return float(np.vdot(a, b).real)


def _rowwise_re(a, b):
    # Re(sum_j conj(a_ij) b_ij) for each row, kept as a column
    return np.sum((np.conj(a) * b).real, axis=-1, keepdims=True)


def project(x, g):
    """Orthogonal projection of ``g`` onto the tangent space at ``x``.

    For a vector ``q`` this is ``g - Re(g o conj(q)) o q``.
    """
    return g - _rowwise_re(x, g) * x


def retract(x, v):
    """Row-wise normalization of ``x + v``; identity when ``v = 0`` on the manifold."""
    y = x + v
    norms = np.linalg.norm(y, axis=-1, keepdims=True)
    bad = norms[..., 0] == 0
    if np.any(bad):
        y[bad] = x[bad]
        norms[bad] = 1.0
    y = y / norms
    return y / np.linalg.norm(y, axis=-1, keepdims=True)


def transport(y, p):
    """Carry a tangent vector to the tangent space at ``y`` by projection."""
    return project(y, p)


@dataclass(frozen=True)
class CgOptions:
    """Stopping rule and Armijo line-search parameters.

    ``initial_step`` of ``None`` lets the caller supply a problem-specific
    value (see :func:`conjugate_gradient`).
    """

    initial_step: float | None = None
    step_growth: float | None = 2.0
    contraction: float = 0.5
    sufficient_decrease: float = 1e-4
    grad_tol: float = 1e-6
    max_iter: int = 1000
    max_backtracks: int = 60
    stagnation_window: int = 50
    stagnation_rtol: float = 1e-12


@dataclass
class CgState:
    """Iterate bookkeeping: point, Riemannian gradient, direction, step, momentum."""

    q: np.ndarray
    grad: np.ndarray
    dir: np.ndarray
    step: float = 0.0
    momentum: float = 0.0
    iter: int = 0


@dataclass
class CgResult:
    x: np.ndarray
    cost: float
    grad_norm: float
    iterations: int
    converged: bool
    stagnated: bool = False
    costs: list = field(default_factory=list)


def conjugate_gradient(
    cost: Callable[[np.ndarray], float],
    egrad: Callable[[np.ndarray], np.ndarray],
    x0,
    options: CgOptions = CgOptions(),
    initial_step: float = 1.0,
    callback: Callable[[CgState], None] | None = None,
) -> CgResult:
    """Minimize ``cost`` over unit-row matrices with Polak-Ribiere+ CG.

    The first line search backtracks from ``options.initial_step`` (or
    ``initial_step`` when the option is unset) until the Armijo condition
    holds; later searches start at ``step_growth`` times the last accepted
    step (``None`` restarts from the initial step every time).  Accepted
    costs never increase.

    Raises
    ------
    FloatingPointError
        If a gradient has non-finite entries.
    """
    squeeze = np.ndim(x0) == 1
    x = np.array(x0, dtype=complex)
    if squeeze:
        x = x[:, None]
    x = retract(x, np.zeros_like(x))

    def rgrad(pt):
        g = egrad(pt[:, 0] if squeeze else pt)
        g = np.asarray(g, dtype=complex).reshape(pt.shape)
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient")
        return project(pt, g)

    def f(pt):
        return float(cost(pt[:, 0] if squeeze else pt))

    step0 = options.initial_step if options.initial_step is not None else initial_step
    fx = f(x)
    g = rgrad(x)
    gnorm2 = inner(g, g)
    state = CgState(q=x, grad=g, dir=-g)
    costs = [fx]
    converged = stagnated = False
    flat = 0

    while True:
        if np.sqrt(gnorm2) <= options.grad_tol:
            converged = True
            break
        if state.iter >= options.max_iter:
            break
        d = state.dir
        slope = inner(g, d)
        if slope >= 0:
            d = -g
            slope = -gnorm2
        eta = step0
        if options.step_growth is not None and state.step > 0:
            eta = options.step_growth * state.step
        for _ in range(options.max_backtracks):
            x_new = retract(x, eta * d)
            f_new = f(x_new)
            if f_new <= fx + options.sufficient_decrease * eta * slope:
                break
            eta *= options.contraction
        else:
            # no acceptable step: numerically at a stationary point
            stagnated = True
            break

        g_new = rgrad(x_new)
        g_old_t = transport(x_new, g)
        gnew2 = inner(g_new, g_new)
        momentum = max(0.0, inner(g_new, g_new - g_old_t) / gnorm2) if gnorm2 > 0 else 0.0
        d_new = -g_new + momentum * transport(x_new, d)

        if abs(fx - f_new) <= options.stagnation_rtol * max(1.0, abs(fx)):
            flat += 1
        else:
            flat = 0
        x, fx, g, gnorm2 = x_new, f_new, g_new, gnew2
        state = CgState(q=x, grad=g, dir=d_new, step=eta, momentum=momentum, iter=state.iter + 1)
        costs.append(fx)
        if callback is not None:
            callback(state)
        if flat >= options.stagnation_window:
            stagnated = True
            break

    out = x[:, 0] if squeeze else x
    return CgResult(out, fx, float(np.sqrt(gnorm2)), state.iter, converged, stagnated, costs)
