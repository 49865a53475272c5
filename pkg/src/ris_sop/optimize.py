"""Beamformer and RIS phase solvers, the alternating driver and MRT baselines.

At full power ``P = rho`` the outage probability is a decreasing function of

    z = phi / (beta^2 + |diag(q) H b|^2)
      = c * (b^H A1 b + t) / (b^H A2 b + beta^2)

so every solver here maximizes ``z`` over one block of variables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .analytics import sop_theory
from .manifold import CgOptions, CgResult, conjugate_gradient
from .model import (
    Beamformer,
    ChannelSet,
    DimensionError,
    PhaseVector,
    SystemConfig,
    effective_channel,
    random_unit_vector,
    rng_for,
    standard_complex_normal,
)

__all__ = [
    "SubproblemMatrices",
    "PhaseProblem",
    "SdrProblem",
    "SdrResult",
    "AOReport",
    "TraceRow",
    "fix_phase",
    "subproblem_matrices",
    "gamma_argument",
    "optimal_beamformer",
    "phase_problem",
    "manifold_phase_opt",
    "sdr_problem",
    "sdr_phase_opt",
    "closed_form_phase_single_bob",
    "alternating_optimize",
    "mrt_baseline",
    "mrt_phase_shift",
    "PHASE_SOLVERS",
]

PHASE_SOLVERS = ("sdr", "manifold", "closed_form")


def fix_phase(v: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Rotate ``v`` so its first entry with magnitude above ``tol`` is real positive."""
    v = np.asarray(v, dtype=complex)
    idx = np.flatnonzero(np.abs(v) > tol)
    if idx.size == 0:
        return v
    a = v[idx[0]]
    return v * (abs(a) / a)


# --------------------------------------------------------------------------
# beamforming subproblem


@dataclass(frozen=True)
class SubproblemMatrices:
    """Generalized Rayleigh quotient data for the beamformer step.

    ``a3`` is set for single-antenna Bob, where it coincides with ``a1``.
    """

    a1: np.ndarray
    a2: np.ndarray
    c: float
    t: float
    rho: float
    a3: np.ndarray | None = None


def subproblem_matrices(cfg: SystemConfig, ch: ChannelSet, phase: PhaseVector) -> SubproblemMatrices:
    e = effective_channel(cfg, ch, phase)
    a1 = e.conj().T @ e
    a1 = 0.5 * (a1 + a1.conj().T)
    a2 = ch.h_ris.conj().T @ ch.h_ris
    a2 = 0.5 * (a2 + a2.conj().T)
    c = cfg.sigma_e2 / (cfg.sigma2 * 2.0**cfg.r_s)
    t = cfg.sigma2 * (1.0 - 2.0**cfg.r_s) / cfg.rho
    return SubproblemMatrices(a1, a2, c, t, cfg.rho, a1 if cfg.n_r == 1 else None)


def gamma_argument(cfg: SystemConfig, ch: ChannelSet, phase: PhaseVector, b: np.ndarray) -> float:
    """``z`` at full power; the outage probability decreases as it grows."""
    y = effective_channel(cfg, ch, phase) @ b
    hb = ch.h_ris @ b
    c = cfg.sigma_e2 / (cfg.sigma2 * 2.0**cfg.r_s)
    t = cfg.sigma2 * (1.0 - 2.0**cfg.r_s) / cfg.rho
    return c * (np.vdot(y, y).real + t) / (np.vdot(hb, hb).real + cfg.beta**2)


def optimal_beamformer(sub: SubproblemMatrices, beta: float) -> Beamformer:
    """Top generalized eigenvector of the pencil ``(A1 + tI, A2 + beta^2 I)``.

    Solved by a Cholesky reduction ``L L^H = A2 + beta^2 I`` to a standard
    Hermitian eigenproblem.  When the denominator is singular (``beta = 0``
    with rank-deficient ``A2``) a small ridge is added.
    """
    a1 = sub.a3 if sub.a3 is not None else sub.a1
    n = a1.shape[0]
    if n == 1:
        return Beamformer(np.ones(1, dtype=complex), sub.rho)
    eye = np.eye(n)
    num = a1 + sub.t * eye
    den = sub.a2 + beta**2 * eye
    try:
        L = sla.cholesky(den, lower=True)
        if np.min(np.abs(np.diag(L))) ** 2 <= 1e-14 * max(1.0, np.trace(den).real / n):
            raise np.linalg.LinAlgError("near-singular denominator")
    except np.linalg.LinAlgError:
        ridge = 1e-10 * (1.0 + np.trace(sub.a2).real / n)
        try:
            L = sla.cholesky(den + ridge * eye, lower=True)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError("pencil denominator is singular after ridge") from exc
    # M = L^-1 num L^-H
    tmp = sla.solve_triangular(L, num, lower=True)
    m = sla.solve_triangular(L, tmp.conj().T, lower=True).conj().T
    m = 0.5 * (m + m.conj().T)
    _, vecs = np.linalg.eigh(m)
    y = vecs[:, -1]
    b = sla.solve_triangular(L.conj().T, y, lower=False)
    b = fix_phase(b / np.linalg.norm(b))
    return Beamformer(b / np.linalg.norm(b), sub.rho)


# --------------------------------------------------------------------------
# phase subproblem


@dataclass(frozen=True)
class PhaseProblem:
    """Quadratic form of the phase step for a fixed beamformer.

    The bracket ``q^H S q + 2 Re(v^H q) + const`` equals
    ``|(alpha H_b + G_r diag(q) H) b|^2 + t``; the manifold cost is ``-k``
    times it.
    """

    sigma: np.ndarray  # G_r diag(H b)
    s: np.ndarray  # sigma^H sigma
    v: np.ndarray  # alpha sigma^H H_b b
    const: float  # alpha^2 |H_b b|^2 + t
    k: float

    def bracket(self, q) -> float:
        q = np.asarray(q)
        return float(np.vdot(q, self.s @ q).real + 2.0 * np.vdot(self.v, q).real + self.const)

    def cost(self, q) -> float:
        return -self.k * self.bracket(q)

    def egrad(self, q) -> np.ndarray:
        return -2.0 * self.k * (self.s @ q + self.v)


def phase_problem(cfg: SystemConfig, ch: ChannelSet, b: np.ndarray) -> PhaseProblem:
    ch.check(cfg)
    b = np.asarray(b, dtype=complex).reshape(-1)
    hb = ch.h_ris @ b
    sigma = ch.g_r * hb[None, :]
    direct = ch.h_b @ b
    c = cfg.sigma_e2 / (cfg.sigma2 * 2.0**cfg.r_s)
    t = cfg.sigma2 * (1.0 - 2.0**cfg.r_s) / cfg.rho
    k = c / (cfg.beta**2 + np.vdot(hb, hb).real)
    s = sigma.conj().T @ sigma
    return PhaseProblem(
        sigma=sigma,
        s=0.5 * (s + s.conj().T),
        v=cfg.alpha * (sigma.conj().T @ direct),
        const=float(cfg.alpha**2 * np.vdot(direct, direct).real + t),
        k=float(k),
    )


def manifold_phase_opt(
    ch: ChannelSet,
    bf: Beamformer,
    cfg: SystemConfig,
    q0: PhaseVector | None = None,
    options: CgOptions = CgOptions(),
) -> tuple[PhaseVector, CgResult]:
    """Riemannian CG over unit-modulus phases for a fixed beamformer.

    Starts from ``q0`` (all ones by default) and never returns a point with
    a larger cost than the start.
    """
    prob = phase_problem(cfg, ch, bf.b)
    q0 = q0 if q0 is not None else PhaseVector.ones(cfg.n_s)
    step = 1.0 / (2.0 * prob.k * np.linalg.norm(prob.s) + 1.0)
    res = conjugate_gradient(prob.cost, prob.egrad, q0.q, options, initial_step=step)
    if res.cost > prob.cost(q0.q):
        return q0, res
    return PhaseVector.normalized(res.x), res


@dataclass(frozen=True)
class SdrProblem:
    """Lifted matrix ``W`` of size n_s + 1 and ``Sigma = G_r diag(H b)``.

    The relaxed objective is ``tr(W Q) + const`` over unit-diagonal PSD ``Q``.
    """

    w_mat: np.ndarray
    sigma_mat: np.ndarray
    const: float

    def rank_one_value(self, q) -> float:
        """Objective at the feasible lift ``[q; 1]``."""
        qh = np.append(np.asarray(q, dtype=complex), 1.0)
        return float(np.vdot(qh, self.w_mat @ qh).real + self.const)


def sdr_problem(cfg: SystemConfig, ch: ChannelSet, b: np.ndarray) -> SdrProblem:
    pp = phase_problem(cfg, ch, b)
    n = cfg.n_s
    w = np.zeros((n + 1, n + 1), dtype=complex)
    w[:n, :n] = pp.s
    w[:n, n] = pp.v
    w[n, :n] = pp.v.conj()
    return SdrProblem(w, pp.sigma, pp.const)


class SdrResult(NamedTuple):
    phase: PhaseVector
    sdp_value: float
    factor: np.ndarray
    cg: CgResult

    @property
    def stagnated(self) -> bool:
        return self.cg.stagnated


def burer_monteiro_rank(n: int) -> int:
    return math.ceil(math.sqrt(2 * n)) + 1


def sdr_phase_opt(
    ch: ChannelSet,
    bf: Beamformer,
    cfg: SystemConfig,
    options: CgOptions = CgOptions(),
    seed: int = 0,
) -> SdrResult:
    """Relax the phase step to ``max tr(W Q)``, ``diag(Q) = 1``, ``Q >= 0``.

    ``Q = V V^H`` with unit-norm rows of ``V`` is optimized by the same
    Riemannian CG used for the phases.  The feasible phases are the leading
    eigenvector of ``Q`` projected entrywise to the unit circle, rotated so
    the auxiliary last entry is 1, then truncated.
    """
    prob = sdr_problem(cfg, ch, bf.b)
    w = prob.w_mat
    n = w.shape[0]
    p = min(burer_monteiro_rank(n), n)
    v0 = standard_complex_normal(rng_for(seed, 5), (n, p))

    def cost(v):
        return -float(np.einsum("ij,ij->", v.conj(), w @ v).real)

    def egrad(v):
        return -2.0 * (w @ v)

    step = 1.0 / (2.0 * np.linalg.norm(w) + 1.0)
    res = conjugate_gradient(cost, egrad, v0, options, initial_step=step)
    sdp_value = -res.cost + prob.const

    u, _, _ = np.linalg.svd(res.x, full_matrices=False)
    lead = PhaseVector.normalized(u[:, 0]).q
    q = lead[:-1] * lead[-1].conj()
    return SdrResult(PhaseVector.normalized(q), sdp_value, res.x, res)


def closed_form_phase_single_bob(ch: ChannelSet, bf: Beamformer, alpha: float) -> PhaseVector:
    """Phases that co-phase every reflected path with the direct path.

    ``q_n = exp(j theta_0) * conj(h_n m_n) / |h_n m_n|`` with ``m = H b``,
    ``h^H`` the RIS->Bob row and ``theta_0 = arg(h_b^H b)``.
    """
    if ch.h_b.shape[0] != 1:
        raise DimensionError("closed-form phases require a single-antenna Bob")
    b = bf.b
    direct = complex(ch.h_b[0] @ b)
    theta0 = 0.0 if alpha == 0 or direct == 0 else np.angle(direct)
    prod = ch.g_r[0] * (ch.h_ris @ b)
    mag = np.abs(prod)
    q = np.ones_like(prod)
    nz = mag > 0
    q[nz] = np.conj(prod[nz]) / mag[nz]
    return PhaseVector.normalized(np.exp(1j * theta0) * q)


# --------------------------------------------------------------------------
# baselines


def _top_eigvec(a: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
    return float(vals[-1]), fix_phase(vecs[:, -1])


def mrt_baseline(
    ch: ChannelSet, cfg: SystemConfig, with_ris: bool = False, phase: PhaseVector | None = None
) -> Beamformer:
    """Maximal-ratio transmission towards Bob at full power.

    Without the RIS the direction is the top eigenvector of ``H_b^H H_b``;
    with it, of ``E^H E`` for the effective channel ``E`` at ``phase``
    (all ones by default).
    """
    if with_ris:
        phase = phase if phase is not None else PhaseVector.ones(cfg.n_s)
        e = effective_channel(cfg, ch, phase)
    else:
        ch.check(cfg)
        e = ch.h_b
    if cfg.n_r == 1:
        norm = np.linalg.norm(e[0])
        if norm == 0:
            raise ValueError("zero effective channel: MRT is undefined")
        b = fix_phase(e[0].conj() / norm)
    else:
        lam, b = _top_eigvec(e.conj().T @ e)
        if lam <= 0:
            raise ValueError("zero effective channel: MRT is undefined")
    return Beamformer(b / np.linalg.norm(b), cfg.rho)


def mrt_phase_shift(
    cfg: SystemConfig,
    ch: ChannelSet,
    iter_max: int = 20,
    tol: float = 1e-9,
    options: CgOptions = CgOptions(),
) -> tuple[PhaseVector, Beamformer, int]:
    """Capacity-driven design: MRT beamforming alternated with phase alignment.

    The phase step uses the closed form for a single-antenna Bob and the
    manifold solver otherwise.  Returns ``(phase, beamformer, iterations)``.
    """
    phase = PhaseVector.ones(cfg.n_s)
    bf = mrt_baseline(ch, cfg, with_ris=True, phase=phase)
    gain = -np.inf
    it = 0
    for it in range(1, iter_max + 1):
        if cfg.n_r == 1:
            phase = closed_form_phase_single_bob(ch, bf, cfg.alpha)
        else:
            phase, _ = manifold_phase_opt(ch, bf, cfg, phase, options)
        bf = mrt_baseline(ch, cfg, with_ris=True, phase=phase)
        y = effective_channel(cfg, ch, phase) @ bf.b
        new_gain = float(np.vdot(y, y).real)
        if new_gain - gain <= tol * max(1.0, abs(new_gain)):
            break
        gain = new_gain
    return phase, bf, it


# --------------------------------------------------------------------------
# alternating optimization


class TraceRow(NamedTuple):
    iteration: int
    p_out: float
    z: float


@dataclass
class AOReport:
    trace: list
    final_q: PhaseVector
    final_b: Beamformer
    converged: bool
    iterations_used: int
    solver: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def p_out(self) -> float:
        return self.trace[-1].p_out if self.trace else float("nan")


def _phase_step(solver, cfg, ch, bf, q_prev, options, seed):
    if solver == "closed_form":
        return closed_form_phase_single_bob(ch, bf, cfg.alpha)
    if solver == "manifold":
        q, _ = manifold_phase_opt(ch, bf, cfg, q_prev, options)
        return q
    res = sdr_phase_opt(ch, bf, cfg, options, seed)
    # keep the incumbent when eigenvector extraction loses ground
    prob = phase_problem(cfg, ch, bf.b)
    if prob.bracket(res.phase.q) < prob.bracket(q_prev.q):
        return q_prev
    return res.phase


def alternating_optimize(
    cfg: SystemConfig,
    ch: ChannelSet,
    phase_solver: str = "manifold",
    seed: int = 0,
    xi: float = 1e-5,
    iter_max: int = 50,
    options: CgOptions = CgOptions(),
    q0: PhaseVector | None = None,
) -> AOReport:
    """Alternate phase and beamformer steps until the outage stops improving.

    ``phase_solver`` is ``"sdr"``, ``"manifold"`` or ``"closed_form"`` (the
    last needs ``n_r = 1``).  The beamformer starts from a seeded random
    unit vector.  Trace row 0 is the starting point.  The reported solution
    is the best iterate seen.
    """
    if phase_solver not in PHASE_SOLVERS:
        raise ValueError(f"unknown phase solver {phase_solver!r}; choose from {PHASE_SOLVERS}")
    if iter_max < 1 or not xi > 0:
        raise ValueError("need iter_max >= 1 and xi > 0")
    if phase_solver == "closed_form" and cfg.n_r != 1:
        raise DimensionError("closed-form phase solver requires n_r = 1")
    ch.check(cfg)

    bf = Beamformer(random_unit_vector(cfg.n_t, seed), cfg.rho)
    q = q0 if q0 is not None else PhaseVector.ones(cfg.n_s)

    def evaluate(q, bf):
        return sop_theory(cfg, ch, q, bf), gamma_argument(cfg, ch, q, bf.b)

    p, z = evaluate(q, bf)
    trace = [TraceRow(0, p, z)]
    best = (p, -z, q, bf)
    converged = False
    it = 0
    for it in range(1, iter_max + 1):
        q = _phase_step(phase_solver, cfg, ch, bf, q, options, seed + it)
        if cfg.n_t > 1:
            bf = optimal_beamformer(subproblem_matrices(cfg, ch, q), cfg.beta)
        p_new, z = evaluate(q, bf)
        trace.append(TraceRow(it, p_new, z))
        if (p_new, -z) < best[:2]:
            best = (p_new, -z, q, bf)
        if cfg.n_t == 1 or p - p_new <= xi:
            converged = True
            break
        p = p_new
    return AOReport(trace, best[2], best[3], converged, it, phase_solver)
