import math

import numpy as np
import pytest

from ris_sop.analytics import sop_theory
from ris_sop.model import (
    Beamformer,
    ChannelSet,
    DimensionError,
    PhaseVector,
    SystemConfig,
    main_capacity,
    random_channels,
    random_phase,
)
from ris_sop.optimize import (
    SubproblemMatrices,
    alternating_optimize,
    burer_monteiro_rank,
    closed_form_phase_single_bob,
    fix_phase,
    gamma_argument,
    manifold_phase_opt,
    mrt_baseline,
    mrt_phase_shift,
    optimal_beamformer,
    phase_problem,
    sdr_phase_opt,
    sdr_problem,
    subproblem_matrices,
)
from ris_sop.validation import _grid_best, fd_gradient_error

from conftest import unit


def _sub(a1, a2, t=0.0):
    return SubproblemMatrices(a1=a1, a2=a2, c=1.0, t=t, rho=1.0, a3=None)


def test_beamformer_single_antenna():
    assert np.array_equal(optimal_beamformer(_sub(np.eye(1), np.eye(1)), 0.8).b, [1.0])


def test_beamformer_diagonal_pencil():
    b = optimal_beamformer(_sub(np.diag([5.0, 1.0]), np.zeros((2, 2))), 1.0).b
    assert np.allclose(b, [1.0, 0.0], atol=1e-12)


def test_beamformer_beats_random_vectors():
    cfg = SystemConfig.from_snr_db(9.0, n_t=3, n_r=2, n_e=2, n_s=4)
    ch = random_channels(cfg, 5)
    sub = subproblem_matrices(cfg, ch, random_phase(cfg.n_s, 5))
    b = optimal_beamformer(sub, cfg.beta).b
    num, den = sub.a1 + sub.t * np.eye(3), sub.a2 + cfg.beta**2 * np.eye(3)
    best = np.vdot(b, num @ b).real / np.vdot(b, den @ b).real
    rng = np.random.default_rng(0)
    x = rng.standard_normal((100_000, 3)) + 1j * rng.standard_normal((100_000, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    ratios = np.einsum("ki,ij,kj->k", x.conj(), num, x).real / np.einsum("ki,ij,kj->k", x.conj(), den, x).real
    assert ratios.max() <= best + 1e-9


def test_beamformer_ridge_when_denominator_singular():
    a2 = np.diag([1.0, 0.0])
    b = optimal_beamformer(_sub(np.eye(2), a2), 0.0).b
    assert np.allclose(np.abs(b), [0.0, 1.0], atol=1e-6)


def test_beamformer_minimizes_gamma_argument():
    cfg = SystemConfig.from_snr_db(9.0, n_t=4, n_r=2, n_e=2, n_s=6, r_s=1.0)
    ch = random_channels(cfg, 2)
    q = random_phase(cfg.n_s, 2)
    b = optimal_beamformer(subproblem_matrices(cfg, ch, q), cfg.beta).b
    rng = np.random.default_rng(1)
    others = [gamma_argument(cfg, ch, q, unit(rng, 4)) for _ in range(2000)]
    assert gamma_argument(cfg, ch, q, b) >= max(others) - 1e-9


def test_fix_phase_convention():
    v = fix_phase(np.array([0.0, -2j, 1.0]))
    assert v[1].real > 0 and v[1].imag == 0


def test_manifold_with_zero_reflection_keeps_start():
    cfg = SystemConfig(n_t=2, n_r=2, n_e=1, n_s=3)
    ch = ChannelSet(np.ones((2, 2)), np.zeros((3, 2)), np.ones((2, 3)))
    q0 = PhaseVector.from_angles([0.1, 0.2, 0.3])
    q, _ = manifold_phase_opt(ch, Beamformer(np.array([1.0, 0.0]), 1.0), cfg, q0)
    assert np.array_equal(q.q, q0.q)


def test_manifold_matches_grid_for_two_elements():
    cfg = SystemConfig.from_snr_db(9.0, n_t=2, n_r=2, n_e=2, n_s=2, r_s=1.0)
    ch = random_channels(cfg, 3)
    bf = mrt_baseline(ch, cfg)
    prob = phase_problem(cfg, ch, bf.b)
    q, res = manifold_phase_opt(ch, bf, cfg)
    assert abs(prob.cost(q.q) + prob.k * _grid_best(prob, 2, 4096)) <= 1e-4
    assert res.cost <= prob.cost(np.ones(2))


def test_manifold_reaches_closed_form_for_single_bob():
    cfg = SystemConfig.from_snr_db(9.0, n_t=4, n_r=1, n_e=2, n_s=8, r_s=1.0)
    ch = random_channels(cfg, 6)
    bf = Beamformer(unit(np.random.default_rng(6), 4), cfg.rho)

    def amplitude(q):
        return abs((cfg.alpha * ch.h_b[0] + (ch.g_r[0] * q.q) @ ch.h_ris) @ bf.b)

    q_man, _ = manifold_phase_opt(ch, bf, cfg)
    q_cf = closed_form_phase_single_bob(ch, bf, cfg.alpha)
    assert amplitude(q_man) == pytest.approx(amplitude(q_cf), abs=1e-6)


def test_euclidean_gradient_matches_finite_differences():
    cfg = SystemConfig.from_snr_db(9.0, n_t=3, n_r=2, n_e=2, n_s=5, r_s=1.0)
    ch = random_channels(cfg, 8)
    prob = phase_problem(cfg, ch, unit(np.random.default_rng(8), 3))
    assert fd_gradient_error(prob.cost, prob.egrad, random_phase(5, 8).q) <= 1e-4


def test_global_phase_invariance_without_direct_link():
    cfg = SystemConfig.from_snr_db(9.0, n_t=3, n_r=2, n_e=2, n_s=5, alpha=0.0)
    ch = random_channels(cfg, 9)
    prob = phase_problem(cfg, ch, unit(np.random.default_rng(9), 3))
    q = random_phase(5, 9).q
    assert prob.cost(q * np.exp(0.9j)) == pytest.approx(prob.cost(q), rel=1e-12)


def test_sdr_with_zero_lifted_matrix():
    cfg = SystemConfig(n_t=2, n_r=2, n_e=1, n_s=3, alpha=0.8)
    ch = ChannelSet(np.eye(2), np.zeros((3, 2)), np.ones((2, 3)))
    bf = Beamformer(np.array([1.0, 0.0]), cfg.rho)
    out = sdr_phase_opt(ch, bf, cfg)
    prob = sdr_problem(cfg, ch, bf.b)
    expected = cfg.alpha**2 * 1.0 + cfg.sigma2 * (1 - 2**cfg.r_s) / cfg.rho
    assert out.sdp_value == pytest.approx(expected) == pytest.approx(prob.const)


@pytest.mark.parametrize("n_s,res", [(1, 4096), (2, 4096), (3, 128)])
def test_sdr_sandwich(n_s, res):
    cfg = SystemConfig.from_snr_db(9.0, n_t=3, n_r=2, n_e=2, n_s=n_s, r_s=1.0)
    ch = random_channels(cfg, 30 + n_s)
    bf = mrt_baseline(ch, cfg)
    out = sdr_phase_opt(ch, bf, cfg)
    tol = 1e-9 * max(1.0, abs(out.sdp_value))
    assert _grid_best(phase_problem(cfg, ch, bf.b), n_s, res) <= out.sdp_value + tol
    assert sdr_problem(cfg, ch, bf.b).rank_one_value(out.phase.q) <= out.sdp_value + tol


def test_burer_monteiro_rank():
    assert burer_monteiro_rank(33) == 10


def test_closed_form_aligned_channels_give_unit_phases():
    cfg = SystemConfig(n_t=2, n_r=1, n_e=1, n_s=3)
    ch = ChannelSet(np.ones((1, 2)), np.full((3, 2), 0.5), np.array([[1.0, 2.0, 3.0]]))
    q = closed_form_phase_single_bob(ch, Beamformer(np.ones(2) / np.sqrt(2), 1.0), cfg.alpha)
    assert np.allclose(q.q, 1.0)


def test_closed_form_textbook_angle():
    ch = ChannelSet(np.ones((1, 1)), np.array([[np.exp(1j * np.pi / 6)]]), np.array([[np.exp(-1j * np.pi / 3)]]))
    q = closed_form_phase_single_bob(ch, Beamformer(np.ones(1), 1.0), 1.0)
    assert q.angles[0] == pytest.approx(np.pi / 6, abs=1e-12)
    # brute-force check over the circle
    grid = 2 * np.pi * np.arange(4096) / 4096
    amp = np.abs(1.0 + np.exp(-1j * np.pi / 3) * np.exp(1j * grid) * np.exp(1j * np.pi / 6))
    assert grid[np.argmax(amp)] == pytest.approx(np.pi / 6, abs=2 * np.pi / 4096)


def test_closed_form_alignment_identity():
    rng = np.random.default_rng(12)
    cfg = SystemConfig.from_snr_db(9.0, n_t=4, n_r=1, n_e=2, n_s=8)
    for k in range(100):
        ch = random_channels(cfg, k)
        bf = Beamformer(unit(rng, 4), cfg.rho)
        q = closed_form_phase_single_bob(ch, bf, cfg.alpha)
        lhs = abs((cfg.alpha * ch.h_b[0] + (ch.g_r[0] * q.q) @ ch.h_ris) @ bf.b)
        rhs = abs(cfg.alpha * ch.h_b[0] @ bf.b) + np.sum(np.abs(ch.g_r[0]) * np.abs(ch.h_ris @ bf.b))
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_closed_form_needs_single_bob(mimo):
    cfg, ch = mimo
    with pytest.raises(DimensionError):
        closed_form_phase_single_bob(ch, Beamformer(np.ones(4) / 2, 1.0), cfg.alpha)


def test_mrt_matched_filter_for_single_bob():
    cfg = SystemConfig(n_t=3, n_r=1, n_e=1, n_s=2)
    ch = ChannelSet(np.array([[1.0, 2.0, 2.0]]), np.ones((2, 3)), np.ones((1, 2)))
    assert np.allclose(mrt_baseline(ch, cfg).b, [1 / 3, 2 / 3, 2 / 3])


def test_mrt_beats_random_beams(mimo):
    cfg, ch = mimo
    q = random_phase(cfg.n_s, 1)
    bf = mrt_baseline(ch, cfg, with_ris=True, phase=q)
    rng = np.random.default_rng(2)
    best_random = max(main_capacity(cfg, ch, q, Beamformer(unit(rng, cfg.n_t), cfg.rho)) for _ in range(10_000))
    assert main_capacity(cfg, ch, q, bf) >= best_random


def test_mrt_zero_effective_channel():
    cfg = SystemConfig(n_t=2, n_r=2, n_e=1, n_s=2, alpha=0.0)
    ch = ChannelSet(np.ones((2, 2)), np.zeros((2, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError, match="zero"):
        mrt_baseline(ch, cfg, with_ris=True)


def test_mrt_phase_shift_improves_capacity(mimo):
    cfg, ch = mimo
    phase, bf, it = mrt_phase_shift(cfg, ch)
    base = mrt_baseline(ch, cfg, with_ris=True)
    assert main_capacity(cfg, ch, phase, bf) >= main_capacity(cfg, ch, PhaseVector.ones(cfg.n_s), base)
    assert it >= 1


def test_ao_single_antenna_alice_is_one_pass():
    cfg = SystemConfig.from_snr_db(7.0, n_t=1, n_r=2, n_e=2, n_s=6, r_s=1.0)
    rep = alternating_optimize(cfg, random_channels(cfg, 1), "manifold")
    assert rep.converged and rep.iterations_used == 1 and len(rep.trace) == 2


@pytest.mark.parametrize("solver", ["sdr", "manifold"])
def test_ao_reports_best_iterate(mimo, solver):
    cfg, ch = mimo
    rep = alternating_optimize(cfg, ch, solver, seed=3, iter_max=8)
    best = min(row.p_out for row in rep.trace)
    assert sop_theory(cfg, ch, rep.final_q, rep.final_b) == pytest.approx(best, abs=1e-15)
    assert best <= rep.trace[0].p_out


def test_ao_sdr_trace_is_monotone(mimo):
    cfg, ch = mimo
    xi = 1e-5
    rep = alternating_optimize(cfg, ch, "sdr", seed=4, xi=xi, iter_max=10)
    p = [row.p_out for row in rep.trace]
    assert all(b <= a + xi for a, b in zip(p, p[1:]))


def test_ao_is_deterministic(mimo):
    cfg, ch = mimo
    a = alternating_optimize(cfg, ch, "manifold", seed=5, iter_max=5)
    b = alternating_optimize(cfg, ch, "manifold", seed=5, iter_max=5)
    assert a.trace == b.trace and np.array_equal(a.final_q.q, b.final_q.q)


def test_ao_argument_checks(mimo):
    cfg, ch = mimo
    with pytest.raises(DimensionError):
        alternating_optimize(cfg, ch, "closed_form")
    with pytest.raises(ValueError):
        alternating_optimize(cfg, ch, "mm")
    with pytest.raises(ValueError):
        alternating_optimize(cfg, ch, iter_max=0)


def test_ao_closed_form_single_bob():
    cfg = SystemConfig.from_snr_db(7.0, n_t=10, n_r=1, n_e=2, n_s=32, r_s=3.0)
    ch = random_channels(cfg, 0)
    rep = alternating_optimize(cfg, ch, "closed_form", iter_max=5)
    assert rep.trace[-1].p_out < rep.trace[0].p_out
    assert not math.isnan(rep.p_out)
