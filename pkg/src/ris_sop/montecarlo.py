"""Monte Carlo validation of the outage expressions.

Trials are grouped into fixed-size blocks and block ``i`` draws from its own
counter-based stream ``(seed, i)``.  The estimate therefore does not depend
on how blocks are distributed over workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .analytics import GammaFit, outage_threshold
from .model import (
    Beamformer,
    ChannelSet,
    DimensionError,
    PhaseVector,
    SystemConfig,
    main_capacity,
    rng_for,
    standard_complex_normal,
)

__all__ = [
    "BLOCK",
    "McEstimate",
    "sample_eve",
    "wiretap_gains",
    "empirical_sop",
    "sample_gain",
    "empirical_gain_moments",
    "empirical_cdf_distance",
]

BLOCK = 4096
DEFAULT_TRIALS = 100_000


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    trials: int
    std_err: float
    seed: int


def _blocks(trials):
    starts = range(0, trials, BLOCK)
    return [(i, min(BLOCK, trials - s)) for i, s in enumerate(starts)]


def _map_blocks(fn, trials, workers):
    blocks = _blocks(trials)
    if workers is None or workers <= 1:
        return [fn(i, n) for i, n in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda bn: fn(*bn), blocks))


def sample_eve(cfg: SystemConfig, rng: np.random.Generator, size: int):
    """Draw ``size`` eavesdropper realizations as stacked arrays.

    Returns ``(h_e, g_e)`` with shapes (size, n_e, n_t) and (size, n_e, n_s).
    """
    h_e = standard_complex_normal(rng, (size, cfg.n_e, cfg.n_t))
    g_e = standard_complex_normal(rng, (size, cfg.n_e, cfg.n_s))
    return h_e, g_e


def wiretap_gains(cfg, ch: ChannelSet, phase: PhaseVector, b: np.ndarray, h_e, g_e) -> np.ndarray:
    """``|(beta H_e + G_e diag(q) H) b|^2`` for each stacked realization."""
    u = phase.q * (ch.h_ris @ b)
    y = cfg.beta * (h_e @ b) + g_e @ u
    return np.einsum("ij,ij->i", y.conj(), y).real


def empirical_sop(
    cfg: SystemConfig,
    ch: ChannelSet,
    phase: PhaseVector,
    bf: Beamformer,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    workers: int | None = None,
) -> McEstimate:
    """Fraction of eavesdropper draws whose gain reaches the outage threshold.

    Single-Alice systems are covered by ``n_t = 1`` and ``bf.b = [1]``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ch.check(cfg)
    if bf.b.size != cfg.n_t or len(phase) != cfg.n_s:
        raise DimensionError("beamformer or phase vector does not match the config")
    phi = outage_threshold(cfg, main_capacity(cfg, ch, phase, bf), bf.p)

    def count(block, n):
        if phi <= 0:
            return n
        h_e, g_e = sample_eve(cfg, rng_for(seed, block), n)
        return int(np.count_nonzero(wiretap_gains(cfg, ch, phase, bf.b, h_e, g_e) >= phi))

    hits = sum(_map_blocks(count, trials, workers))
    p_hat = hits / trials
    return McEstimate(p_hat, trials, math.sqrt(p_hat * (1 - p_hat) / trials), seed)


def sample_gain(beta: float, m: int, u, trials: int, seed: int, workers: int | None = None) -> np.ndarray:
    """Draws of ``x = |beta*a + C u|^2`` with ``a ~ CN(0, I_m)``, ``C ~ CN(0, I)``."""
    u = np.asarray(u, dtype=complex).reshape(-1)

    def draw(block, n):
        rng = rng_for(seed, block)
        a = standard_complex_normal(rng, (n, m))
        c = standard_complex_normal(rng, (n, m, u.size))
        y = beta * a + c @ u
        return np.einsum("ij,ij->i", y.conj(), y).real

    return np.concatenate(_map_blocks(draw, trials, workers))


def empirical_gain_moments(beta: float, m: int, u, trials: int, seed: int = 0):
    """Sample mean and unbiased sample variance of the wiretap gain."""
    if trials < 2:
        raise ValueError("need at least 2 trials for a variance")
    x = sample_gain(beta, m, u, trials, seed)
    return float(np.mean(x)), float(np.var(x, ddof=1))


def empirical_cdf_distance(beta: float, m: int, u, trials: int, seed: int = 0, scale_multiplier: float = 1.0) -> float:
    """Kolmogorov-Smirnov distance between gain draws and the Gamma CDF.

    ``scale_multiplier`` distorts the reference scale (negative controls).
    """
    if trials < 100:
        raise ValueError("need at least 100 trials for a KS distance")
    u = np.asarray(u, dtype=complex).reshape(-1)
    fit = GammaFit.from_params(beta, m, float(np.vdot(u, u).real))
    fit = GammaFit(fit.shape, fit.scale * scale_multiplier)
    x = sample_gain(beta, m, u, trials, seed)
    return float(stats.kstest(x, fit.cdf).statistic)
