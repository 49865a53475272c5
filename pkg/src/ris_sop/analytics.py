"""Closed-form secrecy outage probability.

The eavesdropper gain ``x = |beta*a + C u|^2`` with ``a ~ CN(0, I_m)`` and
``C ~ CN(0, I_m x I_n)`` is Gamma distributed with integer shape ``m`` and
scale ``beta^2 + |u|^2``.  Every outage expression below is the survival
function of that law evaluated at a rate-dependent threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .model import (
    Beamformer,
    ChannelSet,
    DimensionError,
    PhaseVector,
    SystemConfig,
    effective_channel,
    main_capacity,
    main_capacity_single_alice,
)

__all__ = [
    "DegenerateChannelError",
    "GammaFit",
    "SopInputs",
    "reg_upper_gamma",
    "gain_cdf",
    "sop_inputs",
    "sop_from_inputs",
    "sop_theory",
    "sop_high_snr_bound",
    "sop_single_alice",
    "sop_single_eve",
    "outage_threshold",
]


class DegenerateChannelError(ValueError):
    """The wiretap gain is identically zero (beta = 0 and H b = 0)."""


@dataclass(frozen=True)
class GammaFit:
    """Gamma law of the eavesdropper gain: integer ``shape`` and ``scale``."""

    shape: int
    scale: float

    @classmethod
    def from_params(cls, beta: float, m: int, u_norm2: float) -> "GammaFit":
        scale = beta**2 + u_norm2
        if scale <= 0:
            raise DegenerateChannelError("beta = 0 and |u| = 0 give a zero wiretap gain")
        return cls(int(m), float(scale))

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        return self.shape * self.scale**2

    def cdf(self, x):
        return 1.0 - reg_upper_gamma(self.shape, np.asarray(x, dtype=float) / self.scale)


def reg_upper_gamma(m: int, z):
    """Regularized upper incomplete gamma ``Gamma(m, z) / Gamma(m)``.

    Integer shape only.  Uses the finite Poisson series
    ``exp(-z) * sum_{k<m} z^k / k!`` evaluated in log space.  Returns 1 for
    ``z <= 0``.  Accepts scalar or array ``z``.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"shape must be a positive integer, got {m!r}")
    m = int(m)
    z = np.asarray(z, dtype=float)
    out = np.ones(z.shape)
    pos = z > 0
    if np.any(pos):
        zp = z[pos][..., None]
        k = np.arange(m)
        log_terms = k * np.log(zp) - gammaln(k + 1.0) - zp
        out[pos] = np.minimum(np.exp(logsumexp(log_terms, axis=-1)), 1.0)
    return float(out) if out.ndim == 0 else out


def gain_cdf(beta: float, m: int, u_norm2: float, x):
    """CDF of the wiretap gain ``|beta*a + C u|^2`` at ``x``."""
    if u_norm2 < 0:
        raise ValueError("u_norm2 must be non-negative")
    return GammaFit.from_params(beta, m, u_norm2).cdf(x)


@dataclass(frozen=True)
class SopInputs:
    """Scalars entering the outage formula.

    ``c_m`` is Bob's capacity, ``phase_gain`` is ``|diag(q) H b|^2`` and ``p``
    the transmit power.
    """

    cfg: SystemConfig
    c_m: float
    phase_gain: float
    p: float

    def __post_init__(self):
        if self.c_m < 0 or self.phase_gain < 0:
            raise ValueError("capacity and phase gain must be non-negative")

    @property
    def threshold(self) -> float:
        """``sigma_e2 * (2**(C_m - R_s) - 1) / P``; non-positive means certain outage."""
        return outage_threshold(self.cfg, self.c_m, self.p)

    @property
    def gamma_argument(self) -> float:
        return self.threshold / (self.cfg.beta**2 + self.phase_gain)


def outage_threshold(cfg: SystemConfig, c_m: float, p: float) -> float:
    # expm1 keeps precision when C_m is close to R_s
    return cfg.sigma_e2 * math.expm1((c_m - cfg.r_s) * math.log(2.0)) / p


def sop_from_inputs(inputs: SopInputs) -> float:
    phi = inputs.threshold
    if phi <= 0:
        return 1.0
    if inputs.cfg.beta == 0 and inputs.phase_gain == 0:
        raise DegenerateChannelError(
            "wiretap gain channel is zero: beta = 0 and diag(q) H b = 0"
        )
    return reg_upper_gamma(inputs.cfg.n_e, inputs.gamma_argument)


def _phase_gain(ch: ChannelSet, phase: PhaseVector, b: np.ndarray) -> float:
    hb = ch.h_ris @ b
    gain = float(np.vdot(hb, hb).real)
    u = phase.q * hb
    assert abs(float(np.vdot(u, u).real) - gain) <= 1e-12 * max(1.0, gain), "phase normalization broken"
    return gain


def sop_inputs(cfg: SystemConfig, ch: ChannelSet, phase: PhaseVector, bf: Beamformer) -> SopInputs:
    c_m = main_capacity(cfg, ch, phase, bf)
    return SopInputs(cfg, c_m, _phase_gain(ch, phase, bf.b), bf.p)


def sop_theory(cfg: SystemConfig, ch: ChannelSet, phase: PhaseVector, bf: Beamformer) -> float:
    """Secrecy outage probability for given beamformer and RIS phases.

    Certain outage (1.0) when ``R_s >= C_m``.

    Raises
    ------
    DegenerateChannelError
        If ``beta = 0`` and ``H b = 0`` while ``R_s < C_m``.
    """
    return sop_from_inputs(sop_inputs(cfg, ch, phase, bf))


def sop_high_snr_bound(cfg: SystemConfig, ch: ChannelSet, phase: PhaseVector, bf: Beamformer) -> float:
    """Power-independent lower bound on :func:`sop_theory` (the P -> inf limit)."""
    y = effective_channel(cfg, ch, phase) @ bf.b
    main_gain = float(np.vdot(y, y).real)
    w = cfg.beta**2 + _phase_gain(ch, phase, bf.b)
    if w == 0:
        raise DegenerateChannelError("wiretap gain channel is zero: beta = 0 and diag(q) H b = 0")
    z = cfg.sigma_e2 * main_gain / (cfg.sigma2 * 2.0**cfg.r_s * w)
    return reg_upper_gamma(cfg.n_e, z)


def sop_single_alice(cfg: SystemConfig, ch: ChannelSet, phase: PhaseVector, p: float) -> float:
    """Outage probability with a single transmit antenna."""
    if cfg.n_t != 1:
        raise DimensionError("single-Alice outage requires n_t = 1")
    c_m = main_capacity_single_alice(cfg, ch, phase, p)
    h0 = phase.q * ch.h_ris[:, 0]
    return sop_from_inputs(SopInputs(cfg, c_m, float(np.vdot(h0, h0).real), p))


def sop_single_eve(cfg: SystemConfig, ch: ChannelSet, phase: PhaseVector, bf: Beamformer) -> float:
    """Outage probability for a single-antenna eavesdropper (exponential law)."""
    if cfg.n_e != 1:
        raise DimensionError("single-Eve outage requires n_e = 1")
    inputs = sop_inputs(cfg, ch, phase, bf)
    if inputs.threshold <= 0:
        return 1.0
    if cfg.beta == 0 and inputs.phase_gain == 0:
        raise DegenerateChannelError("wiretap gain channel is zero: beta = 0 and diag(q) H b = 0")
    return math.exp(-inputs.gamma_argument)
