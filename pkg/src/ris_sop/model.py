"""Domain types, seeded channel generation and capacity evaluation.

Conventions
-----------
All channel matrices are complex ``numpy`` arrays.  The RIS phase vector is
stored as unit-modulus complex values, never as raw angles.  Link amplitude
multipliers default to 1 (normalized channels).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DimensionError",
    "SystemConfig",
    "ChannelSet",
    "EveChannels",
    "PhaseVector",
    "Beamformer",
    "NoiseModel",
    "rng_for",
    "sample_rayleigh",
    "random_channels",
    "random_phase",
    "random_unit_vector",
    "effective_channel",
    "main_capacity",
    "main_capacity_single_alice",
    "main_capacity_single_bob",
    "noise_floor_dbm",
    "dbm_to_watts",
    "watts_to_dbm",
]

UNIT_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when array shapes disagree with the system dimensions."""


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, link scalars, power budget, noise powers and rate.

    ``alpha`` and ``beta`` scale the Alice->Bob and Alice->Eve direct links.
    They are deterministic amplitude factors.
    """

    n_t: int
    n_r: int
    n_e: int
    n_s: int
    alpha: float = 0.8
    beta: float = 0.8
    rho: float = 1.0
    sigma2: float = 1.0
    sigma_e2: float = 1.0
    r_s: float = 1.0

    def __post_init__(self):
        for name in ("n_t", "n_r", "n_e", "n_s"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ValueError("alpha and beta must lie in [0, 1]")
        for name in ("rho", "sigma2", "sigma_e2", "r_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @classmethod
    def from_snr_db(cls, snr_db: float, **kw) -> "SystemConfig":
        """Build a config with ``rho = sigma2 * 10**(snr_db/10)``.

        ``sigma_e2`` defaults to ``sigma2``.
        """
        sigma2 = kw.pop("sigma2", 1.0)
        kw.setdefault("sigma_e2", sigma2)
        return cls(rho=sigma2 * 10.0 ** (snr_db / 10.0), sigma2=sigma2, **kw)

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.rho / self.sigma2)

    def replace(self, **changes) -> "SystemConfig":
        from dataclasses import replace

        return replace(self, **changes)


def _as_matrix(a, name):
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class ChannelSet:
    """Legitimate channels known to Alice.

    Attributes
    ----------
    h_b : (n_r, n_t) Alice -> Bob.
    h_ris : (n_s, n_t) Alice -> RIS.
    g_r : (n_r, n_s) RIS -> Bob.

    Single-antenna cases use the same type with one row or one column.
    """

    h_b: np.ndarray
    h_ris: np.ndarray
    g_r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h_b", _as_matrix(self.h_b, "h_b"))
        object.__setattr__(self, "h_ris", _as_matrix(self.h_ris, "h_ris"))
        object.__setattr__(self, "g_r", _as_matrix(self.g_r, "g_r"))
        n_r, n_t = self.h_b.shape
        n_s = self.h_ris.shape[0]
        if self.h_ris.shape[1] != n_t:
            raise DimensionError("h_ris must have n_t columns")
        if self.g_r.shape != (n_r, n_s):
            raise DimensionError(f"g_r must have shape {(n_r, n_s)}, got {self.g_r.shape}")

    @property
    def dims(self) -> tuple[int, int, int]:
        """``(n_t, n_r, n_s)``."""
        return self.h_b.shape[1], self.h_b.shape[0], self.h_ris.shape[0]

    def check(self, cfg: SystemConfig) -> None:
        if self.dims != (cfg.n_t, cfg.n_r, cfg.n_s):
            raise DimensionError(
                f"channels have (n_t, n_r, n_s)={self.dims}, config expects "
                f"{(cfg.n_t, cfg.n_r, cfg.n_s)}"
            )

    def without_ris(self) -> "ChannelSet":
        """Same direct link with the reflected paths removed."""
        return ChannelSet(self.h_b, np.zeros_like(self.h_ris), np.zeros_like(self.g_r))


@dataclass(frozen=True)
class EveChannels:
    """One eavesdropper realization: ``h_e`` (n_e, n_t) and ``g_e`` (n_e, n_s)."""

    h_e: np.ndarray
    g_e: np.ndarray


@dataclass(frozen=True)
class PhaseVector:
    """Unit-modulus RIS coefficients ``q``; the phase matrix is ``diag(q)``."""

    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=complex).reshape(-1)
        if q.size == 0:
            raise DimensionError("phase vector is empty")
        if np.max(np.abs(np.abs(q) - 1.0)) > UNIT_TOL:
            raise ValueError("phase vector entries must have unit modulus")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_angles(cls, theta) -> "PhaseVector":
        return cls(np.exp(1j * np.asarray(theta, dtype=float)))

    @classmethod
    def normalized(cls, v) -> "PhaseVector":
        """Project an arbitrary vector entrywise onto the unit circle.

        Zero entries map to 1.
        """
        v = np.asarray(v, dtype=complex).reshape(-1)
        mag = np.abs(v)
        out = np.ones_like(v)
        nz = mag > 0
        out[nz] = v[nz] / mag[nz]
        # one more division pins |q_i| to 1 within rounding
        return cls(out / np.abs(out))

    @classmethod
    def ones(cls, n: int) -> "PhaseVector":
        return cls(np.ones(n, dtype=complex))

    @property
    def angles(self) -> np.ndarray:
        """Phases in (-pi, pi]."""
        return np.angle(self.q)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.q)

    def __len__(self):
        return self.q.size


@dataclass(frozen=True)
class Beamformer:
    """Unit direction ``b`` and transmit power ``p``; ``w = sqrt(p) * b``."""

    b: np.ndarray
    p: float

    def __post_init__(self):
        b = np.array(self.b, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(b) - 1.0) > UNIT_TOL:
            raise ValueError("beamformer direction must have unit norm")
        if not self.p > 0:
            raise ValueError("transmit power must be positive")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "p", float(self.p))

    @classmethod
    def from_vector(cls, v, p: float) -> "Beamformer":
        v = np.asarray(v, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("cannot normalize a zero beamforming vector")
        v = v / n
        return cls(v / np.linalg.norm(v), p)

    @property
    def w(self) -> np.ndarray:
        return np.sqrt(self.p) * self.b


@dataclass(frozen=True)
class NoiseModel:
    """Thermal noise budget and optional per-link amplitude multipliers.

    ``link_gains`` maps link names (``"h_b"``, ``"h_ris"``, ``"g_r"``) to
    amplitude multipliers such as ``c / sqrt(d)``; missing links default to 1.
    """

    bandwidth_hz: float = 20e6
    noise_figure_db: float = 10.0
    link_gains: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth must be positive")
        unknown = set(self.link_gains) - {"h_b", "h_ris", "g_r"}
        if unknown:
            raise ValueError(f"unknown link names: {sorted(unknown)}")

    def gain(self, link: str) -> float:
        return float(self.link_gains.get(link, 1.0))

    def apply(self, ch: ChannelSet) -> ChannelSet:
        """Scale each link of ``ch`` by its amplitude multiplier."""
        return ChannelSet(
            ch.h_b * self.gain("h_b"),
            ch.h_ris * self.gain("h_ris"),
            ch.g_r * self.gain("g_r"),
        )


# --------------------------------------------------------------------------
# random generation


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for an independent ``(seed, stream)`` pair."""
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def standard_complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) entries: real and imaginary parts each have variance 1/2."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def sample_rayleigh(rows: int, cols: int, rng_seed: int, stream: int = 0) -> np.ndarray:
    """I.i.d. CN(0, 1) matrix, reproducible from ``(rng_seed, stream)``."""
    if rows < 1 or cols < 1:
        raise DimensionError(f"need rows, cols >= 1, got ({rows}, {cols})")
    return standard_complex_normal(rng_for(rng_seed, stream), (rows, cols))


def random_channels(cfg: SystemConfig, seed: int, noise: NoiseModel | None = None) -> ChannelSet:
    """Rayleigh legitimate channels for ``cfg``.

    Each link uses its own stream, so links whose shape does not change
    across a parameter sweep keep the same realization.
    """
    ch = ChannelSet(
        sample_rayleigh(cfg.n_r, cfg.n_t, seed, 0),
        sample_rayleigh(cfg.n_s, cfg.n_t, seed, 1),
        sample_rayleigh(cfg.n_r, cfg.n_s, seed, 2),
    )
    return noise.apply(ch) if noise is not None else ch


def random_phase(n_s: int, seed: int, stream: int = 3) -> PhaseVector:
    """Uniformly random RIS phases."""
    theta = rng_for(seed, stream).uniform(0.0, 2 * np.pi, n_s)
    return PhaseVector.from_angles(theta)


def random_unit_vector(n: int, seed: int, stream: int = 4) -> np.ndarray:
    """Isotropic random unit vector in C^n."""
    v = standard_complex_normal(rng_for(seed, stream), (n,))
    v = v / np.linalg.norm(v)
    return v / np.linalg.norm(v)


# --------------------------------------------------------------------------
# capacities


def effective_channel(cfg: SystemConfig, ch: ChannelSet, phase: PhaseVector) -> np.ndarray:
    """Main channel ``alpha*H_b + G_r diag(q) H`` of shape (n_r, n_t)."""
    ch.check(cfg)
    if len(phase) != cfg.n_s:
        raise DimensionError(f"phase vector has {len(phase)} entries, expected {cfg.n_s}")
    return cfg.alpha * ch.h_b + (ch.g_r * phase.q[None, :]) @ ch.h_ris


def _log2_1p(x):
    return np.log1p(x) / np.log(2.0)


def main_capacity(cfg: SystemConfig, ch: ChannelSet, phase: PhaseVector, bf: Beamformer) -> float:
    """Bob's capacity log2(1 + |(alpha H_b + G_r Phi H) w|^2 / sigma2)."""
    if bf.b.size != cfg.n_t:
        raise DimensionError(f"beamformer has {bf.b.size} entries, expected {cfg.n_t}")
    y = effective_channel(cfg, ch, phase) @ bf.w
    return float(_log2_1p(np.vdot(y, y).real / cfg.sigma2))


def main_capacity_single_alice(
    cfg: SystemConfig, ch: ChannelSet, phase: PhaseVector, p: float
) -> float:
    """Capacity with one transmit antenna: ``h_b`` is (n_r, 1), ``h_0`` is (n_s, 1)."""
    if cfg.n_t != 1:
        raise DimensionError("single-Alice capacity requires n_t = 1")
    ch.check(cfg)
    h_b = ch.h_b[:, 0]
    h_0 = ch.h_ris[:, 0]
    y = cfg.alpha * h_b + ch.g_r @ (phase.q * h_0)
    return float(_log2_1p(p * np.vdot(y, y).real / cfg.sigma2))


def main_capacity_single_bob(
    cfg: SystemConfig, ch: ChannelSet, phase: PhaseVector, bf: Beamformer
) -> float:
    """Capacity with one receive antenna.

    ``ch.h_b`` is the row ``h_b^H`` (1, n_t) and ``ch.g_r`` is ``h^H`` (1, n_s).
    """
    if cfg.n_r != 1:
        raise DimensionError("single-Bob capacity requires n_r = 1")
    ch.check(cfg)
    row = cfg.alpha * ch.h_b[0] + (ch.g_r[0] * phase.q) @ ch.h_ris
    s = row @ bf.b
    return float(_log2_1p(bf.p * abs(s) ** 2 / cfg.sigma2))


# --------------------------------------------------------------------------
# link budget


def noise_floor_dbm(nm: NoiseModel) -> float:
    """Thermal noise power ``-174 + 10 log10(W) + NF`` in dBm."""
    if not nm.bandwidth_hz > 0:
        raise ValueError("bandwidth must be positive")
    return -174.0 + 10.0 * np.log10(nm.bandwidth_hz) + nm.noise_figure_db


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(watts):
    return 10.0 * np.log10(np.asarray(watts, dtype=float)) + 30.0
