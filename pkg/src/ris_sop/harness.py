"""Scenario files, parameter sweeps and CSV output.

A scenario is a JSON document::

    {
      "name": "snr_sweep",
      "system": {"n_t": 10, "n_r": 3, "n_e": 2, "n_s": 32,
                 "alpha": 0.8, "beta": 0.8, "snr_db": 9, "r_s": 4},
      "noise": {"bandwidth_hz": 20e6, "noise_figure_db": 10},
      "sweep": {"axis": "snr_db", "values": [0, 3, 6, 9, 12, 15]},
      "schemes": ["mrt_no_ris", "ao_man"],
      "trials": 0,
      "seed": 1
    }

Unknown keys anywhere are errors.
"""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .analytics import sop_theory
from .manifold import CgOptions
from .model import (
    NoiseModel,
    PhaseVector,
    SystemConfig,
    dbm_to_watts,
    noise_floor_dbm,
    random_channels,
    random_phase,
)
from .montecarlo import empirical_sop
from .optimize import alternating_optimize, mrt_baseline, mrt_phase_shift

__all__ = [
    "ConfigError",
    "SCHEMES",
    "SWEEP_AXES",
    "CSV_COLUMNS",
    "Scenario",
    "load_scenario",
    "scenario_from_dict",
    "evaluate_scheme",
    "run_scenario",
    "write_csv",
]

SCHEMES = ("mrt_no_ris", "mrt_rand", "mrt_ps", "ao_cs", "ao_sdr", "ao_man")
SWEEP_AXES = ("snr_db", "r_s", "n_e", "n_t", "n_r", "n_s")
CSV_COLUMNS = (
    "scenario", "scheme", "sweep_axis", "sweep_value", "snr_db", "r_s",
    "n_t", "n_r", "n_e", "n_s", "alpha", "beta", "sop_theory", "sop_mc",
    "sop_mc_stderr", "iterations", "wall_ms", "seed",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    system: SystemConfig
    sweep_axis: str
    sweep_values: tuple
    schemes: tuple
    noise: NoiseModel = field(default_factory=NoiseModel)
    trials: int = 0
    seed: int = 0
    realizations: int = 1
    xi: float = 1e-5
    iter_max: int = 50
    use_noise_floor: bool = False

    def __post_init__(self):
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.sweep_axis!r}; choose from {SWEEP_AXES}")
        vals = tuple(self.sweep_values)
        if not vals:
            raise ConfigError("sweep grid is empty")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("sweep grid must be strictly increasing")
        object.__setattr__(self, "sweep_values", vals)
        object.__setattr__(self, "schemes", tuple(self.schemes))
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ConfigError(f"unknown schemes {bad}; choose from {SCHEMES}")
        if self.trials < 0 or self.realizations < 1:
            raise ConfigError("trials must be >= 0 and realizations >= 1")
        for value in vals:
            cfg = self.config_at(value)
            for scheme in self.schemes:
                if scheme == "ao_cs" and cfg.n_r != 1:
                    raise ConfigError(
                        f"scheme ao_cs needs n_r = 1 but sweep point {self.sweep_axis}={value} has n_r={cfg.n_r}"
                    )

    def config_at(self, value) -> SystemConfig:
        """System configuration at one sweep point."""
        cfg = self.system
        if self.use_noise_floor:
            n0 = float(dbm_to_watts(noise_floor_dbm(self.noise)))
            cfg = SystemConfig.from_snr_db(
                cfg.snr_db, **{**_cfg_kwargs(cfg), "sigma2": n0, "sigma_e2": n0}
            )
        try:
            if self.sweep_axis == "snr_db":
                return SystemConfig.from_snr_db(
                    float(value), **{**_cfg_kwargs(cfg), "sigma2": cfg.sigma2, "sigma_e2": cfg.sigma_e2}
                )
            if self.sweep_axis == "r_s":
                return replace(cfg, r_s=float(value))
            if int(value) != value:
                raise ConfigError(f"{self.sweep_axis} values must be integers")
            return replace(cfg, **{self.sweep_axis: int(value)})
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid sweep point {self.sweep_axis}={value}: {exc}") from exc


def _cfg_kwargs(cfg: SystemConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(cfg) if f.name not in ("rho", "sigma2", "sigma_e2")}


def _check_keys(d: dict, allowed, where: str):
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


_TOP_KEYS = ("name", "system", "noise", "sweep", "schemes", "trials", "seed", "realizations", "ao", "use_noise_floor")
_SYSTEM_KEYS = tuple(f.name for f in fields(SystemConfig)) + ("snr_db",)


def scenario_from_dict(d: dict) -> Scenario:
    _check_keys(d, _TOP_KEYS, "scenario")
    for key in ("name", "system", "sweep", "schemes"):
        if key not in d:
            raise ConfigError(f"missing required key {key!r}")
    sysd = dict(d["system"])
    _check_keys(sysd, _SYSTEM_KEYS, "system")
    noised = dict(d.get("noise", {}))
    _check_keys(noised, [f.name for f in fields(NoiseModel)], "noise")
    sweep = dict(d["sweep"])
    _check_keys(sweep, ("axis", "values"), "sweep")
    ao = dict(d.get("ao", {}))
    _check_keys(ao, ("xi", "iter_max"), "ao")
    try:
        if "snr_db" in sysd:
            if "rho" in sysd:
                raise ConfigError("give either rho or snr_db, not both")
            system = SystemConfig.from_snr_db(sysd.pop("snr_db"), **sysd)
        else:
            system = SystemConfig(**sysd)
        noise = NoiseModel(**noised)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return Scenario(
        name=str(d["name"]),
        system=system,
        noise=noise,
        sweep_axis=sweep.get("axis", ""),
        sweep_values=tuple(sweep.get("values", ())),
        schemes=tuple(d["schemes"]),
        trials=int(d.get("trials", 0)),
        seed=int(d.get("seed", 0)),
        realizations=int(d.get("realizations", 1)),
        xi=float(ao.get("xi", 1e-5)),
        iter_max=int(ao.get("iter_max", 50)),
        use_noise_floor=bool(d.get("use_noise_floor", False)),
    )


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return scenario_from_dict(d)


def evaluate_scheme(scheme: str, cfg: SystemConfig, ch, seed: int, xi=1e-5, iter_max=50,
                    options: CgOptions = CgOptions()):
    """Design one scheme on fixed channels.

    Returns ``(channels_seen_by_eve, phase, beamformer, iterations)``; for
    ``mrt_no_ris`` the reflected links are removed.
    """
    if scheme == "mrt_no_ris":
        bf = mrt_baseline(ch, cfg, with_ris=False)
        return ch.without_ris(), PhaseVector.ones(cfg.n_s), bf, None
    if scheme == "mrt_rand":
        phase = random_phase(cfg.n_s, seed)
        return ch, phase, mrt_baseline(ch, cfg, with_ris=True, phase=phase), None
    if scheme == "mrt_ps":
        phase, bf, it = mrt_phase_shift(cfg, ch, options=options)
        return ch, phase, bf, it
    solver = {"ao_cs": "closed_form", "ao_sdr": "sdr", "ao_man": "manifold"}[scheme]
    rep = alternating_optimize(cfg, ch, solver, seed=seed, xi=xi, iter_max=iter_max, options=options)
    return ch, rep.final_q, rep.final_b, rep.iterations_used


def _fmt(x):
    if x is None or x == "":
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.9g}"


def _run_cell(s: Scenario, i, value, j, scheme, timing):
    cfg = s.config_at(value)
    t0 = time.perf_counter()
    theory, mc, se2, iters = [], [], [], []
    for r in range(s.realizations):
        ch_seed = s.seed + r
        ch = random_channels(cfg, ch_seed, s.noise)
        eve_ch, phase, bf, it = evaluate_scheme(scheme, cfg, ch, ch_seed, s.xi, s.iter_max)
        theory.append(sop_theory(cfg, eve_ch, phase, bf))
        if it is not None:
            iters.append(it)
        if s.trials > 0:
            mc_seed = (s.seed * 1_000_003 + 1_000 * i + j) * 101 + r
            est = empirical_sop(cfg, eve_ch, phase, bf, s.trials, mc_seed)
            mc.append(est.p_hat)
            se2.append(est.std_err**2)
    wall = (time.perf_counter() - t0) * 1e3
    n = s.realizations
    return {
        "scenario": s.name,
        "scheme": scheme,
        "sweep_axis": s.sweep_axis,
        "sweep_value": value,
        "snr_db": cfg.snr_db,
        "r_s": cfg.r_s,
        "n_t": cfg.n_t,
        "n_r": cfg.n_r,
        "n_e": cfg.n_e,
        "n_s": cfg.n_s,
        "alpha": cfg.alpha,
        "beta": cfg.beta,
        "sop_theory": float(np.mean(theory)),
        "sop_mc": float(np.mean(mc)) if mc else None,
        "sop_mc_stderr": float(np.sqrt(np.sum(se2)) / n) if se2 else None,
        "iterations": int(np.max(iters)) if iters else None,
        "wall_ms": wall if timing else None,
        "seed": s.seed,
    }


def run_scenario(s: Scenario, workers: int | None = None, timing: bool = False) -> list[dict]:
    """One row per (sweep point, scheme), in sweep-then-scheme order.

    Channels are drawn from ``seed`` (plus the realization index), so every
    scheme at every sweep point sees the same links whenever their shapes
    agree.  ``wall_ms`` is only filled when ``timing`` is set, which keeps
    the default output byte-reproducible.
    """
    cells = [(i, v, j, sch) for i, v in enumerate(s.sweep_values) for j, sch in enumerate(s.schemes)]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda c: _run_cell(s, *c, timing), cells))
    return [_run_cell(s, *c, timing) for c in cells]


def write_csv(rows, fh=None) -> str:
    """Write rows with the fixed header; returns the text when ``fh`` is None."""
    buf = fh if fh is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([row["scenario"], row["scheme"], row["sweep_axis"]] + [_fmt(row[c]) for c in CSV_COLUMNS[3:]])
    return buf.getvalue() if fh is None else ""
