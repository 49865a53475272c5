"""Watching alternating optimization settle.

Each AO iteration updates the surface phases for the current beamformer,
then re-solves the beamformer for the new phases.  This script prints the
outage probability after every iteration for the three phase solvers: the
closed form (single-antenna Bob), Riemannian conjugate gradient and the
low-rank semidefinite relaxation.

The stopping rule is an improvement below xi = 1e-5.  Most of the gain
arrives in the first handful of iterations; the tail that follows is a
slow crawl in the fourth or fifth decimal, which is why the iteration
counts reported here are larger than ten.
"""
from ris_sop import SystemConfig, alternating_optimize, random_channels

SEED = 0

for solver, n_r in [("closed_form", 1), ("manifold", 3), ("sdr", 3)]:
    cfg = SystemConfig.from_snr_db(7.0, n_t=10, n_r=n_r, n_e=2, n_s=32, alpha=0.8, beta=0.8, r_s=3.0)
    rep = alternating_optimize(cfg, random_channels(cfg, SEED), solver, seed=SEED)
    print(f"\n{solver} (Bob antennas {n_r}): converged={rep.converged} after {rep.iterations_used} iterations")
    for row in rep.trace[:12]:
        print(f"  iter {row.iteration:2d}   P_out {row.p_out:.6f}")
    if len(rep.trace) > 12:
        last = rep.trace[-1]
        print(f"  ...\n  iter {last.iteration:2d}   P_out {last.p_out:.6f}")
