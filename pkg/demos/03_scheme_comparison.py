"""Does optimizing the surface pay off?

Runs the scenario in ``snr_sweep.json`` (a 32-element surface, 10
transmit antennas, SNR from 0 to 15 dB) and prints the outage probability
of each design side by side:

* ``mrt_no_ris``: MRT toward Bob with the surface switched off
* ``mrt_rand``: MRT with random surface phases
* ``mrt_ps``: phases and MRT tuned for Bob's capacity only
* ``ao_man``: security-aware alternating optimization

Pass ``--csv`` to dump the raw rows instead.
"""
import sys
from collections import defaultdict
from pathlib import Path

from ris_sop import load_scenario, run_scenario, write_csv

scenario = load_scenario(Path(__file__).with_name("snr_sweep.json"))
rows = run_scenario(scenario, workers=4)

if "--csv" in sys.argv:
    sys.stdout.write(write_csv(rows))
    raise SystemExit

table = defaultdict(dict)
for r in rows:
    table[r["sweep_value"]][r["scheme"]] = r["sop_theory"]

print("SNR dB " + "".join(f"{s:>12}" for s in scenario.schemes))
for snr, by_scheme in table.items():
    print(f"{snr:6} " + "".join(f"{by_scheme[s]:12.4f}" for s in scenario.schemes))
