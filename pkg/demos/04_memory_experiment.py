"""Distance-3 memory experiments: analog vs no-analog decoding.

Runs modest Monte Carlo campaigns at a few squeezings and prints the
logical failure rates side by side.  At desk scale this reproduces the
qualitative gap that motivates dynamic analog edge weights.
"""

import time

from surfgkp.gkp import GkpParams
from surfgkp.memory import MemoryRunner

SHOTS = 60_000

print(f"d=3 memory experiments, {SHOTS} shots per point")
print("  dB    analog p_Z          no-analog p_Z")
for db in (9.5, 10.0, 10.5, 11.0):
    row = []
    for analog in (True, False):
        runner = MemoryRunner(3, analog=analog)
        t0 = time.perf_counter()
        res = runner.run(GkpParams(db, 1.0), seed=42, shots=SHOTS)
        row.append(f"{res.p_fail_z:.3e} ({time.perf_counter()-t0:4.1f}s)")
    print(f"  {db:4.1f}  {row[0]}   {row[1]}")

print("\nsingle-shot interface:")
from numpy.random import default_rng
from surfgkp.memory import run_memory_experiment

flags = run_memory_experiment(3, GkpParams(10.0), True, default_rng(0))
print(" ", flags)
