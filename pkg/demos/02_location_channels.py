"""Per-location noise channels and their belief tables.

Samples each circuit location kind, prints the sampled Pauli and the
conditional (analog) probability table, and compares shot-averaged
conditionals against the cached marginal tables.
"""

import numpy as np

from surfgkp import channel as ch
from surfgkp.gkp import GkpParams

rng = np.random.default_rng(7)
params = GkpParams(10.0, 1.0)

print("One sampled outcome per location kind (analog beliefs):")
for sim in (ch.sim_prep_plus, ch.sim_meas_x, ch.sim_idle, ch.sim_cnot, ch.sim_cz):
    out = sim(params, rng)
    head = np.array2string(out.probs[:4], precision=4, suppress_small=False)
    print(f"  {out.location_kind:5s} error={out.sampled_error:2s} probs[:4]={head}")

print("\nMarginal (no-analog) tables from quadrature:")
labels = ("II",) + ch.PAULI_ORDER_2Q
for kind in (ch.PREP, ch.MEAS, ch.IDLE):
    print(f"  {kind:5s}: {np.array2string(ch.marginal_table(kind, params), precision=5)}")
cnot = ch.marginal_table(ch.CNOT, params)
top = sorted(zip(labels, cnot), key=lambda kv: -kv[1])[:5]
print("  cnot top entries:", ", ".join(f"{k}={v:.3e}" for k, v in top))

print("\nBelief consistency (2e6 shots): averaged conditional vs marginal")
_, tab = ch.gate_sample_batch(ch.CNOT, params, rng, 2_000_000)
avg = tab.mean(axis=0)
for name, got, want in zip(labels[1:], avg, cnot[1:]):
    if want > 1e-3:
        print(f"  {name}: averaged {got:.4e}  marginal {want:.4e}")
