"""surfgkp: circuit-level Monte Carlo simulator of the surface-GKP code.

Library layout
--------------
- :mod:`surfgkp.gkp` -- squeezing conversions, modular reduction, flip
  probabilities, shift samplers.
- :mod:`surfgkp.mldecode` -- maximum-likelihood / closest-integer decoding of
  correlated shift pairs after two-GKP-qubit gates, plus the brute-force
  oracle.
- :mod:`surfgkp.channel` -- per-location noise channels (state prep, X
  measurement, idle, CNOT, CZ) with conditional (analog) and marginal
  probability tables.
- :mod:`surfgkp.lattice` -- rotated surface-code lattice and gate schedule.
- :mod:`surfgkp.circuit` -- Pauli-frame circuit simulation over syndrome
  rounds and the per-shot conditional-probability record.
- :mod:`surfgkp.graphs` -- matching-graph construction by exhaustive
  single-fault propagation.
- :mod:`surfgkp.blossom` -- exact minimum-weight perfect matching.
- :mod:`surfgkp.decoder` -- dynamic edge weights, MWPM decoding, logical
  failure adjudication, memory experiments.
- :mod:`surfgkp.experiments` -- Monte Carlo campaigns (gate tables, logical
  curves, threshold scan, overhead comparison).
- :mod:`surfgkp.cli` -- ``surfgkp`` command-line entry point.
"""

from .gkp import GkpParams, ShiftPair, db_to_variance, variance_to_db

__all__ = ["GkpParams", "ShiftPair", "db_to_variance", "variance_to_db"]
__version__ = "0.1.0"
