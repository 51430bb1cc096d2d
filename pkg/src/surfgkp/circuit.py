"""Pauli-frame circuit simulation of surface-GKP syndrome rounds.

One syndrome measurement round is: reset + prepare all ancillas in |+>,
one idle location per data qubit, four two-qubit gate time steps
(CNOTs for X stabilizers, CZs for Z stabilizers, ancilla = control), and
an X-basis measurement of every ancilla.  Sampled Pauli errors are the
only state tracked; ideal gates conjugate the accumulated frame.

Each shot also fills a flat conditional-probability record ``pe`` laid out
round-by-round as [idle triples | 62-entry X-ancilla blocks | 62-entry
Z-ancilla blocks]; an ancilla block is [prep, 4 x 15 gate entries in the
fixed two-qubit Pauli order, meas].  Unused gate slots of weight-2
stabilizers stay zero.  The same layout indexes the marginal record used
by no-analog decoding.

The simulator is vectorized over a batch of shots; an injection mode
replaces sampling with a single prescribed fault for edge enumeration and
fault-tolerance tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channel
from .channel import CNOT, CZ, IDLE, MEAS, PREP
from .gkp import GkpParams
from .lattice import Lattice

#: Offsets inside a 62-entry ancilla block.
PREP_OFFSET = 0
GATE_BLOCK = 15
MEAS_OFFSET = 61


def gate_offset(time_step: int, pauli_index: int) -> int:
    """Offset of a gate Pauli entry inside its ancilla block (0-based)."""
    return 1 + GATE_BLOCK * time_step + pauli_index


class PeLayout:
    """Index arithmetic of the flat per-shot probability record."""

    def __init__(self, lattice: Lattice, t: int):
        self.lattice = lattice
        self.t = t
        self.n = lattice.n
        self.m1 = lattice.m1
        self.m2 = lattice.m2
        self.round_block = 3 * self.n + 62 * (self.m1 + self.m2)
        self.size = t * self.round_block

    # 0-based internal helpers -----------------------------------------

    def idle_base(self, j: int, e: int) -> int:
        """First of the (p_X, p_Y, p_Z) entries of data qubit e in round j."""
        return j * self.round_block + 3 * e

    def xanc_base(self, j: int, k: int) -> int:
        return j * self.round_block + 3 * self.n + 62 * k

    def zanc_base(self, j: int, k: int) -> int:
        return j * self.round_block + 3 * self.n + 62 * self.m1 + 62 * k

    def anc_base(self, j: int, kind: str, k: int) -> int:
        return self.xanc_base(j, k) if kind == "x" else self.zanc_base(j, k)

    # 1-based layout functions (documented external convention) --------

    def m1k(self, time_step: int, k: int, j: int) -> int:
        """1-based index just before the gate entries of X-ancilla k.

        ``Pe[m1k + i]`` is the i'th Pauli entry (1..15) of the gate in the
        given time step (1..4) during round j (1..t); k is 1-based.
        """
        return (
            self.round_block * (j - 1)
            + 3 * self.n
            + 62 * (k - 1)
            + 1
            + 15 * (time_step - 1)
        )

    def m2k(self, time_step: int, k: int, j: int) -> int:
        """Same as :meth:`m1k` for Z-ancilla blocks."""
        return (
            self.round_block * (j - 1)
            + 3 * self.n
            + 62 * self.m1
            + 62 * (k - 1)
            + 1
            + 15 * (time_step - 1)
        )

    def nk(self, e: int, j: int) -> int:
        """1-based index just before the idle triple of data qubit e (1-based)."""
        return self.round_block * (j - 1) + 3 * (e - 1)


def flatten_pe(pe: np.ndarray) -> np.ndarray:
    """Flat probability vector of one shot (already stored flat)."""
    pe = np.asarray(pe, dtype=float)
    if pe.ndim != 1:
        raise ValueError("flatten_pe expects a single shot's record")
    return pe


def dump_pe_csv(pe: np.ndarray, path) -> None:
    """Debug dump of the flat record as 1-based ``index,value`` CSV."""
    pe = flatten_pe(pe)
    with open(path, "w") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(pe, start=1):
            fh.write(f"{i},{v:.17g}\n")


@dataclass
class BatchResult:
    """Output of a simulated batch of memory-experiment shots."""

    syndromes: np.ndarray  # (S, t+1, m1+m2) uint8, last layer noiseless
    events: np.ndarray  # (S, t+1, m1+m2) uint8 syndrome differences
    xf: np.ndarray  # (S, n) final data-qubit X frame
    zf: np.ndarray  # (S, n) final data-qubit Z frame
    pe: np.ndarray | None  # (S, t*round_block) conditional record, analog only
    n_faults: np.ndarray  # (S,) count of locations that sampled an error


class FrameSimulator:
    """Batched Pauli-frame simulator for a fixed lattice and round count."""

    def __init__(self, lattice: Lattice, t: int):
        if t < 1:
            raise ValueError("need at least one syndrome round")
        self.lattice = lattice
        self.t = t
        self.layout = PeLayout(lattice, t)
        n, m1, m2 = lattice.n, lattice.m1, lattice.m2
        self.n_anc = m1 + m2
        self.nq = n + self.n_anc

        # static gate tables per time step, split by stabilizer type
        self._xg_anc = [[] for _ in range(4)]  # global ancilla qubit index
        self._xg_data = [[] for _ in range(4)]
        self._xg_base = [[] for _ in range(4)]  # ancilla-block offset of the gate
        self._zg_anc = [[] for _ in range(4)]
        self._zg_data = [[] for _ in range(4)]
        self._zg_base = [[] for _ in range(4)]
        for k, st in enumerate(lattice.x_stabs):
            for step, q in st.gates:
                self._xg_anc[step].append(n + k)
                self._xg_data[step].append(q)
                self._xg_base[step].append(3 * n + 62 * k + gate_offset(step, 0))
        for k, st in enumerate(lattice.z_stabs):
            for step, q in st.gates:
                self._zg_anc[step].append(n + m1 + k)
                self._zg_data[step].append(q)
                self._zg_base[step].append(3 * n + 62 * (m1 + k) + gate_offset(step, 0))
        for step in range(4):
            for tab in (self._xg_anc, self._xg_data, self._xg_base,
                        self._zg_anc, self._zg_data, self._zg_base):
                tab[step] = np.asarray(tab[step], dtype=np.intp)

        self._x_support = lattice.support_matrix("x").astype(np.uint8)
        self._z_support = lattice.support_matrix("z").astype(np.uint8)
        # prep/meas entry columns within a round block, ancilla-ordered
        anc_blocks = 3 * n + 62 * np.arange(self.n_anc)
        self._prep_cols = anc_blocks + PREP_OFFSET
        self._meas_cols = anc_blocks + MEAS_OFFSET
        self._idle_cols = 3 * np.arange(n)

    # ------------------------------------------------------------------

    def run_batch(
        self,
        params: GkpParams,
        rng: np.random.Generator,
        nshots: int,
        analog: bool = True,
        decoder: str = "ml",
    ) -> BatchResult:
        """Simulate ``nshots`` full memory experiments."""
        n = self.lattice.n
        S = nshots
        xf = np.zeros((S, self.nq), dtype=np.uint8)
        zf = np.zeros((S, self.nq), dtype=np.uint8)
        syn = np.zeros((S, self.t + 1, self.n_anc), dtype=np.uint8)
        pe = np.zeros((S, self.layout.size)) if analog else None
        n_faults = np.zeros(S, dtype=np.int64)

        for j in range(self.t):
            self._run_round(params, rng, xf, zf, syn, pe, n_faults, j, analog, decoder)

        syn[:, self.t, : self.lattice.m1] = (zf[:, :n] @ self._x_support.T) & 1
        syn[:, self.t, self.lattice.m1 :] = (xf[:, :n] @ self._z_support.T) & 1
        events = syn.copy()
        events[:, 1:] ^= syn[:, :-1]
        return BatchResult(syn, events, xf[:, :n], zf[:, :n], pe, n_faults)

    def _run_round(self, params, rng, xf, zf, syn, pe, n_faults, j, analog, decoder):
        lat = self.lattice
        n = lat.n
        S = xf.shape[0]
        base = j * self.layout.round_block

        # ancilla reset + |+> preparation
        xf[:, n:] = 0
        zf[:, n:] = 0
        pflip, pcond = channel.prep_flip_batch(params, rng, (S, self.n_anc), analog)
        zf[:, n:] ^= pflip
        n_faults += pflip.sum(axis=1, dtype=np.int64)
        if analog:
            pe[:, base + self._prep_cols] = pcond

        # one idle location per data qubit, square lattice
        ifx, ifz, qx, qz = channel.idle_flip_batch(params, rng, (S, n), lam=1.0, want_cond=analog)
        xf[:, :n] ^= ifx
        zf[:, :n] ^= ifz
        n_faults += (ifx | ifz).sum(axis=1, dtype=np.int64)
        if analog:
            pe[:, base + self._idle_cols] = qx * (1.0 - qz)
            pe[:, base + self._idle_cols + 1] = qx * qz
            pe[:, base + self._idle_cols + 2] = (1.0 - qx) * qz

        # four gate time steps
        for step in range(4):
            for kind, anc, data, gbase in (
                (CNOT, self._xg_anc[step], self._xg_data[step], self._xg_base[step]),
                (CZ, self._zg_anc[step], self._zg_data[step], self._zg_base[step]),
            ):
                if anc.size == 0:
                    continue
                # ideal conjugation first, then the gate's own error
                if kind == CNOT:
                    xf[:, data] ^= xf[:, anc]
                    zf[:, anc] ^= zf[:, data]
                else:
                    zf[:, data] ^= xf[:, anc]
                    zf[:, anc] ^= xf[:, data]
                (e_x1, e_z1, e_x2, e_z2), tab = channel.gate_sample_batch(
                    kind, params, rng, (S, anc.size), decoder, want_cond=analog
                )
                xf[:, anc] ^= e_x1
                zf[:, anc] ^= e_z1
                xf[:, data] ^= e_x2
                zf[:, data] ^= e_z2
                n_faults += (e_x1 | e_z1 | e_x2 | e_z2).sum(axis=1, dtype=np.int64)
                if analog:
                    cols = base + gbase[:, None] + np.arange(15)[None, :]
                    pe[:, cols.reshape(-1)] = tab.reshape(S, -1)

        # X-basis ancilla measurement
        mflip, mcond = channel.meas_flip_batch(params, rng, (S, self.n_anc), analog)
        n_faults += mflip.sum(axis=1, dtype=np.int64)
        syn[:, j] = zf[:, n:] ^ mflip
        if analog:
            pe[:, base + self._meas_cols] = mcond

    # ------------------------------------------------------------------
    # single-fault injection (noiseless circuit + one prescribed error)
    # ------------------------------------------------------------------

    def inject_fault(self, fault: tuple) -> BatchResult:
        """Propagate exactly one fault through the noiseless circuit.

        ``fault`` is one of::

            ("idle", j, e, "X"|"Y"|"Z")
            ("prep", j, "x"|"z", k)            # Z error on the fresh ancilla
            ("meas", j, "x"|"z", k)            # measurement flip
            ("gate", j, "x"|"z", k, step, two_qubit_pauli)

        with j the 0-based round, k the 0-based ancilla index of its type,
        step the 0-based time step, and the two-qubit Pauli written
        control-first (e.g. "ZI", "XY").
        """
        lat = self.lattice
        n, m1 = lat.n, lat.m1
        xf = np.zeros((1, self.nq), dtype=np.uint8)
        zf = np.zeros((1, self.nq), dtype=np.uint8)
        syn = np.zeros((1, self.t + 1, self.n_anc), dtype=np.uint8)

        kind = fault[0]
        fj = fault[1]
        if not (0 <= fj < self.t):
            raise ValueError(f"fault round {fj} outside [0, {self.t})")

        for j in range(self.t):
            xf[:, n:] = 0
            zf[:, n:] = 0
            if kind == "prep" and j == fj:
                anc = n + (fault[3] if fault[2] == "x" else m1 + fault[3])
                zf[0, anc] ^= 1
            if kind == "idle" and j == fj:
                e, pauli = fault[2], fault[3]
                xf[0, e] ^= pauli in ("X", "Y")
                zf[0, e] ^= pauli in ("Z", "Y")
            for step in range(4):
                for gkind, anc, data in (
                    (CNOT, self._xg_anc[step], self._xg_data[step]),
                    (CZ, self._zg_anc[step], self._zg_data[step]),
                ):
                    if anc.size == 0:
                        continue
                    if gkind == CNOT:
                        xf[:, data] ^= xf[:, anc]
                        zf[:, anc] ^= zf[:, data]
                    else:
                        zf[:, data] ^= xf[:, anc]
                        zf[:, anc] ^= xf[:, data]
                if kind == "gate" and j == fj and fault[4] == step:
                    stype, k, pauli2 = fault[2], fault[3], fault[5]
                    anc_q = n + (k if stype == "x" else m1 + k)
                    stab = (lat.x_stabs if stype == "x" else lat.z_stabs)[k]
                    data_q = dict((s, q) for s, q in stab.gates).get(step)
                    if data_q is None:
                        raise ValueError(
                            f"stabilizer {stype}{k} has no gate in step {step}"
                        )
                    p1, p2 = pauli2[0], pauli2[1]
                    xf[0, anc_q] ^= p1 in ("X", "Y")
                    zf[0, anc_q] ^= p1 in ("Z", "Y")
                    xf[0, data_q] ^= p2 in ("X", "Y")
                    zf[0, data_q] ^= p2 in ("Z", "Y")
            syn[:, j] = zf[:, n:]
            if kind == "meas" and j == fj:
                k = fault[3]
                syn[0, j, k if fault[2] == "x" else m1 + k] ^= 1

        syn[:, self.t, :m1] = (zf[:, :n] @ self._x_support.T) & 1
        syn[:, self.t, m1:] = (xf[:, :n] @ self._z_support.T) & 1
        events = syn.copy()
        events[:, 1:] ^= syn[:, :-1]
        return BatchResult(syn, events, xf[:, :n], zf[:, :n], None, np.array([1]))

    def run_round(self, params, rng, xf, zf, pe, j, analog=True, decoder="ml"):
        """Single-round entry point over an explicit frame (batched).

        Returns the measured syndrome bit-vector(s) for round j.
        """
        S = xf.shape[0]
        syn = np.zeros((S, self.t + 1, self.n_anc), dtype=np.uint8)
        n_faults = np.zeros(S, dtype=np.int64)
        self._run_round(params, rng, xf, zf, syn, pe, n_faults, j, analog, decoder)
        return syn[:, j]


def marginal_pe(lattice: Lattice, params: GkpParams, t: int, cache=None) -> np.ndarray:
    """Flat probability record filled with the no-analog marginal tables."""
    layout = PeLayout(lattice, t)
    pe = np.zeros(layout.size)
    prep = channel.marginal_table(PREP, params, cache)[1]
    meas = channel.marginal_table(MEAS, params, cache)[1]
    # data idles are square-lattice regardless of the ancilla aspect ratio
    idle_sq = channel.marginal_table(IDLE, GkpParams(params.sigma_db, 1.0), cache)
    cnot15 = channel.marginal_table(CNOT, params, cache)[1:]
    cz15 = channel.marginal_table(CZ, params, cache)[1:]
    for j in range(t):
        for e in range(lattice.n):
            pe[layout.idle_base(j, e) : layout.idle_base(j, e) + 3] = idle_sq[1:]
        for k, st in enumerate(lattice.x_stabs):
            b = layout.xanc_base(j, k)
            pe[b + PREP_OFFSET] = prep
            pe[b + MEAS_OFFSET] = meas
            for step, _q in st.gates:
                pe[b + gate_offset(step, 0) : b + gate_offset(step, 15)] = cnot15
        for k, st in enumerate(lattice.z_stabs):
            b = layout.zanc_base(j, k)
            pe[b + PREP_OFFSET] = prep
            pe[b + MEAS_OFFSET] = meas
            for step, _q in st.gates:
                pe[b + gate_offset(step, 0) : b + gate_offset(step, 15)] = cz15
    return pe
