"""Decoding-graph construction by exhaustive single-fault propagation.

Every possible single fault (each nontrivial Pauli at each gate, the flip
at each preparation/measurement, each Pauli at each idle location, in each
round) is propagated through the noiseless circuit.  Its detection events
on the X-stabilizer history form one edge of the Z-error graph, and its
events on the Z-stabilizer history one edge of the X-error graph; faults
with a single event attach to the virtual boundary vertex.  Faults sharing
endpoints and (stabilizer-equivalent) residual data error are grouped into
one edge, keeping their probability-record indices grouped by location so
the weight formula can combine mutually exclusive Paulis by plain sums and
independent locations by the leading-order product rule.

Vertex convention: stabilizer s at difference layer l (0..t) has id
s*(t+1)+l; the virtual boundary vertex has id n_stabs*(t+1).  Edge kinds
follow the usual taxonomy: bulk2d (two events, same layer), vertical (same
stabilizer, adjacent layers), spacetime (different stabilizer and layer),
boundary2d (one event).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import PAULI_ORDER_2Q
from .circuit import MEAS_OFFSET, PREP_OFFSET, FrameSimulator, PeLayout, gate_offset
from .lattice import Lattice, build_lattice, canonicalize, reduce_mod_span

BULK2D = "bulk2d"
BOUNDARY2D = "boundary2d"
VERTICAL = "vertical"
SPACETIME = "spacetime"

_IDLE_OFFSET = {"X": 0, "Y": 1, "Z": 2}
_PAULI_INDEX = {p: i for i, p in enumerate(PAULI_ORDER_2Q)}


@dataclass
class DecodingGraph:
    """Typed-edge decoding graph for one error type ("z" or "x" errors)."""

    error_type: str
    n_stabs: int
    t: int
    n_data: int
    eu: np.ndarray  # (E,) vertex ids
    ev: np.ndarray  # (E,) vertex ids; boundary edges point at the virtual id
    kind: list  # (E,) edge kind strings
    residual: np.ndarray  # (E, n_data) uint8 data error applied by the edge
    loc_ptr: np.ndarray  # (E+1,) edge -> location-group slice
    src_ptr: np.ndarray  # (L+1,) location group -> flat pe-index slice
    src_idx: np.ndarray  # (K,) indices into the flat probability record

    @property
    def n_vertices(self) -> int:
        return self.n_stabs * (self.t + 1) + 1

    @property
    def virtual_vertex(self) -> int:
        return self.n_stabs * (self.t + 1)

    @property
    def n_edges(self) -> int:
        return len(self.eu)

    def vertex(self, stab: int, layer: int) -> int:
        return stab * (self.t + 1) + layer

    def edge_location_sources(self, e: int) -> list[np.ndarray]:
        """Per-location lists of probability-record indices of edge e."""
        out = []
        for li in range(self.loc_ptr[e], self.loc_ptr[e + 1]):
            out.append(self.src_idx[self.src_ptr[li] : self.src_ptr[li + 1]])
        return out

    def to_json_dict(self, weights=None) -> dict:
        """Dump vertices/edges (and optional weights) for debugging."""
        edges = []
        for e in range(self.n_edges):
            rec = {
                "u": int(self.eu[e]),
                "v": int(self.ev[e]),
                "kind": self.kind[e],
                "residual": np.flatnonzero(self.residual[e]).tolist(),
                "sources": [idx.tolist() for idx in self.edge_location_sources(e)],
            }
            if weights is not None:
                rec["weight"] = float(weights[e])
            edges.append(rec)
        return {
            "error_type": self.error_type,
            "n_stabs": self.n_stabs,
            "rounds": self.t,
            "virtual_vertex": int(self.virtual_vertex),
            "edges": edges,
        }


def _iter_faults(lattice: Lattice, layout: PeLayout, t: int):
    """Yield (fault tuple, location key, pe index) for every single fault."""
    for j in range(t):
        for e in range(lattice.n):
            for pauli, off in _IDLE_OFFSET.items():
                yield ("idle", j, e, pauli), ("idle", j, e), layout.idle_base(j, e) + off
        for kind, stabs in (("x", lattice.x_stabs), ("z", lattice.z_stabs)):
            for k, st in enumerate(stabs):
                base = layout.anc_base(j, kind, k)
                yield ("prep", j, kind, k), ("prep", j, kind, k), base + PREP_OFFSET
                yield ("meas", j, kind, k), ("meas", j, kind, k), base + MEAS_OFFSET
                for step, _q in st.gates:
                    for pauli in PAULI_ORDER_2Q:
                        yield (
                            ("gate", j, kind, k, step, pauli),
                            ("gate", j, kind, k, step),
                            base + gate_offset(step, _PAULI_INDEX[pauli]),
                        )


def enumerate_edges(lattice: Lattice, t: int) -> tuple[DecodingGraph, DecodingGraph]:
    """Build the Z-error and X-error decoding graphs for t noisy rounds."""
    sim = FrameSimulator(lattice, t)
    layout = sim.layout
    m1 = lattice.m1

    z_rref, z_piv = reduce_mod_span(lattice.support_matrix("z"))
    x_rref, x_piv = reduce_mod_span(lattice.support_matrix("x"))

    # edge key -> {location key -> [pe indices]}
    groups = ({}, {})  # index 0: z-error graph (X stabs), 1: x-error graph
    for fault, loc_key, pe_idx in _iter_faults(lattice, layout, t):
        res = sim.inject_fault(fault)
        ev = res.events[0]  # (t+1, m1+m2)
        for gi, (stab_slice, residual, rref, piv, nstab) in enumerate(
            (
                (np.s_[:m1], res.zf[0], z_rref, z_piv, m1),
                (np.s_[m1:], res.xf[0], x_rref, x_piv, lattice.m2),
            )
        ):
            layers, stabs = np.nonzero(ev[:, stab_slice])
            canon = canonicalize(residual, rref, piv)
            if layers.size == 0:
                if canon.any():
                    raise AssertionError(
                        f"fault {fault} leaves an undetected data error"
                    )
                continue
            if layers.size > 2:
                raise AssertionError(
                    f"fault {fault} produces {layers.size} detection events; "
                    "schedule or propagation bug"
                )
            verts = sorted(int(s) * (t + 1) + int(l) for l, s in zip(layers, stabs))
            if len(verts) == 1:
                verts.append(nstab * (t + 1))  # virtual boundary vertex
            key = (verts[0], verts[1], canon.tobytes())
            groups[gi].setdefault(key, {}).setdefault(loc_key, []).append(pe_idx)

    out = []
    for gi, error_type, nstab in ((0, "z", m1), (1, "x", lattice.m2)):
        eu, ev_, kinds, residuals = [], [], [], []
        loc_ptr = [0]
        src_ptr = [0]
        src_idx = []
        virtual = nstab * (t + 1)
        for (u, v, res_bytes), locs in sorted(groups[gi].items()):
            eu.append(u)
            ev_.append(v)
            residuals.append(np.frombuffer(res_bytes, dtype=np.uint8))
            if v == virtual:
                kinds.append(BOUNDARY2D)
            else:
                su, lu = divmod(u, t + 1)
                sv, lv = divmod(v, t + 1)
                if su == sv:
                    assert abs(lu - lv) == 1, "vertical edge spans >1 layer"
                    kinds.append(VERTICAL)
                elif lu == lv:
                    kinds.append(BULK2D)
                else:
                    kinds.append(SPACETIME)
            for loc_key in sorted(locs):
                src_idx.extend(locs[loc_key])
                src_ptr.append(len(src_idx))
            loc_ptr.append(len(src_ptr) - 1)
        out.append(
            DecodingGraph(
                error_type=error_type,
                n_stabs=nstab,
                t=t,
                n_data=lattice.n,
                eu=np.asarray(eu, dtype=np.int64),
                ev=np.asarray(ev_, dtype=np.int64),
                kind=kinds,
                residual=np.asarray(residuals, dtype=np.uint8).reshape(len(eu), lattice.n),
                loc_ptr=np.asarray(loc_ptr, dtype=np.int64),
                src_ptr=np.asarray(src_ptr, dtype=np.int64),
                src_idx=np.asarray(src_idx, dtype=np.int64),
            )
        )
    return out[0], out[1]


@lru_cache(maxsize=8)
def cached_graphs(dx: int, dz: int, t: int) -> tuple[DecodingGraph, DecodingGraph]:
    """Memoized graph construction keyed by (dx, dz, t)."""
    return enumerate_edges(build_lattice(dx, dz), t)
