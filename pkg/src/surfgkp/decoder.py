"""Dynamic edge weighting, MWPM decoding, and logical-failure adjudication.

Per shot, every edge's firing probability is composed from the
probability record: entries of one location are mutually exclusive and
add; across the edge's k locations the total is the leading-order
one-fault term  sum_i p_i prod_{j != i} (1 - p_j).  The edge weight is
-log of the clamped total.

Decoding condenses the matching problem onto the detection events: the
virtual boundary vertex participates in Dijkstra as an ordinary through
node, so the pairwise distance between two events is automatically
min(direct path, boundary route of one + boundary route of the other),
and one dummy node with the plain boundary distance is appended when the
event count is odd.  A perfect matching on that complete graph has the
same optimal value as the textbook formulation with one private virtual
partner per event (pair the boundary-matched events among themselves --
each such pair costs at most its two boundary routes, which the
min-distance already encodes -- and route any leftover to the dummy), so
running the exact blossom matcher on it preserves MWPM exactness; the
enumeration oracle in the tests exercises precisely this equivalence.
Matched pairs are expanded back into graph paths whose edge residuals
XOR into the correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .blossom import min_weight_perfect_matching
from .graphs import DecodingGraph
from .lattice import Lattice

PROB_FLOOR = 1e-15
PROB_CEIL = 1.0 - 1e-15


def assign_weights(graph: DecodingGraph, pe: np.ndarray) -> np.ndarray:
    """Edge weights -log(p_total) from a probability record.

    ``pe`` is either one flat record (length t*round_block) or a batch
    (S, t*round_block); returns weights of shape (E,) or (S, E).
    """
    pe = np.asarray(pe)
    batched = pe.ndim == 2
    raw = pe[..., graph.src_idx]
    raw = np.clip(raw, PROB_FLOOR, PROB_CEIL)
    # per-location sums of mutually exclusive Pauli entries
    loc = np.add.reduceat(raw, graph.src_ptr[:-1], axis=-1)
    loc = np.clip(loc, PROB_FLOOR, PROB_CEIL)
    # leading-order combination across an edge's locations
    keep = np.multiply.reduceat(1.0 - loc, graph.loc_ptr[:-1], axis=-1)
    rate = np.add.reduceat(loc / (1.0 - loc), graph.loc_ptr[:-1], axis=-1)
    p_total = np.clip(keep * rate, PROB_FLOOR, PROB_CEIL)
    w = -np.log(p_total)
    return w if batched else w.reshape(-1)


def extract_events(syndromes: np.ndarray) -> np.ndarray:
    """Detection events as XOR of consecutive syndrome layers.

    ``syndromes`` has shape (..., t+1, m) with the final layer noiseless;
    layer 0 is differenced against the all-zero reference.
    """
    syndromes = np.asarray(syndromes, dtype=np.uint8)
    ev = syndromes.copy()
    ev[..., 1:, :] ^= syndromes[..., :-1, :]
    return ev


@dataclass
class _Sparse:
    """Static CSR skeleton whose data is refreshed with per-shot weights."""

    matrix: csr_matrix
    perm: np.ndarray  # CSR data slot -> edge-group index (mod G for reverse)
    group_edges: dict  # (u, v) -> member edge ids (parallel edges)
    group_ptr: np.ndarray
    order: np.ndarray  # edge ids sorted by group


class Decoder:
    """MWPM decoder bound to one decoding graph."""

    def __init__(self, graph: DecodingGraph):
        self.graph = graph
        u = np.minimum(graph.eu, graph.ev)
        v = np.maximum(graph.eu, graph.ev)
        order = np.lexsort((v, u))
        gu, gv = u[order], v[order]
        boundary = np.flatnonzero((np.diff(gu) != 0) | (np.diff(gv) != 0)) + 1
        group_ptr = np.concatenate(([0], boundary, [len(order)]))
        ug = gu[group_ptr[:-1]]
        vg = gv[group_ptr[:-1]]
        G = len(ug)
        nv = graph.n_vertices
        rows = np.concatenate([ug, vg])
        cols = np.concatenate([vg, ug])
        seed = csr_matrix(
            (np.arange(2 * G, dtype=float), (rows, cols)), shape=(nv, nv)
        )
        perm = seed.data.astype(np.int64) % G
        self._sp = _Sparse(
            matrix=seed,
            perm=perm,
            group_edges={
                (int(a), int(b)): order[group_ptr[i] : group_ptr[i + 1]]
                for i, (a, b) in enumerate(zip(ug, vg))
            },
            group_ptr=group_ptr,
            order=order,
        )

    # ------------------------------------------------------------------

    def _refresh(self, weights: np.ndarray) -> None:
        wg = np.minimum.reduceat(weights[self._sp.order], self._sp.group_ptr[:-1])
        self._sp.matrix.data[:] = wg[self._sp.perm]

    def decode(self, weights: np.ndarray, event_vertices: np.ndarray):
        """Correction (data-qubit flips) for one shot's detection events.

        Returns ``(correction, matched_pairs)`` where correction is a
        uint8 vector over data qubits and matched_pairs lists
        (vertex_or_-1, vertex) index pairs (-1 = boundary).
        """
        g = self.graph
        correction = np.zeros(g.n_data, dtype=np.uint8)
        events = np.asarray(event_vertices, dtype=np.int64)
        k = events.size
        if k == 0:
            return correction, []
        self._refresh(weights)
        virt = g.virtual_vertex
        dist, pred = dijkstra(
            self._sp.matrix,
            directed=True,
            indices=events,
            return_predecessors=True,
        )

        if k == 1:
            self._apply_path(weights, pred[0], virt, correction)
            return correction, [(-1, int(events[0]))]

        D = dist[:, events]
        bd = dist[:, virt]
        if k % 2:
            D = np.pad(D, ((0, 1), (0, 1)))
            D[-1, :-1] = bd
            D[:-1, -1] = bd
        if not np.isfinite(D[np.triu_indices(D.shape[0], 1)]).all():
            raise RuntimeError("decoding graph is disconnected")
        mate = min_weight_perfect_matching(D)

        pairs = []
        for i in range(len(mate)):
            j = int(mate[i])
            if j < i:
                continue
            if j >= k:  # matched with the dummy: boundary route
                self._apply_path(weights, pred[i], virt, correction)
                pairs.append((-1, int(events[i])))
            else:
                self._apply_path(weights, pred[i], int(events[j]), correction)
                pairs.append((int(events[i]), int(events[j])))
        return correction, pairs

    def _apply_path(self, weights, pred_row, target, correction):
        """XOR the residuals of the cheapest-member edges along a path."""
        g = self.graph
        v = target
        while True:
            u = pred_row[v]
            if u < 0:
                break
            members = self._sp.group_edges[(min(u, v), max(u, v))]
            best = members[np.argmin(weights[members])]
            correction ^= g.residual[best]
            v = u

    # ------------------------------------------------------------------

    def all_pairs(self, weights: np.ndarray):
        """Static all-pairs distances/predecessors (no-analog decoding)."""
        self._refresh(weights)
        return dijkstra(self._sp.matrix, directed=True, return_predecessors=True)

    def decode_static(self, weights, dist, pred, event_vertices):
        """Decode with precomputed all-pairs tables (static weights)."""
        g = self.graph
        correction = np.zeros(g.n_data, dtype=np.uint8)
        events = np.asarray(event_vertices, dtype=np.int64)
        k = events.size
        if k == 0:
            return correction, []
        virt = g.virtual_vertex
        if k == 1:
            self._apply_path(weights, pred[events[0]], virt, correction)
            return correction, [(-1, int(events[0]))]
        D = dist[np.ix_(events, events)]
        bd = dist[events, virt]
        if k % 2:
            D = np.pad(D, ((0, 1), (0, 1)))
            D[-1, :-1] = bd
            D[:-1, -1] = bd
        mate = min_weight_perfect_matching(D)
        pairs = []
        for i in range(len(mate)):
            j = int(mate[i])
            if j < i:
                continue
            if j >= k:
                self._apply_path(weights, pred[events[i]], virt, correction)
                pairs.append((-1, int(events[i])))
            else:
                self._apply_path(weights, pred[events[i]], int(events[j]), correction)
                pairs.append((int(events[i]), int(events[j])))
        return correction, pairs


def adjudicate(
    xf: np.ndarray,
    zf: np.ndarray,
    corr_x: np.ndarray,
    corr_z: np.ndarray,
    lattice: Lattice,
) -> tuple[bool, bool]:
    """Logical failure flags of the corrected frame.

    A logical Z failure means the residual Z component is a logical Z
    string (odd overlap with a logical-X column); a logical X failure
    means the residual X component crosses a logical-Z row.
    """
    rx = (np.asarray(xf) ^ corr_x).astype(np.uint8)
    rz = (np.asarray(zf) ^ corr_z).astype(np.uint8)
    logical_x = bool(rx[lattice.z_logical_support()].sum() & 1)
    logical_z = bool(rz[lattice.x_logical_support()].sum() & 1)
    return logical_x, logical_z
