"""Rotated surface-code lattice and two-qubit gate schedule.

Data qubits sit on a dx-by-dz grid (row r, column c; index r*dz + c).
Stabilizer plaquettes live on the dual grid: the cell with top-left data
corner (r, c) touches the up-to-four data qubits (r, c), (r, c+1),
(r+1, c), (r+1, c+1).  Cells with even r+c host X-type stabilizers
(columns 0..dz-2, all rows -1..dx-1, so weight-2 X stabilizers cap the top
and bottom edges); cells with odd r+c host Z-type stabilizers (rows
0..dx-2, columns -1..dz-1, weight-2 on the left and right edges).

The logical X operator is a column (weight dx), the logical Z a row
(weight dz).

Gates run in four time steps.  X stabilizers gate their data corners in
the order NW, NE, SW, SE with CNOTs (ancilla = control); Z stabilizers use
CZs in the order NW, SW, NE, SE (ancilla designated control for fault
bookkeeping).  A corner keeps its global time step on weight-2
stabilizers, so boundary ancillas are idle in the remaining steps.  This
interleaving touches every data qubit at most once per step and orients
both hook-error pairs perpendicular to the logical operator they threaten.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Corner visit order per stabilizer type, as (dr, dc) offsets from the
#: cell's top-left data coordinate, indexed by time step 0..3.
_X_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))  # NW, NE, SW, SE
_Z_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))  # NW, SW, NE, SE


@dataclass(frozen=True)
class Stabilizer:
    """One stabilizer: ancilla index, support, and gate schedule."""

    kind: str  # "x" or "z"
    cell: tuple[int, int]  # top-left data coordinate (r, c) of the cell
    support: tuple[int, ...]  # data qubit indices
    gates: tuple[tuple[int, int], ...]  # (time_step 0..3, data qubit index)


@dataclass(frozen=True)
class Lattice:
    """Rotated surface-code lattice of distances (dx, dz)."""

    dx: int
    dz: int
    n: int = field(init=False)
    m1: int = field(init=False)
    m2: int = field(init=False)
    x_stabs: tuple[Stabilizer, ...] = field(init=False)
    z_stabs: tuple[Stabilizer, ...] = field(init=False)

    def __post_init__(self):
        for name, d in (("dx", self.dx), ("dz", self.dz)):
            if d < 3 or d % 2 == 0:
                raise ValueError(f"{name} must be an odd integer >= 3, got {d}")
        object.__setattr__(self, "n", self.dx * self.dz)
        x_stabs, z_stabs = self._build_stabilizers()
        object.__setattr__(self, "x_stabs", x_stabs)
        object.__setattr__(self, "z_stabs", z_stabs)
        object.__setattr__(self, "m1", len(x_stabs))
        object.__setattr__(self, "m2", len(z_stabs))
        assert self.m1 == (self.dx + 1) * (self.dz - 1) // 2
        assert self.m2 == (self.dz + 1) * (self.dx - 1) // 2

    def data_index(self, r: int, c: int) -> int:
        return r * self.dz + c

    def _build_stabilizers(self):
        dx, dz = self.dx, self.dz
        x_cells = [
            (r, c)
            for r in range(-1, dx)
            for c in range(0, dz - 1)
            if (r + c) % 2 == 0
        ]
        z_cells = [
            (r, c)
            for r in range(0, dx - 1)
            for c in range(-1, dz)
            if (r + c) % 2 == 1
        ]
        # layout convention: ancillas sorted top-bottom then left-right
        x_cells.sort()
        z_cells.sort()

        def build(cells, order, kind):
            stabs = []
            for r, c in cells:
                gates = []
                for step, (ddr, ddc) in enumerate(order):
                    rr, cc = r + ddr, c + ddc
                    if 0 <= rr < dx and 0 <= cc < dz:
                        gates.append((step, self.data_index(rr, cc)))
                support = tuple(sorted(q for _, q in gates))
                stabs.append(Stabilizer(kind, (r, c), support, tuple(gates)))
            return tuple(stabs)

        return build(x_cells, _X_ORDER, "x"), build(z_cells, _Z_ORDER, "z")

    # ------------------------------------------------------------------
    # derived structure
    # ------------------------------------------------------------------

    @property
    def num_qubits(self) -> int:
        """Data + ancilla qubit count (2*d^2 - 1 for square patches)."""
        return self.n + self.m1 + self.m2

    def x_logical_support(self, column: int = 0) -> np.ndarray:
        """Data indices of a logical-X column representative."""
        return np.array([self.data_index(r, column) for r in range(self.dx)])

    def z_logical_support(self, row: int = 0) -> np.ndarray:
        """Data indices of a logical-Z row representative."""
        return np.array([self.data_index(row, c) for c in range(self.dz)])

    def support_matrix(self, kind: str) -> np.ndarray:
        """Stabilizer-by-data incidence matrix over GF(2) as uint8."""
        stabs = self.x_stabs if kind == "x" else self.z_stabs
        mat = np.zeros((len(stabs), self.n), dtype=np.uint8)
        for i, st in enumerate(stabs):
            mat[i, list(st.support)] = 1
        return mat

    def validate_schedule(self) -> None:
        """Structural checks: distinct steps per ancilla, no data conflicts."""
        for st in self.x_stabs + self.z_stabs:
            steps = [s for s, _ in st.gates]
            if len(set(steps)) != len(steps):
                raise AssertionError(f"ancilla at {st.cell} repeats a time step")
        for step in range(4):
            touched: set[int] = set()
            for st in self.x_stabs + self.z_stabs:
                for s, q in st.gates:
                    if s == step:
                        if q in touched:
                            raise AssertionError(
                                f"data qubit {q} gated twice in step {step}"
                            )
                        touched.add(q)


def build_lattice(dx: int, dz: int | None = None) -> Lattice:
    """Construct and validate a rotated surface-code lattice."""
    lat = Lattice(dx, dx if dz is None else dz)
    lat.validate_schedule()
    return lat


def reduce_mod_span(vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-reduce a GF(2) generator matrix; return (rref rows, pivot cols)."""
    rows = [r.copy() for r in np.asarray(vectors, dtype=np.uint8)]
    rref: list[np.ndarray] = []
    pivots: list[int] = []
    for r in rows:
        for rr, p in zip(rref, pivots):
            if r[p]:
                r ^= rr
        nz = np.flatnonzero(r)
        if nz.size:
            p = int(nz[0])
            for i, rr in enumerate(rref):
                if rr[p]:
                    rref[i] = rr ^ r
            rref.append(r)
            pivots.append(p)
    if not rref:
        return np.zeros((0, vectors.shape[1]), dtype=np.uint8), np.zeros(0, dtype=int)
    return np.array(rref, dtype=np.uint8), np.array(pivots, dtype=int)


def canonicalize(vector: np.ndarray, rref: np.ndarray, pivots: np.ndarray) -> np.ndarray:
    """Canonical coset representative of ``vector`` modulo the row span."""
    v = vector.copy()
    for row, p in zip(rref, pivots):
        if v[p]:
            v ^= row
    return v
