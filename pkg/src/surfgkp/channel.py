"""Per-location noise channels of the surface-GKP circuit.

Five location kinds are simulated: ``prep`` (|+> ancilla preparation),
``meas`` (X-basis ancilla measurement), ``idle`` (data-qubit wait), and the
error-corrected two-qubit gates ``cnot`` and ``cz``.  Each sampler draws
the underlying Gaussian shifts, decodes them into a sampled Pauli error,
and produces the probability table the decoder will believe:

- analog mode: the conditional table given the observed residual shifts
  (translate sums truncated to {0} even / {-1,+1} odd, and the 2D analogs
  {(0,0)}, {(+-1,0)}, {(0,+-1)}, {(+-1,+-1)});
- no-analog mode: the marginal table, computed once per (kind, lam,
  sigma_db) by closed-form erf expressions (1D kinds) or adaptive
  quadrature of the correlated Gaussian over the truncated Voronoi
  translate cells (gate kinds), and cached on disk.

The scalar ``sim_*`` functions implement the per-location contract; the
``*_batch`` functions are the vectorized forms the circuit simulator uses.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import ndtr

from .gkp import ROOT_PI, GkpParams, flip_prob_conditional, flip_prob_marginal
from . import mldecode
from .mldecode import PP, PQ, QP, QQ

PREP = "prep"
MEAS = "meas"
IDLE = "idle"
CNOT = "cnot"
CZ = "cz"
KINDS = (PREP, MEAS, IDLE, CNOT, CZ)

#: Fixed storage order of the 15 nontrivial two-qubit Paulis in probability
#: records (first qubit = the gate's control / rectangular-lattice qubit).
PAULI_ORDER_2Q = (
    "IX", "IZ", "IY",
    "XI", "XX", "XZ", "XY",
    "ZI", "ZX", "ZZ", "ZY",
    "YI", "YX", "YZ", "YY",
)

_XZ_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


def _class_index_tables(kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Index maps from the 15 stored Paulis into the two 4-entry class rows.

    For a CNOT the first factor is the qq-sector class (X on qubit 1 /
    X on qubit 2) and the second the pp-sector class (Z1/Z2); for a CZ the
    qp sector carries (X1, Z2) and the pq sector (Z1, X2).  Class rows are
    ordered [(even,even), (odd,even), (even,odd), (odd,odd)].
    """
    ia = np.empty(15, dtype=np.intp)
    ib = np.empty(15, dtype=np.intp)
    for k, label in enumerate(PAULI_ORDER_2Q):
        x1, z1 = _XZ_BITS[label[0]]
        x2, z2 = _XZ_BITS[label[1]]
        if kind == CNOT:
            ia[k] = x1 + 2 * x2
            ib[k] = z1 + 2 * z2
        elif kind == CZ:
            ia[k] = x1 + 2 * z2
            ib[k] = z1 + 2 * x2
        else:
            raise ValueError(kind)
    return ia, ib


_IA_CNOT, _IB_CNOT = _class_index_tables(CNOT)
_IA_CZ, _IB_CZ = _class_index_tables(CZ)

#: Truncated translate classes for the 2D conditional sums, as (n1, n2)
#: offsets grouped by parity class (even,even), (odd,even), (even,odd),
#: (odd,odd).
_TRANSLATE_CLASSES = (
    ((0, 0),),
    ((1, 0), (-1, 0)),
    ((0, 1), (0, -1)),
    ((1, 1), (1, -1), (-1, 1), (-1, -1)),
)


@dataclass
class LocationOutcome:
    """Sampled Pauli error and belief table for one circuit location.

    ``probs`` holds 2 entries (no-flip, flip) for prep/meas, 4 entries
    (I, X, Y, Z) for idle, and 16 entries (II followed by
    :data:`PAULI_ORDER_2Q`) for the gates; entries sum to 1.  ``analog``
    records whether the table is conditional on the sampled residuals.
    The sampled error is drawn from the actual shifts, never from
    ``probs`` -- the table is the decoder's belief, not the sampler.
    """

    location_kind: str
    sampled_error: str
    probs: np.ndarray
    analog: bool


# ---------------------------------------------------------------------------
# 1D kinds: prep / meas / idle
# ---------------------------------------------------------------------------


def _flip_1d_batch(sigma_eff: float, spacing: float, rng, size, want_cond: bool = True):
    """Sample 1D shifts; return (odd-parity flags, conditional flip probs)."""
    xi = rng.normal(0.0, sigma_eff, size=size)
    n = np.floor(xi / spacing + 0.5)
    cond = None
    if want_cond:
        cond = flip_prob_conditional(xi - n * spacing, sigma_eff, spacing)
    return (n.astype(np.int64) & 1).astype(np.uint8), cond


def prep_flip_batch(params: GkpParams, rng, size, want_cond: bool = True):
    """Z-flip flags and conditional probabilities for |+> preparation.

    The prepared mode carries a momentum shift of variance 2 sigma^2
    (initial squeezing plus the teleportation EC round); spacing is
    sqrt(pi)/lam.
    """
    sig = math.sqrt(2.0) * params.sigma
    return _flip_1d_batch(sig, ROOT_PI / params.lam, rng, size, want_cond)


def meas_flip_batch(params: GkpParams, rng, size, want_cond: bool = True):
    """Measurement-flip flags and conditional probabilities (variance sigma^2)."""
    return _flip_1d_batch(params.sigma, ROOT_PI / params.lam, rng, size, want_cond)


def idle_flip_batch(params: GkpParams, rng, size, lam: float | None = None, want_cond: bool = True):
    """X/Z flip flags and conditional (qX, qZ) for idling locations.

    Both quadratures carry variance 2 sigma^2; the position spacing is
    sqrt(pi)*lam and the momentum spacing sqrt(pi)/lam.
    """
    lam = params.lam if lam is None else lam
    sig = math.sqrt(2.0) * params.sigma
    fx, qx = _flip_1d_batch(sig, ROOT_PI * lam, rng, size, want_cond)
    fz, qz = _flip_1d_batch(sig, ROOT_PI / lam, rng, size, want_cond)
    return fx, fz, qx, qz


def idle_table(qx, qz) -> np.ndarray:
    """4-entry (I, X, Y, Z) table as the outer product of the two flips."""
    qx = np.asarray(qx, dtype=float)
    qz = np.asarray(qz, dtype=float)
    return np.stack(
        [(1 - qx) * (1 - qz), qx * (1 - qz), qx * qz, (1 - qx) * qz], axis=-1
    )


# ---------------------------------------------------------------------------
# two-qubit gates
# ---------------------------------------------------------------------------


def gate_shift_batch(kind: str, params: GkpParams, rng, size):
    """Compose the four net shifts of an error-corrected CNOT or CZ.

    Eight i.i.d. N(0, sigma^2) draws enter the published combinations; the
    control (first) qubit has aspect ratio lam, the target is square.
    Returns (xi_q1, xi_q2, xi_p1, xi_p2).
    """
    lam = params.lam
    shape = (size,) if np.isscalar(size) else tuple(size)
    xs = rng.normal(0.0, params.sigma, size=(8,) + shape)
    if kind == CNOT:
        xi_q1 = xs[0] + xs[1]
        xi_q2 = xs[0] / lam + xs[2] + xs[3]
        xi_p1 = -xs[4] / lam + xs[5] + xs[6]
        xi_p2 = xs[4] + xs[7]
    elif kind == CZ:
        xi_q1 = xs[0] + xs[1]
        xi_q2 = xs[4] + xs[5]
        xi_p1 = xs[4] / lam + xs[6] + xs[7]
        xi_p2 = xs[0] / lam + xs[2] + xs[3]
    else:
        raise ValueError(f"unknown gate kind {kind!r}")
    return xi_q1, xi_q2, xi_p1, xi_p2


def _sector_pairs(kind: str):
    """The two correlated sectors of a gate and their index tables."""
    if kind == CNOT:
        return (QQ, PP), _IA_CNOT, _IB_CNOT
    if kind == CZ:
        return (QP, PQ), _IA_CZ, _IB_CZ
    raise ValueError(f"unknown gate kind {kind!r}")


def _conditional_classes(sector: str, lam: float, sigma: float, r1, r2) -> np.ndarray:
    """Class weights [(e,e),(o,e),(e,o),(o,o)] given decoded residuals.

    Normalized truncated sums of the sector density over the translate
    classes; the common Gaussian prefactor cancels.
    """
    s1, s2 = mldecode.sector_spacings(sector, lam)
    norm = 2.0 * (4.0 + 1.0 / lam**2) * sigma**2
    out = np.empty((4,) + np.shape(r1))
    for i, offsets in enumerate(_TRANSLATE_CLASSES):
        acc = 0.0
        for n1, n2 in offsets:
            acc = acc + np.exp(
                -mldecode.quad_form(sector, lam, r1 + n1 * s1, r2 + n2 * s2) / norm
            )
        out[i] = acc
    return out / out.sum(axis=0)


def gate_sample_batch(
    kind: str, params: GkpParams, rng, size, decoder: str = "ml", want_cond: bool = True
):
    """Sample a batch of gate locations.

    Returns ``(err_bits, table15)`` where ``err_bits`` is the tuple
    (x1, z1, x2, z2) of uint8 arrays (the sampled Pauli components on the
    control and target) and ``table15`` the conditional probabilities with
    a trailing axis of 15 in :data:`PAULI_ORDER_2Q` order (``None`` when
    ``want_cond`` is false).
    """
    lam = params.lam
    (sec_a, sec_b), ia, ib = _sector_pairs(kind)
    xi_q1, xi_q2, xi_p1, xi_p2 = gate_shift_batch(kind, params, rng, size)
    if kind == CNOT:
        a_pair = (xi_q1, xi_q2)
        b_pair = (xi_p1, xi_p2)
    else:
        a_pair = (xi_q1, xi_p2)
        b_pair = (xi_p1, xi_q2)

    decode = mldecode.decode_ml if decoder == "ml" else _decode_closest_pair
    na1, na2 = decode(sec_a, lam, *a_pair)
    nb1, nb2 = decode(sec_b, lam, *b_pair)

    table15 = None
    if want_cond:
        sa1, sa2 = mldecode.sector_spacings(sec_a, lam)
        sb1, sb2 = mldecode.sector_spacings(sec_b, lam)
        A = _conditional_classes(
            sec_a, lam, params.sigma, a_pair[0] - na1 * sa1, a_pair[1] - na2 * sa2
        )
        B = _conditional_classes(
            sec_b, lam, params.sigma, b_pair[0] - nb1 * sb1, b_pair[1] - nb2 * sb2
        )
        table15 = np.moveaxis(A[ia] * B[ib], 0, -1)

    pa1 = (na1 & 1).astype(np.uint8)
    pa2 = (na2 & 1).astype(np.uint8)
    pb1 = (nb1 & 1).astype(np.uint8)
    pb2 = (nb2 & 1).astype(np.uint8)
    if kind == CNOT:
        x1, x2, z1, z2 = pa1, pa2, pb1, pb2
    else:
        x1, z2, z1, x2 = pa1, pa2, pb1, pb2
    return (x1, z1, x2, z2), table15


def _decode_closest_pair(sector, lam, x1, x2):
    return mldecode.decode_closest(sector, lam, x1, x2)


# ---------------------------------------------------------------------------
# marginal (no-analog) tables
# ---------------------------------------------------------------------------


def _cell_constraints(sector: str, lam: float):
    """Half-plane constraints |v - alpha*u| < beta of the centered cell."""
    c = 2.0 * lam**2 + 1.0
    if sector in (QQ, QP):
        alphas = np.array([2.0 * lam + 1.0 / lam, 1.0 / (2.0 * lam), -2.0 * lam])
        betas = np.array([0.5 * c * ROOT_PI, 0.5 * ROOT_PI, 0.5 * c * ROOT_PI])
    elif sector == PP:
        alphas = np.array([-2.0 * lam, -lam / c, 1.0 / (2.0 * lam)])
        betas = np.array([ROOT_PI, 0.5 * ROOT_PI, c / (4.0 * lam**2) * ROOT_PI])
    elif sector == PQ:
        alphas = np.array([2.0 * lam, lam / c, -1.0 / (2.0 * lam)])
        betas = np.array([ROOT_PI, 0.5 * ROOT_PI, c / (4.0 * lam**2) * ROOT_PI])
    else:
        raise ValueError(sector)
    return alphas, betas


def _cell_integral(sector: str, lam: float, sigma: float, n1: int, n2: int) -> float:
    """Integral of the sector density over the translated Voronoi cell.

    The inner x2 integral of the bivariate Gaussian over the slab
    intersection is closed-form via the conditional normal; the outer x1
    integral uses adaptive quadrature over the cell's exact u-extent.
    """
    alphas, betas = _cell_constraints(sector, lam)
    s1, s2 = mldecode.sector_spacings(sector, lam)
    d1, d2 = n1 * s1, n2 * s2
    V = mldecode.sector_covariance(sector, lam, sigma)
    sd1 = math.sqrt(V[0, 0])
    slope = V[0, 1] / V[0, 0]
    sd_c = math.sqrt(V[1, 1] - V[0, 1] ** 2 / V[0, 0])

    def gap(u):
        return np.min(alphas * u + betas) - np.max(alphas * u - betas)

    # cell u-extent: gap() is concave piecewise linear, positive at 0
    hi = ROOT_PI
    while gap(hi) > 0:
        hi *= 2.0
    umax = brentq(gap, 0.0, hi, xtol=1e-14)
    lo = -ROOT_PI
    while gap(lo) > 0:
        lo *= 2.0
    umin = brentq(gap, lo, 0.0, xtol=1e-14)

    def integrand(u):
        vlo = np.max(alphas * u - betas)
        vhi = np.min(alphas * u + betas)
        if vhi <= vlo:
            return 0.0
        x1 = u + d1
        mu = slope * x1
        phi1 = math.exp(-0.5 * (x1 / sd1) ** 2) / (sd1 * math.sqrt(2.0 * math.pi))
        return phi1 * (ndtr((vhi + d2 - mu) / sd_c) - ndtr((vlo + d2 - mu) / sd_c))

    val, _err = quad(integrand, umin, umax, epsabs=1e-14, epsrel=1e-11, limit=200)
    return val


def marginal_gate_classes(sector: str, lam: float, sigma: float) -> np.ndarray:
    """Marginal class probabilities [(e,e),(o,e),(e,o),(o,o)] of one sector.

    Truncated to the same translate sets as the conditional sums; the
    (even, even) entry is set to the complement so the row sums to 1.
    """
    q10 = 2.0 * _cell_integral(sector, lam, sigma, 1, 0)
    q01 = 2.0 * _cell_integral(sector, lam, sigma, 0, 1)
    q11 = 2.0 * (
        _cell_integral(sector, lam, sigma, 1, 1)
        + _cell_integral(sector, lam, sigma, 1, -1)
    )
    return np.array([1.0 - q10 - q01 - q11, q10, q01, q11])


def _marginal_table(kind: str, params: GkpParams) -> np.ndarray:
    lam = params.lam
    if kind == PREP:
        p = flip_prob_marginal(math.sqrt(2.0) * params.sigma, ROOT_PI / lam)
        return np.array([1.0 - p, p])
    if kind == MEAS:
        p = flip_prob_marginal(params.sigma, ROOT_PI / lam)
        return np.array([1.0 - p, p])
    if kind == IDLE:
        sig = math.sqrt(2.0) * params.sigma
        qx = flip_prob_marginal(sig, ROOT_PI * lam)
        qz = flip_prob_marginal(sig, ROOT_PI / lam)
        return idle_table(qx, qz)
    if kind in (CNOT, CZ):
        (sec_a, sec_b), ia, ib = _sector_pairs(kind)
        A = marginal_gate_classes(sec_a, lam, params.sigma)
        B = marginal_gate_classes(sec_b, lam, params.sigma)
        table15 = A[ia] * B[ib]
        return np.concatenate([[A[0] * B[0]], table15])
    raise ValueError(f"unknown location kind {kind!r}")


_CACHE_VERSION = 1


class MarginalCache:
    """Disk-backed store of the no-analog probability tables.

    Keys are (kind, lam, sigma_db, method, version); the JSON file is
    regenerated entry-by-entry on any key mismatch.  Construction is
    read-mostly: once a table is computed it is immutable.
    """

    def __init__(self, path: str | os.PathLike | None = None):
        if path is None:
            root = os.environ.get(
                "SURFGKP_CACHE_DIR", os.path.join(os.path.expanduser("~"), ".cache", "surfgkp")
            )
            path = os.path.join(root, "marginals.json")
        self.path = Path(path)
        self._mem: dict[tuple, np.ndarray] = {}
        self._disk: dict[str, list] = {}
        if self.path.exists():
            try:
                payload = json.loads(self.path.read_text())
                if payload.get("version") == _CACHE_VERSION:
                    self._disk = payload.get("tables", {})
            except (json.JSONDecodeError, OSError):
                self._disk = {}

    @staticmethod
    def _key(kind: str, lam: float, sigma_db: float) -> str:
        return json.dumps([kind, round(float(lam), 12), round(float(sigma_db), 12), "quadrature"])

    def table(self, kind: str, params: GkpParams) -> np.ndarray:
        key = self._key(kind, params.lam, params.sigma_db)
        mem_key = (key,)
        if mem_key not in self._mem:
            if key in self._disk:
                self._mem[mem_key] = np.asarray(self._disk[key], dtype=float)
            else:
                tab = _marginal_table(kind, params)
                self._mem[mem_key] = tab
                self._disk[key] = [float(x) for x in tab]
                self._flush()
        return self._mem[mem_key]

    def _flush(self) -> None:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            tmp = self.path.with_suffix(".tmp")
            tmp.write_text(json.dumps({"version": _CACHE_VERSION, "tables": self._disk}))
            tmp.replace(self.path)
        except OSError:
            pass  # cache is an optimization; never fail the computation


_default_cache: MarginalCache | None = None


def marginal_table(kind: str, params: GkpParams, cache: MarginalCache | None = None) -> np.ndarray:
    """No-analog probability table for a location kind (cached)."""
    global _default_cache
    if cache is None:
        if _default_cache is None:
            _default_cache = MarginalCache()
        cache = _default_cache
    return cache.table(kind, params)


# ---------------------------------------------------------------------------
# scalar location contract
# ---------------------------------------------------------------------------


def _scalar_flip_outcome(kind, params, rng, analog, sigma_eff):
    spacing = ROOT_PI / params.lam
    flips, cond = _flip_1d_batch(sigma_eff, spacing, rng, 1)
    if analog:
        probs = np.array([1.0 - cond[0], cond[0]])
    else:
        probs = marginal_table(kind, params)
    err = "Z" if flips[0] else "I"
    return LocationOutcome(kind, err, probs, analog)


def sim_prep_plus(params: GkpParams, rng, analog: bool = True) -> LocationOutcome:
    """Simulate one |+> preparation; Z error when the shift decodes odd."""
    return _scalar_flip_outcome(PREP, params, rng, analog, math.sqrt(2.0) * params.sigma)


def sim_meas_x(params: GkpParams, rng, analog: bool = True) -> LocationOutcome:
    """Simulate one X-basis measurement; Z error = outcome flip."""
    return _scalar_flip_outcome(MEAS, params, rng, analog, params.sigma)


def sim_idle(params: GkpParams, rng, analog: bool = True) -> LocationOutcome:
    """Simulate one idle location (I/X/Y/Z on the idling qubit)."""
    fx, fz, qx, qz = idle_flip_batch(params, rng, 1)
    if analog:
        probs = idle_table(qx[0], qz[0])
    else:
        probs = marginal_table(IDLE, params)
    err = _pauli_from_bits(int(fx[0]), int(fz[0]))
    return LocationOutcome(IDLE, err, probs, analog)


def _pauli_from_bits(x: int, z: int) -> str:
    return {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(x, z)]


def sim_gate(kind: str, params: GkpParams, rng, analog: bool = True, decoder: str = "ml") -> LocationOutcome:
    """Simulate one error-corrected CNOT or CZ location."""
    (x1, z1, x2, z2), table15 = gate_sample_batch(kind, params, rng, 1, decoder)
    if analog:
        probs = np.concatenate([[1.0 - table15[0].sum()], table15[0]])
    else:
        probs = marginal_table(kind, params)
    err = _pauli_from_bits(int(x1[0]), int(z1[0])) + _pauli_from_bits(int(x2[0]), int(z2[0]))
    return LocationOutcome(kind, err, probs, analog)


def sim_cnot(params: GkpParams, rng, analog: bool = True, decoder: str = "ml") -> LocationOutcome:
    return sim_gate(CNOT, params, rng, analog, decoder)


def sim_cz(params: GkpParams, rng, analog: bool = True, decoder: str = "ml") -> LocationOutcome:
    return sim_gate(CZ, params, rng, analog, decoder)
