"""Joint shift decoding for error-corrected two-GKP-qubit gates.

After an error-corrected CNOT or CZ gate, the two homodyne records of one
quadrature type form a correlated Gaussian pair.  Four sectors cover the
cases (first index = rectangular-lattice qubit with aspect ratio lam,
second = square-lattice qubit):

======  =====================  ===================  ======================
sector  correlated pair        spacings (s1, s2)    quadratic form f(x1,x2)
======  =====================  ===================  ======================
qq      CNOT (xi_q1, xi_q2)    (rt(pi)*lam, rt(pi)) (2+1/L^2)x1^2+2x2^2-(2/L)x1x2
pp      CNOT (xi_p1, xi_p2)    (rt(pi)/lam, rt(pi)) 2x1^2+(2+1/L^2)x2^2+(2/L)x1x2
qp      CZ   (xi_q1, xi_p2)    (rt(pi)*lam, rt(pi)) same as qq
pq      CZ   (xi_p1, xi_q2)    (rt(pi)/lam, rt(pi)) 2x1^2+(2+1/L^2)x2^2-(2/L)x1x2
======  =====================  ===================  ======================

Maximum-likelihood decoding minimizes f over the integer translates
(x1 - n1*s1, x2 - n2*s2); the minimizing cell is found branch-for-branch
with the closed-form Voronoi-wall tests (no search).  ``decode_closest``
rounds each coordinate independently.  ``brute_force_oracle`` exhaustively
minimizes f over a window and is the test reference for both.

All decode functions are vectorized: scalars in, scalars out; arrays in,
arrays out.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .gkp import ROOT_PI, closest_integer

QQ = "qq"
PP = "pp"
QP = "qp"
PQ = "pq"
SECTORS = (QQ, PP, QP, PQ)


class DecodedIntegers(NamedTuple):
    n1: int
    n2: int


class JointShift(NamedTuple):
    """A correlated shift pair with its sector tag.

    Decode with ``decode_ml(shift.sector, lam, shift.x1, shift.x2)``.
    """

    x1: float
    x2: float
    sector: str


def sector_spacings(sector: str, lam: float) -> tuple[float, float]:
    """Lattice spacings (s1, s2) of the correlated pair."""
    if sector in (QQ, QP):
        return ROOT_PI * lam, ROOT_PI
    if sector in (PP, PQ):
        return ROOT_PI / lam, ROOT_PI
    raise ValueError(f"unknown sector {sector!r}")


def sector_covariance(sector: str, lam: float, sigma: float) -> np.ndarray:
    """2x2 covariance matrix of the correlated shift pair."""
    s2 = sigma**2
    a, b = 2.0, 2.0 + 1.0 / lam**2
    c = 1.0 / lam
    if sector in (QQ, QP):
        return s2 * np.array([[a, c], [c, b]])
    if sector == PP:
        return s2 * np.array([[b, -c], [-c, a]])
    if sector == PQ:
        return s2 * np.array([[b, c], [c, a]])
    raise ValueError(f"unknown sector {sector!r}")


def quad_form(sector: str, lam: float, x1, x2):
    """Sector quadratic form f(x1, x2) (the ML objective, unnormalized)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    il2 = 1.0 / lam**2
    if sector in (QQ, QP):
        return (2.0 + il2) * x1**2 + 2.0 * x2**2 - (2.0 / lam) * x1 * x2
    if sector == PP:
        return 2.0 * x1**2 + (2.0 + il2) * x2**2 + (2.0 / lam) * x1 * x2
    if sector == PQ:
        return 2.0 * x1**2 + (2.0 + il2) * x2**2 - (2.0 / lam) * x1 * x2
    raise ValueError(f"unknown sector {sector!r}")


def density(sector: str, lam: float, sigma: float, x1, x2):
    """Bivariate Gaussian density of the sector's shift pair.

    Equals exp(-f/(2(4+1/lam^2)sigma^2)) / (2 pi sqrt(det V)) with
    det V = (4 + 1/lam^2) sigma^4.
    """
    det = (4.0 + 1.0 / lam**2) * sigma**4
    f = quad_form(sector, lam, x1, x2)
    return np.exp(-f / (2.0 * (4.0 + 1.0 / lam**2) * sigma**2)) / (2.0 * np.pi * np.sqrt(det))


def decode_closest(sector: str, lam: float, x1, x2):
    """Independent per-coordinate rounding with the sector spacings."""
    s1, s2 = sector_spacings(sector, lam)
    return closest_integer(x1, s1), closest_integer(x2, s2)


def _decode_qq(x1, x2, lam):
    """Voronoi-cell membership for the qq form, branch-for-branch.

    Strict/non-strict inequality orientation on the walls follows the
    published branch order, so wall behavior is deterministic.
    """
    s1 = ROOT_PI * lam
    n1 = np.floor(x1 / s1 + 0.5)
    n2 = np.floor(x2 / ROOT_PI + 0.5)
    r1 = x1 - n1 * s1
    r2 = x2 - n2 * ROOT_PI

    half = 0.5 * ROOT_PI
    big = 0.5 * (2.0 * lam**2 + 1.0) * ROOT_PI
    v1 = r1 / (2.0 * lam) - half
    v3 = r1 / (2.0 * lam) + half
    v4 = (2.0 * lam + 1.0 / lam) * r1 - big
    v5 = (2.0 * lam + 1.0 / lam) * r1 + big
    v6 = -2.0 * lam * (r1 + s1) + big
    v7 = -2.0 * lam * (r1 - s1) - big

    main = (v1 < r2) & (r2 < v3)
    upper = ~main & (r2 >= v3)
    lower = ~main & ~upper

    d1 = np.zeros_like(n1)
    d2 = np.zeros_like(n2)
    # main band: slide along n1 when outside the slanted walls
    d1 = np.where(main & (r2 >= v5), -1.0, d1)
    d1 = np.where(main & ~(v4 < r2) & ~(r2 >= v5), 1.0, d1)
    # above the band: either n2+1 or n1-1
    d2 = np.where(upper & (r2 > v6), 1.0, d2)
    d1 = np.where(upper & ~(r2 > v6), -1.0, d1)
    # below the band: either n1+1 or n2-1
    d1 = np.where(lower & (r2 > v7), 1.0, d1)
    d2 = np.where(lower & ~(r2 > v7), -1.0, d2)
    return n1 + d1, n2 + d2


def _decode_pp(x1, x2, lam):
    """Voronoi-cell membership for the pp form."""
    s1 = ROOT_PI / lam
    n1 = np.floor(x1 / s1 + 0.5)
    n2 = np.floor(x2 / ROOT_PI + 0.5)
    r1 = x1 - n1 * s1
    r2 = x2 - n2 * ROOT_PI

    c = 2.0 * lam**2 + 1.0
    half = 0.5 * ROOT_PI
    big = c / (4.0 * lam**2) * ROOT_PI
    v1 = -lam / c * r1 - half
    v3 = -lam / c * r1 + half
    v4 = -2.0 * lam * r1 - ROOT_PI
    v5 = -2.0 * lam * r1 + ROOT_PI
    v6 = (r1 - s1) / (2.0 * lam) + big
    v7 = (r1 + s1) / (2.0 * lam) - big

    main = (v1 < r2) & (r2 < v3)
    upper = ~main & (r2 >= v3)
    lower = ~main & ~upper

    d1 = np.zeros_like(n1)
    d2 = np.zeros_like(n2)
    d1 = np.where(main & (r2 >= v5), 1.0, d1)
    d1 = np.where(main & ~(v4 < r2) & ~(r2 >= v5), -1.0, d1)
    d2 = np.where(upper & (r2 > v6), 1.0, d2)
    d1 = np.where(upper & ~(r2 > v6), 1.0, d1)
    d1 = np.where(lower & (r2 > v7), -1.0, d1)
    d2 = np.where(lower & ~(r2 > v7), -1.0, d2)
    return n1 + d1, n2 + d2


def decode_ml(sector: str, lam: float, x1, x2):
    """Maximum-likelihood decode: the integer cell containing (x1, x2).

    The pq sector reuses the pp branch logic through the mirror
    x1 -> -x1 (its cell inequalities and density are the pp ones with the
    first coordinate negated); qp is identical to qq.
    """
    scalar = np.isscalar(x1) and np.isscalar(x2)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if sector in (QQ, QP):
        n1, n2 = _decode_qq(x1, x2, lam)
    elif sector == PP:
        n1, n2 = _decode_pp(x1, x2, lam)
    elif sector == PQ:
        n1, n2 = _decode_pp(-x1, x2, lam)
        n1 = -n1
    else:
        raise ValueError(f"unknown sector {sector!r}")
    n1 = n1.astype(np.int64)
    n2 = n2.astype(np.int64)
    if scalar:
        return DecodedIntegers(int(n1), int(n2))
    return n1, n2


def brute_force_oracle(sector: str, lam: float, x1, x2, window: int = 3):
    """Exhaustive argmin of the sector form over [-window, window]^2.

    First minimum in lexicographic (n1, n2) scan order breaks ties.
    """
    if window < 3:
        raise ValueError("window must be >= 3")
    scalar = np.isscalar(x1) and np.isscalar(x2)
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    s1, s2 = sector_spacings(sector, lam)
    grid = np.arange(-window, window + 1)
    cand1, cand2 = np.meshgrid(grid, grid, indexing="ij")
    cand1 = cand1.ravel()  # lexicographic (n1, n2) order
    cand2 = cand2.ravel()
    f = quad_form(
        sector,
        lam,
        x1[..., None] - cand1 * s1,
        x2[..., None] - cand2 * s2,
    )
    best = np.argmin(f, axis=-1)  # first minimum wins
    n1 = cand1[best]
    n2 = cand2[best]
    if scalar:
        return DecodedIntegers(int(n1[0]), int(n2[0]))
    return n1, n2


def wall_margin(sector: str, lam: float, x1, x2):
    """Distance proxy to the nearest Voronoi wall of the decoded cell.

    Returns the smallest slack among the decoded cell's six half-plane
    constraints, normalized by each constraint's gradient norm so the value
    is a Euclidean distance.  Used to exclude measure-zero wall inputs from
    oracle-equivalence sweeps.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    n1, n2 = decode_ml(sector, lam, x1, x2)
    s1, s2 = sector_spacings(sector, lam)
    u = x1 - n1 * s1
    v = x2 - n2 * s2
    if sector in (QQ, QP):
        alphas = (2.0 * lam + 1.0 / lam, 1.0 / (2.0 * lam), -2.0 * lam)
        bounds = (
            0.5 * (2.0 * lam**2 + 1.0) * ROOT_PI,
            0.5 * ROOT_PI,
            0.5 * (2.0 * lam**2 + 1.0) * ROOT_PI,
        )
    else:
        sign = -1.0 if sector == PP else 1.0
        c = 2.0 * lam**2 + 1.0
        alphas = (sign * 2.0 * lam, sign * lam / c, -sign / (2.0 * lam))
        bounds = (ROOT_PI, 0.5 * ROOT_PI, c / (4.0 * lam**2) * ROOT_PI)
    margin = np.full(np.broadcast(u, v).shape, np.inf)
    for alpha, bound in zip(alphas, bounds):
        slack = (bound - np.abs(v - alpha * u)) / np.hypot(1.0, alpha)
        margin = np.minimum(margin, slack)
    return margin if margin.ndim else float(margin)
