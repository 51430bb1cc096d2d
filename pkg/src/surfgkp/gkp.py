"""Quadrature-level primitives for finitely squeezed GKP qubits.

Everything downstream (shift decoding, the per-location noise channels, the
surface-code Monte Carlo) is built on the handful of functions in this
module: squeezing unit conversions, modular reduction onto a rectangular
lattice, Gaussian flip probabilities with the two-translate truncation, and
the net-shift samplers for the two GKP error-correction schemes.

All functions accept scalars or numpy arrays and are pure given an explicit
``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

ROOT_PI = math.sqrt(math.pi)

#: Truncation window used by the flip-probability sums: the even translate
#: set is {0} and the odd set is {-1, +1}.  Valid in the 9-13 dB squeezing
#: range; ``tests/test_gkp.py`` checks it against a wide-window reference.
ODD_TRANSLATES = (-1, 1)


class ShiftPair(NamedTuple):
    """A (position, momentum) quadrature shift on one mode."""

    xi_q: float
    xi_p: float


def db_to_variance(sigma_db):
    """Convert GKP squeezing in dB to the shift variance sigma^2.

    sigma^2 = (1/2) * 10^(-sigma_db/10); 0 dB is the vacuum variance 1/2.
    """
    return 0.5 * 10.0 ** (-np.asarray(sigma_db, dtype=float) / 10.0)


def variance_to_db(variance):
    """Inverse of :func:`db_to_variance`."""
    variance = np.asarray(variance, dtype=float)
    if np.any(variance <= 0):
        raise ValueError("variance must be positive")
    return 10.0 * np.log10(0.5 / variance)


@dataclass(frozen=True)
class GkpParams:
    """GKP squeezing and lattice aspect ratio.

    Parameters
    ----------
    sigma_db : float
        GKP squeezing in decibels.
    lam : float
        Rectangular-lattice aspect ratio (1.0 = square lattice).  Position
        spacing is sqrt(pi)*lam, momentum spacing sqrt(pi)/lam.
    """

    sigma_db: float
    lam: float = 1.0
    sigma: float = field(init=False)

    def __post_init__(self):
        if not np.isfinite(self.sigma_db):
            raise ValueError("sigma_db must be finite")
        if not (self.lam > 0):
            raise ValueError(f"lam must be positive, got {self.lam}")
        object.__setattr__(self, "sigma", float(np.sqrt(db_to_variance(self.sigma_db))))

    @property
    def variance(self) -> float:
        return self.sigma**2


def remainder(z, s):
    """Centered remainder of ``z`` modulo spacing ``s``.

    Returns z - s*floor(z/s + 1/2), which lies in [-s/2, s/2).
    """
    _check_spacing(s)
    z = np.asarray(z, dtype=float)
    out = z - s * np.floor(z / s + 0.5)
    return out if out.ndim else float(out)


def closest_integer(z, s):
    """Closest integer to z/s, i.e. floor(z/s + 1/2)."""
    _check_spacing(s)
    z = np.asarray(z, dtype=float)
    out = np.floor(z / s + 0.5).astype(np.int64)
    return out if out.ndim else int(out)


def _check_spacing(s) -> None:
    if np.any(np.asarray(s) <= 0):
        raise ValueError(f"spacing must be positive, got {s}")


def flip_prob_marginal(sigma_eff, spacing):
    """Probability that a N(0, sigma_eff^2) shift decodes to an odd integer.

    Two-translate truncation: only the n = -1 and n = +1 intervals
    [(n-1/2)s, (n+1/2)s] contribute.
    """
    _check_spacing(spacing)
    sigma_eff = np.asarray(sigma_eff, dtype=float)
    if np.any(sigma_eff <= 0):
        raise ValueError("sigma_eff must be positive")
    z = np.asarray(spacing, dtype=float) / sigma_eff
    # 2 * [Q(s/2sig) - Q(3s/2sig)] with Q(x) = 1 - Phi(x)
    out = 2.0 * (ndtr(-0.5 * z) - ndtr(-1.5 * z))
    return out if out.ndim else float(out)


def flip_prob_conditional(xi_bar, sigma_eff, spacing):
    """Conditional flip probability b/(a+b) given the reduced residual.

    ``a`` is the n = 0 Gaussian weight and ``b`` sums the n = -1, +1
    weights, exp[-(xi_bar + n*s)^2 / (2 sigma_eff^2)].
    """
    _check_spacing(spacing)
    xi_bar = np.asarray(xi_bar, dtype=float)
    two_var = 2.0 * np.asarray(sigma_eff, dtype=float) ** 2
    a = np.exp(-(xi_bar**2) / two_var)
    b = np.zeros_like(a)
    for n in ODD_TRANSLATES:
        b = b + np.exp(-((xi_bar + n * spacing) ** 2) / two_var)
    out = b / (a + b)
    return out if out.ndim else float(out)


def sample_shift(sigma, rng, size=None) -> ShiftPair:
    """Draw xi_q, xi_p i.i.d. from N(0, sigma^2)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    xi = rng.normal(0.0, sigma, size=(2,) if size is None else (2, size))
    if size is None:
        return ShiftPair(float(xi[0]), float(xi[1]))
    return ShiftPair(xi[0], xi[1])


#: Error-correction scheme tags accepted by :func:`ec_net_shift`.
TELEPORT = "teleport"
STEANE = "steane"


def ec_net_shift(scheme, sigma, rng, size=None) -> ShiftPair:
    """Net shift on the data qubit across one idle + EC cycle.

    Teleportation-based EC combines the carried-over and current ancilla
    shifts as xi'(+) - xi(-) in q and xi'(+) + xi(-) in p (variance
    2 sigma^2 per quadrature).  Steane-type EC leaves the three-term
    combinations -xi_q'(2) - xi_q'(3) + xi_q(2) and
    -xi_p'(3) - xi_p(2) + xi_p(3) (variance 3 sigma^2).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    shape = () if size is None else (size,)
    if scheme == TELEPORT:
        draws = rng.normal(0.0, sigma, size=(4,) + shape)
        xi_q = draws[0] - draws[1]  # xi'(+)_q - xi(-)_q
        xi_p = draws[2] + draws[3]  # xi'(+)_p + xi(-)_p
    elif scheme == STEANE:
        draws = rng.normal(0.0, sigma, size=(6,) + shape)
        xi_q = -draws[0] - draws[1] + draws[2]
        xi_p = -draws[3] - draws[4] + draws[5]
    else:
        raise ValueError(f"unknown EC scheme {scheme!r}; expected 'teleport' or 'steane'")
    if size is None:
        return ShiftPair(float(xi_q), float(xi_p))
    return ShiftPair(xi_q, xi_p)


def shot_rng(master_seed: int, domain: int, block_index: int) -> np.random.Generator:
    """Deterministic per-block generator stream.

    Monte Carlo shots are processed in fixed-size blocks; block ``b`` of a
    campaign draws from ``SeedSequence([master_seed, domain, b])``, so
    results are bit-identical regardless of worker count or execution
    order.
    """
    return np.random.default_rng(np.random.SeedSequence([master_seed, domain, block_index]))


#: Fixed Monte Carlo block size; part of the reproducibility contract.
BLOCK_SIZE = 4096
