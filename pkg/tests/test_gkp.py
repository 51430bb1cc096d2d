"""Quadrature primitives: conversions, modular reduction, flip probabilities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from surfgkp.gkp import (
    ROOT_PI,
    GkpParams,
    closest_integer,
    db_to_variance,
    ec_net_shift,
    flip_prob_conditional,
    flip_prob_marginal,
    remainder,
    sample_shift,
    shot_rng,
    variance_to_db,
)


def test_db_to_variance_paper_anchor():
    assert db_to_variance(10.0) == pytest.approx(0.05, rel=1e-12)


def test_db_to_variance_vacuum():
    assert db_to_variance(0.0) == pytest.approx(0.5, rel=1e-12)


def test_db_to_variance_13db():
    # direct evaluation oracle: 0.5 * 10**-1.3; twice this is ~0.05
    assert db_to_variance(13.0) == pytest.approx(0.0250593616813, rel=1e-10)
    assert 2 * db_to_variance(13.0) == pytest.approx(0.05, rel=0.01)


@pytest.mark.parametrize("db", [-3.0, 0.0, 9.0, 9.5, 11.0, 13.0, 17.2])
def test_db_round_trip(db):
    assert variance_to_db(db_to_variance(db)) == pytest.approx(db, rel=1e-12, abs=1e-12)


def test_gkp_params_invariants():
    p = GkpParams(10.0, 1.2)
    assert p.sigma**2 == pytest.approx(0.05, rel=1e-12)
    with pytest.raises(ValueError):
        GkpParams(10.0, 0.0)
    with pytest.raises(ValueError):
        GkpParams(float("inf"), 1.0)


def test_remainder_examples():
    s = 1.7
    assert remainder(0.0, s) == 0.0
    assert remainder(s, s) == 0.0
    assert remainder(0.75 * s, s) == pytest.approx(-0.25 * s, rel=1e-12)


def test_remainder_range_and_spacing_check():
    z = np.linspace(-8, 8, 1001)
    r = remainder(z, 0.9)
    assert np.all(r >= -0.45) and np.all(r < 0.45)
    with pytest.raises(ValueError):
        remainder(1.0, 0.0)
    with pytest.raises(ValueError):
        closest_integer(1.0, -2.0)


@given(st.floats(-50, 50), st.integers(-7, 7), st.floats(0.1, 5.0))
@settings(max_examples=200, deadline=None)
def test_remainder_periodicity(z, k, s):
    assert remainder(z + k * s, s) == pytest.approx(remainder(z, s), abs=1e-9)
    assert closest_integer(z + k * s, s) == closest_integer(z, s) + k


def test_closest_integer_examples():
    assert closest_integer(0.0, 2.0) == 0
    assert closest_integer(1.4 * 2.0, 2.0) == 1
    # boundary convention: -s/2 rounds to 0
    assert closest_integer(-1.0, 2.0) == 0


def test_flip_prob_marginal_quadrature_oracle():
    sigma = math.sqrt(2 * 0.05)  # 10 dB, doubled variance
    s = ROOT_PI

    def gauss(x):
        return math.exp(-(x**2) / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi))

    # independent adaptive quadrature of the two odd intervals
    ref = 2 * quad(gauss, 0.5 * s, 1.5 * s, epsabs=1e-14)[0]
    assert flip_prob_marginal(sigma, s) == pytest.approx(ref, abs=1e-10)


def test_flip_prob_marginal_truncation_window():
    # at 9 dB the two-translate truncation agrees with a +-5 window
    sigma = math.sqrt(2 * db_to_variance(9.0))
    s = ROOT_PI

    def gauss(x):
        return math.exp(-(x**2) / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi))

    wide = sum(
        quad(gauss, (n - 0.5) * s, (n + 0.5) * s, epsabs=1e-16)[0]
        for n in (-5, -3, -1, 1, 3, 5)
    )
    assert flip_prob_marginal(sigma, s) == pytest.approx(wide, rel=1e-12)


def test_flip_prob_marginal_limits():
    assert flip_prob_marginal(1e-3, ROOT_PI) < 1e-100
    assert 0 < flip_prob_marginal(0.3, ROOT_PI) < 0.5


def test_flip_prob_conditional_symmetric_case():
    sigma, s = 0.3, ROOT_PI
    b = 2 * math.exp(-(s**2) / (2 * sigma**2))
    assert flip_prob_conditional(0.0, sigma, s) == pytest.approx(b / (1 + b), rel=1e-12)


def test_flip_prob_conditional_wall_and_monotonicity():
    sigma, s = 0.3, ROOT_PI
    at_wall = flip_prob_conditional(s / 2, sigma, s)
    # n=0 and n=-1 weights equal at the wall; the n=+1 weight pushes above 1/2
    assert at_wall >= 0.5
    assert flip_prob_conditional(s / 4, sigma, s) > flip_prob_conditional(0.0, sigma, s)


def test_flip_prob_conditional_integrates_to_marginal():
    # law of total probability, 0.5% tolerance; 1e7 samples keep the Monte
    # Carlo error of the conditional average (~0.23%) inside the tolerance
    rng = np.random.default_rng(11)
    sigma = math.sqrt(2 * db_to_variance(10.0))
    s = ROOT_PI
    xi = rng.normal(0, sigma, size=10_000_000)
    resid = remainder(xi, s)
    cond = flip_prob_conditional(resid, sigma, s)
    marg = flip_prob_marginal(sigma, s)
    assert cond.mean() == pytest.approx(marg, rel=5e-3)


def test_probabilities_in_unit_interval():
    rng = np.random.default_rng(0)
    sigma = 0.35
    x = rng.uniform(-ROOT_PI / 2, ROOT_PI / 2, size=1000)
    p = flip_prob_conditional(x, sigma, ROOT_PI)
    assert np.all((p > 0) & (p < 1))
    assert 0 < flip_prob_marginal(sigma, ROOT_PI) < 0.5


def test_sample_shift_reproducible_and_statistics():
    pair1 = sample_shift(0.3, np.random.default_rng(42))
    pair2 = sample_shift(0.3, np.random.default_rng(42))
    assert pair1 == pair2
    xi = sample_shift(0.3, np.random.default_rng(1), size=1_000_000)
    assert np.var(xi.xi_q) == pytest.approx(0.09, rel=0.01)
    assert np.var(xi.xi_p) == pytest.approx(0.09, rel=0.01)
    cov = np.cov(xi.xi_q, xi.xi_p)[0, 1]
    assert abs(cov) < 3 * 0.09 / math.sqrt(1_000_000)


def test_ec_net_shift_variances():
    rng = np.random.default_rng(5)
    sigma = 0.25
    n = 1_000_000
    tele = ec_net_shift("teleport", sigma, rng, size=n)
    steane = ec_net_shift("steane", sigma, rng, size=n)
    assert np.var(tele.xi_q) == pytest.approx(2 * sigma**2, rel=0.01)
    assert np.var(tele.xi_p) == pytest.approx(2 * sigma**2, rel=0.01)
    assert np.var(steane.xi_q) == pytest.approx(3 * sigma**2, rel=0.01)
    assert np.var(steane.xi_p) == pytest.approx(3 * sigma**2, rel=0.01)
    ratio = np.var(steane.xi_q) / np.var(tele.xi_q)
    assert ratio == pytest.approx(1.5, rel=0.02)


def test_ec_net_shift_small_sigma_and_bad_scheme():
    rng = np.random.default_rng(0)
    tiny = ec_net_shift("teleport", 1e-12, rng)
    assert abs(tiny.xi_q) < 1e-10 and abs(tiny.xi_p) < 1e-10
    with pytest.raises(ValueError):
        ec_net_shift("sum-gate", 0.2, rng)


def test_shot_rng_streams_independent_and_deterministic():
    a = shot_rng(1, 2, 3).normal(size=4)
    b = shot_rng(1, 2, 3).normal(size=4)
    c = shot_rng(1, 2, 4).normal(size=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
