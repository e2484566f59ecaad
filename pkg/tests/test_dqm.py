import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate
from scipy.special import gammainc

from fisherlab import dqm, models, projection
from fisherlab.models import ModelParams, OffSupportError, PointX

KS = ModelParams.ks()
VARIANT = ModelParams.variant(0.4, 0.7)
CONTROL = ModelParams.control()
GRID = (0.4, 0.2, 0.1, 0.05)


def test_singular_mass_examples():
    assert dqm.singular_mass(0.0, 0.1, KS) == pytest.approx(7.7327e-5, abs=1e-9)
    # the four-decimal reference 7.1938e-3 is rounded; check it to its last digit and
    # hold the 1e-8 tolerance against the exact incomplete-gamma value
    assert dqm.singular_mass(0.0, 0.5, KS) == pytest.approx(7.1938e-3, abs=5e-8)
    assert dqm.singular_mass(0.0, 0.5, KS) == pytest.approx(0.5 * gammainc(3, 0.5), abs=1e-8)
    assert dqm.singular_mass(0.0, 0.3, CONTROL) == 0.0


@pytest.mark.parametrize("t", [0.05, 0.1, 0.4, 1.0])
def test_singular_mass_vs_incomplete_gamma(t):
    assert dqm.singular_mass(0.0, t, KS) == pytest.approx(0.5 * gammainc(3, t), rel=1e-12)


@pytest.mark.parametrize("t", [0.05, 0.2, 0.5, -0.3])
def test_singular_quadrature_matches_closed_form(t):
    assert dqm.singular_mass_quadrature(0.0, t, KS) == pytest.approx(
        dqm.singular_mass_closed_form(t), abs=1e-9)


def test_singular_mass_location_and_sign():
    for t in GRID:
        ref = dqm.singular_mass(0.0, t, KS)
        for theta in (-2.0, 3.0):
            assert dqm.singular_mass(theta, t, KS) == pytest.approx(ref, abs=1e-10)
            assert dqm.singular_mass_quadrature(theta, t, KS) == pytest.approx(ref, abs=1e-10)
        assert dqm.singular_mass(0.0, -t, KS) == ref


def test_variant_has_no_singular_part():
    # both signs put mass on both sides of theta, so P_{theta+t} << P_theta
    assert dqm.singular_mass(0.0, 0.2, VARIANT) == 0.0


def test_density_ratio_sqrt():
    assert dqm.density_ratio_sqrt(PointX(1.3, 1), 0.0, 0.0, KS) == 1.0
    assert dqm.density_ratio_sqrt(PointX(0.1, 1), 0.0, 0.2, KS) == 0.0
    direct = math.sqrt(models.g_density(1.9) / models.g_density(2.0))
    assert dqm.density_ratio_sqrt(PointX(2.0, 1), 0.0, 0.1, KS) == pytest.approx(direct, abs=1e-12)
    assert direct == pytest.approx(0.9987075, abs=1e-6)
    with pytest.raises(OffSupportError):
        dqm.density_ratio_sqrt(PointX(-1.0, 1), 0.0, 0.1, KS)


def test_remainder_slope_and_ratio():
    vals = [dqm.remainder_l2(0.0, t, KS) for t in GRID]
    slope = np.polyfit(np.log(GRID), np.log(vals), 1)[0]
    assert 2.5 <= slope <= 3.5
    assert vals[2] / 0.1 ** 2 < vals[1] / 0.2 ** 2


@pytest.mark.parametrize("params", [KS, VARIANT, CONTROL], ids=lambda p: p.family)
def test_remainder_positive_and_decreasing(params):
    vals = [dqm.remainder_l2(0.0, t, params) for t in GRID]
    assert all(v > 0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_remainder_location_invariant():
    for t in (0.2, -0.1):
        ref = dqm.remainder_l2(0.0, t, KS)
        for theta in (-2.0, 3.0):
            assert dqm.remainder_l2(theta, t, KS) == pytest.approx(ref, abs=1e-10)


def test_remainder_against_scipy():
    # independent route: scipy's QUADPACK on the z=+1 and z=-1 branches
    theta, t = 0.0, 0.2

    def branch(z):
        def integrand(y):
            x = PointX(y, z)
            f0 = models.f_density(x, theta, KS)
            if f0 == 0:
                return 0.0
            r = (math.sqrt(models.f_density(x, theta + t, KS)) - math.sqrt(f0)
                 - 0.5 * t * models.score_P(x, theta, KS) * math.sqrt(f0))
            return r * r
        if z == 1:
            pieces = [(theta, theta + t), (theta + t, np.inf)]
        else:
            pieces = [(-np.inf, theta - t), (theta - t, theta)]
        return sum(sp_integrate.quad(integrand, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
                   for a, b in pieces)

    oracle = 0.5 * (branch(1) + branch(-1))
    assert dqm.remainder_l2(theta, t, KS) == pytest.approx(oracle, rel=1e-8)


def test_remainder_rejects():
    with pytest.raises(ValueError):
        dqm.remainder_l2(0.0, 0.0, KS)
    with pytest.raises(ValueError):
        dqm.remainder_l2(0.0, 1.5, KS)


def test_hellinger_remainder_g():
    vals = [dqm.hellinger_remainder_g(t) for t in GRID]
    slope = np.polyfit(np.log(GRID), np.log(vals), 1)[0]
    assert 2.5 <= slope <= 3.5
    assert dqm.hellinger_remainder_g(0.1) > 0
    ratios = [v / t ** 2 for v, t in zip(vals, GRID)]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))


@pytest.mark.parametrize("t", [0.4, 0.05])
def test_hellinger_remainder_against_scipy(t):
    def root_g(w):
        return math.sqrt(models.g_density(w))

    def integrand(y):
        return (root_g(y - t) - root_g(y) - t * models.gamma_hellinger(y)) ** 2

    oracle = sum(sp_integrate.quad(integrand, a, b, epsabs=1e-16, epsrel=1e-13, limit=200)[0]
                 for a, b in ((0.0, t), (t, np.inf)))
    assert dqm.hellinger_remainder_g(t) == pytest.approx(oracle, rel=1e-8)


def test_dqm_verify_ks():
    rep = dqm.dqm_verify(0.0, GRID, KS)
    assert rep.passed == (True, True, True)
    assert rep.score_l2 == pytest.approx(1.0, abs=1e-8)
    assert all(0 <= m <= 1 for m in rep.singular_mass)
    assert all(r >= 0 for r in rep.remainder_l2)
    shifted = dqm.dqm_verify(5.0, GRID, KS)
    assert shifted.passed == rep.passed


def test_dqm_verify_control():
    rep = dqm.dqm_verify(0.0, GRID, CONTROL)
    assert rep.ok
    assert rep.singular_mass == (0.0,) * 4
    assert rep.singular_slope is None


def test_dqm_verify_variant():
    assert dqm.dqm_verify(0.3, GRID, VARIANT).ok


def test_dqm_threshold_is_configurable():
    rep = dqm.dqm_verify(0.0, GRID, KS, threshold=3.5)
    assert rep.passed == (False, True, False)


def test_dqm_grid_precondition():
    with pytest.raises(ValueError):
        dqm.dqm_verify(0.0, (0.2, 0.1), KS)
    with pytest.raises(ValueError):
        dqm.dqm_verify(0.0, (0.2, 0.1, -0.05), KS)


@pytest.mark.parametrize("params", [KS, VARIANT, CONTROL], ids=lambda p: p.family)
@pytest.mark.parametrize("theta", [-1.0, 0.0, 2.0])
def test_score_l2_equals_fisher_info(params, theta):
    assert dqm.score_l2(theta, params) == pytest.approx(projection.fisher_info_P(theta, params),
                                                        abs=1e-8)
