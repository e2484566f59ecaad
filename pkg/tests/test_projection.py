import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate
from scipy.special import expit

from fisherlab import models, projection
from fisherlab.models import ModelParams, OffSupportError, PointX

KS = ModelParams.ks()
VARIANT = ModelParams.variant(0.4, 0.7)
CONTROL = ModelParams.control()
ALL = [KS, VARIANT, CONTROL]
THETAS = [-2.0, 0.0, 1.0, 3.0]


def test_cond_prob_z():
    assert projection.cond_prob_z(0.5, 0.0, KS) == 1.0
    assert projection.cond_prob_z(-0.5, 0.0, KS) == 0.0
    # alpha*beta / (alpha*beta + (1-alpha)(1-beta)) = 0.28/0.46
    assert projection.cond_prob_z(1.2, 0.0, VARIANT) == pytest.approx(14 / 23, abs=1e-12)
    # left side: alpha(1-beta) / (alpha(1-beta) + (1-alpha)beta) = 0.12/0.54
    assert projection.cond_prob_z(-1.2, 0.0, VARIANT) == pytest.approx(2 / 9, abs=1e-12)
    assert projection.cond_prob_z(0.3, 1.0, CONTROL) == pytest.approx(expit(1.0), abs=1e-12)
    with pytest.raises(OffSupportError):
        projection.cond_prob_z(0.0, 0.0, KS)


def test_cond_score_examples():
    assert projection.cond_score(1.0, 0.0, KS) == pytest.approx(-1.0)
    assert projection.cond_score(1.0, 0.0, KS) == pytest.approx(models.score_Q(1.0, 0.0, KS))
    assert projection.cond_score(1.0, 0.0, CONTROL) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("params", [KS, VARIANT, CONTROL], ids=lambda p: p.family)
def test_cond_score_equals_y_score(params):
    rng = np.random.default_rng(17)
    ys = rng.normal(scale=5, size=200)
    worst = max(abs(projection.cond_score(y, 0.3, params) - models.score_Q(y, 0.3, params))
                for y in ys if y != 0.3)
    assert worst < 1e-9


def test_fisher_info_closed_forms():
    val, _ = sp_integrate.quad(lambda w: 0.5 * (2 - w) ** 2 * math.exp(-w), 0, np.inf)
    assert val == pytest.approx(1.0, abs=1e-12)
    for theta in (0.0, 3.0):
        assert projection.fisher_info_P(theta, KS) == pytest.approx(1.0, abs=1e-8)
        assert projection.fisher_info_Q(theta, KS) == pytest.approx(1.0, abs=1e-8)
    assert projection.fisher_info_P(0.0, VARIANT) == pytest.approx(1.0, abs=1e-8)
    assert projection.fisher_info_P(0.0, CONTROL) == pytest.approx(1.25, abs=1e-8)
    assert projection.fisher_info_Q(0.0, CONTROL) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("theta", THETAS)
def test_control_info_matches_logistic_variance(theta):
    s = expit(theta)
    assert projection.fisher_info_P(theta, CONTROL) == pytest.approx(1 + s * (1 - s), abs=1e-8)
    assert projection.info_defect(theta, CONTROL) == pytest.approx(s * (1 - s), abs=1e-8)


def test_defect_examples():
    assert projection.info_defect(0.0, KS) == pytest.approx(0.0, abs=1e-10)
    assert projection.info_defect(0.0, CONTROL) == pytest.approx(0.25, abs=1e-8)
    assert projection.info_defect(2.0, CONTROL) == pytest.approx(0.1049936, abs=1e-7)


def test_pythagoras_examples():
    r = projection.pythagoras_check(0.0, KS)
    assert (r.info_P, r.info_Q, r.defect) == pytest.approx((1.0, 1.0, 0.0), abs=1e-8)
    assert r.preserved
    r = projection.pythagoras_check(0.0, CONTROL)
    assert (r.info_P, r.info_Q, r.defect) == pytest.approx((1.25, 1.0, 0.25), abs=1e-8)
    assert not r.preserved
    assert projection.pythagoras_check(1.0, VARIANT).preserved


def test_pythagoras_violation_is_loud(monkeypatch):
    monkeypatch.setattr(projection, "fisher_info_Q", lambda theta, params, tol: 0.5)
    with pytest.raises(projection.PythagorasViolation):
        projection.pythagoras_check(0.0, KS)


def test_witness_examples():
    assert projection.sufficiency_witness(0.0, 1.0, KS) == pytest.approx(1.0)
    assert projection.sufficiency_witness(0.0, 1.0, VARIANT) == pytest.approx(80 / 207, abs=1e-9)
    assert projection.sufficiency_witness(0.0, 1.0, VARIANT) == pytest.approx(0.3864735, abs=1e-6)
    assert projection.sufficiency_witness(0.0, 1.0, CONTROL) == pytest.approx(
        expit(1.0) - 0.5, abs=1e-12)
    assert projection.sufficiency_witness(0.0, 1.0, CONTROL) == pytest.approx(0.2310586, abs=1e-7)
    with pytest.raises(ValueError):
        projection.sufficiency_witness(1.0, 1.0, KS)


@pytest.fixture(scope="module")
def reports():
    return {(p.family, t): projection.pythagoras_check(t, p) for p in ALL for t in THETAS}


def test_monotonicity(reports):
    for r in reports.values():
        assert r.info_Q <= r.info_P + 1e-9
        assert r.info_Q >= 0


def test_preservation_iff_zero_defect(reports):
    for r in reports.values():
        assert (r.defect <= 1e-9) == (abs(r.info_P - r.info_Q) <= 1e-8)


@pytest.mark.parametrize("params", ALL, ids=lambda p: p.family)
def test_cond_score_is_best_predictor(params):
    theta = 0.4
    basis = {
        "one": lambda y: 1.0,
        "centered": lambda y: y - theta,
        "sign": lambda y: math.copysign(1.0, y - theta),
    }

    def risk(phi, eps):
        def sq(y, z):
            fit = projection.cond_score(y, theta, params) + eps * phi(y)
            return (models.score_P(PointX(y, z), theta, params) - fit) ** 2
        return models.expect_P(sq, theta, params)

    for phi in basis.values():
        base = risk(phi, 0.0)
        for eps in (0.01, -0.01):
            assert risk(phi, eps) > base


@pytest.mark.parametrize("params", ALL, ids=lambda p: p.family)
@pytest.mark.parametrize("theta", [0.0, 1.5])
def test_cond_score_has_zero_mean(params, theta):
    m = models.expect_Q(lambda y: projection.cond_score(y, theta, params), theta, params)
    assert m == pytest.approx(0.0, abs=1e-9)
