"""Conditional expectation of the score given S(y, z) = y, and what it implies.

Given y, the sign z takes only two values, so the conditional expectation
operator is an exact two-point average weighted by ``cond_prob_z``.  The
projected score is the score of the y-only experiment, and the squared L2
distance between the score and its projection is exactly the information
lost by discarding z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import models
from .models import ModelParams, OffSupportError, PointX
from .numerics import DEFAULT_TOL

PRESERVED_TOL = 1e-7
PYTHAGORAS_TOL = 1e-7
WITNESS_POINTS = 2001
WITNESS_PAD = 8.0


class PythagorasViolation(ArithmeticError):
    """info_P != info_Q + defect beyond tolerance: a quadrature or formula bug."""


@dataclass(frozen=True)
class InfoReport:
    theta: float
    info_P: float
    info_Q: float
    defect: float
    preserved: bool


@dataclass(frozen=True)
class ProjectionSummary:
    family: str
    info: InfoReport
    witness_theta: float
    witness: float


def _log_weighted(y: float, z: int, theta: float, params: ModelParams) -> float:
    return math.log(models.sign_weights(params)[z]) + models.log_f_density(PointX(y, z), theta, params)


def cond_prob_z(y: float, theta: float, params: ModelParams) -> float:
    """P_theta(z = +1 | S = y)."""
    lp = _log_weighted(y, 1, theta, params)
    lm = _log_weighted(y, -1, theta, params)
    if lp == -math.inf and lm == -math.inf:
        raise OffSupportError(f"h_theta vanishes at y={y}, theta={theta}")
    if lm == -math.inf:
        return 1.0
    if lp == -math.inf:
        return 0.0
    return 1.0 / (1.0 + math.exp(lm - lp))


def cond_score(y: float, theta: float, params: ModelParams) -> float:
    """P_theta(score | S = y), averaging only over signs with positive weight."""
    p = cond_prob_z(y, theta, params)
    total = 0.0
    if p > 0.0:
        total += p * models.score_P(PointX(y, 1), theta, params)
    if p < 1.0:
        total += (1.0 - p) * models.score_P(PointX(y, -1), theta, params)
    return total


def fisher_info_P(theta: float, params: ModelParams, tol: float = DEFAULT_TOL) -> float:
    return models.expect_P(lambda y, z: models.score_P(PointX(y, z), theta, params) ** 2,
                           theta, params, tol=tol)


def fisher_info_Q(theta: float, params: ModelParams, tol: float = DEFAULT_TOL) -> float:
    return models.expect_Q(lambda y: cond_score(y, theta, params) ** 2, theta, params, tol=tol)


def info_defect(theta: float, params: ModelParams, tol: float = DEFAULT_TOL) -> float:
    def sq_gap(y, z):
        return (models.score_P(PointX(y, z), theta, params) - cond_score(y, theta, params)) ** 2
    return max(0.0, models.expect_P(sq_gap, theta, params, tol=tol))


def pythagoras_check(theta: float, params: ModelParams, tol: float = DEFAULT_TOL,
                     identity_tol: float = PYTHAGORAS_TOL) -> InfoReport:
    """Compute both informations and the defect; insist info_P = info_Q + defect."""
    info_p = fisher_info_P(theta, params, tol)
    info_q = fisher_info_Q(theta, params, tol)
    defect = info_defect(theta, params, tol)
    gap = info_p - info_q - defect
    if abs(gap) > identity_tol:
        raise PythagorasViolation(
            f"info_P - info_Q - defect = {gap:.3e} at theta={theta} ({params.family})")
    return InfoReport(theta=float(theta), info_P=info_p, info_Q=info_q,
                      defect=defect, preserved=defect <= PRESERVED_TOL)


def witness_grid(theta1: float, theta2: float,
                 points: int = WITNESS_POINTS) -> np.ndarray:
    lo = min(theta1, theta2) - WITNESS_PAD
    hi = max(theta1, theta2) + WITNESS_PAD
    return np.linspace(lo, hi, points)


def sufficiency_witness(theta1: float, theta2: float, params: ModelParams,
                        points: int = WITNESS_POINTS) -> float:
    """Largest change in P(z = +1 | y) between two parameters on a common y grid.

    A sufficient S would make this conditional probability free of theta, so
    any strictly positive value certifies that S is not sufficient.
    """
    if theta1 == theta2:
        raise ValueError("need two distinct parameter values")
    best = None
    for y in witness_grid(theta1, theta2, points):
        y = float(y)
        if models.h_density(y, theta1, params) <= 0 or models.h_density(y, theta2, params) <= 0:
            continue
        diff = abs(cond_prob_z(y, theta1, params) - cond_prob_z(y, theta2, params))
        best = diff if best is None else max(best, diff)
    if best is None:
        raise ValueError("no grid point has positive density under both parameters")
    return best
