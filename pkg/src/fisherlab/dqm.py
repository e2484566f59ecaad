"""Empirical certification of differentiability in quadratic mean.

For a family {P_theta} the three requirements are checked at one theta:

1. the part of P_{theta+t} singular to P_theta has mass o(t^2);
2. the score has finite second moment;
3. sqrt(dP_{theta+t}^{abs}/dP_theta) = 1 + t*score/2 + r with P_theta r^2 = o(t^2).

The little-o claims are turned into slopes of log-log fits over a t grid; a
slope above ``threshold`` (default 2) is accepted as o(t^2).  Every integral
is split at the support kinks {theta - t, theta, theta + t}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from . import models
from .models import ModelParams, OffSupportError, PointX
from .numerics import DEFAULT_TOL, PowerLawFit, fit_power_law, integrate

DEFAULT_T_GRID = (0.4, 0.2, 0.1, 0.05)
SLOPE_THRESHOLD = 2.0
# remainders at t = 0.05 are ~1e-5 (ks) and ~1e-7 (control); keep several digits
REMAINDER_TOL = 1e-13


@dataclass(frozen=True)
class DqmReport:
    theta: float
    t_grid: tuple[float, ...]
    singular_mass: tuple[float, ...]
    remainder_l2: tuple[float, ...]
    singular_slope: PowerLawFit | None
    remainder_slope: PowerLawFit
    score_l2: float
    passed: tuple[bool, bool, bool]

    @property
    def ok(self) -> bool:
        return all(self.passed)


def _sqrt_f(x: PointX, theta: float, params: ModelParams) -> float:
    lf = models.log_f_density(x, theta, params)
    return math.exp(0.5 * lf) if lf > -math.inf else 0.0


def singular_mass_closed_form(t: float) -> float:
    """Singular mass of P_{theta+t} w.r.t. P_theta for the ks family."""
    return 0.5 * models.g_cdf(abs(t))


def singular_mass_quadrature(theta: float, t: float, params: ModelParams,
                             tol: float = 1e-13) -> float:
    """Mass P_{theta+t}{f_theta = 0}, by quadrature over both signs."""
    bps = sorted({theta, theta + t})
    total = 0.0
    for z, wt in models.sign_weights(params).items():
        def integrand(y, z=z):
            x = PointX(y, z)
            if models.f_density(x, theta, params) > 0:
                return 0.0
            return models.f_density(x, theta + t, params)
        total += wt * integrate(integrand, bps, "exponential", tol).value
    return min(1.0, max(0.0, total))


def singular_mass(theta: float, t: float, params: ModelParams) -> float:
    if t == 0:
        raise ValueError("t must be nonzero")
    if params.family == "control":
        return 0.0
    if params.family == "ks":
        return singular_mass_closed_form(t)
    return singular_mass_quadrature(theta, t, params)


def density_ratio_sqrt(x: PointX, theta: float, t: float, params: ModelParams) -> float:
    """sqrt(f_{theta+t}(x) / f_theta(x)) on the support of P_theta."""
    x = PointX(*x)
    lf = models.log_f_density(x, theta, params)
    if lf == -math.inf:
        raise OffSupportError(f"x={tuple(x)} lies outside the support of P_theta, theta={theta}")
    lft = models.log_f_density(x, theta + t, params)
    return math.exp(0.5 * (lft - lf)) if lft > -math.inf else 0.0


def remainder_l2(theta: float, t: float, params: ModelParams,
                 tol: float = REMAINDER_TOL) -> float:
    """P_theta r_t^2 for r_t = sqrt(p_t) - 1 - t*score/2."""
    if t == 0:
        raise ValueError("t must be nonzero")
    if abs(t) > 1:
        raise ValueError("remainder_l2 expects |t| <= 1")
    bps = sorted({theta - t, theta, theta + t})
    total = 0.0
    for z, wt in models.sign_weights(params).items():
        def integrand(y, z=z):
            x = PointX(y, z)
            root = _sqrt_f(x, theta, params)
            if root == 0.0:
                return 0.0
            # r * sqrt(f_theta), which avoids dividing by a vanishing density
            r = (_sqrt_f(x, theta + t, params) - root
                 - 0.5 * t * models.score_P(x, theta, params) * root)
            return r * r
        total += wt * integrate(integrand, bps, "exponential", tol).value
    return max(0.0, total)


def hellinger_remainder_g(t: float, tol: float = REMAINDER_TOL) -> float:
    if t == 0:
        raise ValueError("t must be nonzero")
    if abs(t) > 1:
        raise ValueError("hellinger_remainder_g expects |t| <= 1")

    def root_g(w):
        return w * math.exp(-0.5 * w) / math.sqrt(2.0) if w > 0 else 0.0

    def integrand(y):
        r = root_g(y - t) - root_g(y) - t * models.gamma_hellinger(y)
        return r * r

    return integrate(integrand, sorted({0.0, t}), "exponential", tol).value


def score_l2(theta: float, params: ModelParams, tol: float = DEFAULT_TOL) -> float:
    return models.expect_P(lambda y, z: models.score_P(PointX(y, z), theta, params) ** 2,
                           theta, params, tol=tol)


def dqm_verify(theta: float, t_grid: Sequence[float] = DEFAULT_T_GRID,
               params: ModelParams = ModelParams(),
               threshold: float = SLOPE_THRESHOLD, tol: float = DEFAULT_TOL) -> DqmReport:
    """Evaluate all three DQM conditions at ``theta`` over ``t_grid``.

    Each |t| is evaluated at +t and -t and the larger value is kept, since the
    limit is two-sided.
    """
    grid = tuple(float(t) for t in t_grid)
    if len(grid) < 3 or any(t <= 0 for t in grid):
        raise ValueError("t_grid needs at least three positive entries")
    sing = tuple(max(singular_mass(theta, s * t, params) for s in (1, -1)) for t in grid)
    rem_tol = min(tol, REMAINDER_TOL)
    rem = tuple(max(remainder_l2(theta, s * t, params, rem_tol) for s in (1, -1)) for t in grid)

    if all(m == 0.0 for m in sing):
        sing_fit, sing_ok = None, True
    else:
        positive = [(t, m) for t, m in zip(grid, sing) if m > 0]
        sing_fit = fit_power_law(positive) if len(positive) >= 2 else None
        sing_ok = (sing_fit is not None and len(positive) == len(grid)
                   and sing_fit.slope > threshold)
    rem_fit = fit_power_law(list(zip(grid, rem)))
    l2 = score_l2(theta, params, tol)
    return DqmReport(
        theta=float(theta), t_grid=grid, singular_mass=sing, remainder_l2=rem,
        singular_slope=sing_fit, remainder_slope=rem_fit, score_l2=l2,
        passed=(bool(sing_ok), math.isfinite(l2), bool(rem_fit.slope > threshold)),
    )
