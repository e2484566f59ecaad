"""Densities, scores and samplers for the three experiment families.

``ks``
    x = (y, z) with z = +-1 equally likely and y = theta + z*w, w ~ Gamma(3, 1).
    Densities are taken w.r.t. Lebesgue x (1/2, 1/2) on the sign.
``ks_variant``
    The 0.7/0.3 mixture: given z, y = theta + z*w with probability ``beta`` and
    theta - z*w otherwise; mu{+1} = ``alpha``.  Densities are w.r.t.
    Lebesgue x mu.
``control``
    y ~ N(theta, 1) and independently P(z = +1) = logistic(theta).  Densities
    are w.r.t. Lebesgue x counting measure on the sign.  Dropping z loses
    exactly the Bernoulli information sigma(1 - sigma).

Every density is returned *without* the base-measure sign weight; callers
that integrate over x combine the two sign branches with ``sign_weights``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .numerics import DEFAULT_TOL, integrate

FAMILIES = ("ks", "ks_variant", "control")
_LOG_HALF = math.log(0.5)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class OffSupportError(ValueError):
    """A score or ratio was requested where the density vanishes."""


class PointX(NamedTuple):
    y: float
    z: int


@dataclass(frozen=True)
class ModelParams:
    family: str = "ks"
    alpha: float = 0.5
    beta: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "ks":
            if (self.alpha, self.beta) != (0.5, 1.0):
                raise ValueError("ks family fixes alpha=1/2, beta=1")
        elif self.family == "ks_variant":
            if not (0.0 < self.alpha < 1.0 and 0.0 < self.beta < 1.0):
                raise ValueError("ks_variant needs alpha, beta in (0, 1)")

    @classmethod
    def ks(cls) -> "ModelParams":
        return cls("ks")

    @classmethod
    def variant(cls, alpha: float = 0.4, beta: float = 0.7) -> "ModelParams":
        return cls("ks_variant", alpha, beta)

    @classmethod
    def control(cls) -> "ModelParams":
        return cls("control")

    @classmethod
    def from_name(cls, family: str, alpha: float | None = None,
                  beta: float | None = None) -> "ModelParams":
        if family == "ks_variant":
            return cls.variant(0.4 if alpha is None else alpha,
                               0.7 if beta is None else beta)
        return cls(family)

    @property
    def is_mixture(self) -> bool:
        return self.family != "control"


# --------------------------------------------------------------------------
# the scalar g family
# --------------------------------------------------------------------------

def g_density(w: float) -> float:
    return 0.5 * w * w * math.exp(-w) if w > 0 else 0.0


def log_g(w: float) -> float:
    return _LOG_HALF + 2.0 * math.log(w) - w if w > 0 else -math.inf


def g_derivative(w: float) -> float:
    return 0.5 * w * (2.0 - w) * math.exp(-w) if w > 0 else 0.0


def g_log_derivative(w: float) -> float:
    """d/dw log g(w) = (2 - w)/w on w > 0."""
    if not w > 0:
        raise OffSupportError(f"log g is not differentiable at w={w!r}")
    return (2.0 - w) / w


def gamma_hellinger(w: float) -> float:
    """Hellinger derivative -g'(w) / (2 sqrt g(w)), i.e. (w-2) e^{-w/2} / (2 sqrt 2)."""
    if not w > 0:
        return 0.0
    return (w - 2.0) * math.exp(-0.5 * w) / (2.0 * math.sqrt(2.0))


def g_cdf(w: float) -> float:
    """Gamma(3, 1) distribution function, accurate for small w."""
    if w <= 0:
        return 0.0
    if w >= 0.5:
        return 1.0 - math.exp(-w) * (1.0 + w + 0.5 * w * w)
    # e^{-w} sum_{k>=3} w^k / k!
    term = w ** 3 / 6.0
    total = 0.0
    k = 3
    while term > 1e-18 * total or total == 0.0:
        total += term
        k += 1
        term *= w / k
    return math.exp(-w) * total


def logistic(u: float) -> float:
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


# --------------------------------------------------------------------------
# experiment densities
# --------------------------------------------------------------------------

def sign_weights(params: ModelParams) -> dict[int, float]:
    """Mass the base measure puts on each sign."""
    if params.family == "ks":
        return {+1: 0.5, -1: 0.5}
    if params.family == "ks_variant":
        return {+1: params.alpha, -1: 1.0 - params.alpha}
    return {+1: 1.0, -1: 1.0}


def _check_sign(z: int) -> None:
    if z not in (1, -1):
        raise ValueError(f"z must be +1 or -1, got {z!r}")


def log_f_density(x: PointX, theta: float, params: ModelParams) -> float:
    y, z = x
    _check_sign(z)
    if params.family == "control":
        s = logistic(theta)
        lz = math.log(s) if z == 1 else math.log1p(-s)
        return -0.5 * (y - theta) ** 2 - _LOG_SQRT_2PI + lz
    s = z * (y - theta)
    if s > 0:
        return math.log(params.beta) + log_g(s)
    if s < 0 and params.beta < 1.0:
        return math.log1p(-params.beta) + log_g(-s)
    return -math.inf


def f_density(x: PointX, theta: float, params: ModelParams) -> float:
    """Density of P_theta at x w.r.t. the family's base measure."""
    y, z = x
    _check_sign(z)
    if params.family == "control":
        s = logistic(theta)
        pz = s if z == 1 else 1.0 - s
        return math.exp(-0.5 * (y - theta) ** 2 - _LOG_SQRT_2PI) * pz
    s = z * (y - theta)
    return params.beta * g_density(s) + (1.0 - params.beta) * g_density(-s)


def _branch_weights(params: ModelParams) -> tuple[float, float]:
    """Lebesgue weights of g(y - theta) and g(theta - y) in h_theta."""
    a, b = params.alpha, params.beta
    right = a * b + (1.0 - a) * (1.0 - b)
    return right, 1.0 - right


def log_h_density(y: float, theta: float, params: ModelParams) -> float:
    if params.family == "control":
        return -0.5 * (y - theta) ** 2 - _LOG_SQRT_2PI
    right, left = _branch_weights(params)
    d = y - theta
    if d > 0:
        return math.log(right) + log_g(d)
    if d < 0:
        return math.log(left) + log_g(-d)
    return -math.inf


def h_density(y: float, theta: float, params: ModelParams) -> float:
    """Lebesgue density of the distribution of S(y, z) = y."""
    if params.family == "control":
        return math.exp(-0.5 * (y - theta) ** 2 - _LOG_SQRT_2PI)
    right, left = _branch_weights(params)
    return right * g_density(y - theta) + left * g_density(theta - y)


def log_h_array(ys: np.ndarray, thetas: np.ndarray, params: ModelParams) -> np.ndarray:
    """Vectorized log h over an outer grid: result[j, i] = log h_{thetas[j]}(ys[i])."""
    d = np.asarray(ys, dtype=float)[None, :] - np.asarray(thetas, dtype=float)[:, None]
    if params.family == "control":
        return -0.5 * d * d - _LOG_SQRT_2PI
    right, left = _branch_weights(params)
    a = np.abs(d)
    with np.errstate(divide="ignore"):
        out = _LOG_HALF + 2.0 * np.log(a) - a
    out += np.where(d > 0, math.log(right), math.log(left))
    return out


# --------------------------------------------------------------------------
# scores
# --------------------------------------------------------------------------

def score_P(x: PointX, theta: float, params: ModelParams) -> float:
    """d/dtheta log f_theta(x); undefined where f_theta(x) = 0."""
    y, z = x
    _check_sign(z)
    if params.family == "control":
        s = logistic(theta)
        return (y - theta) + ((1.0 - s) if z == 1 else -s)
    if log_f_density(x, theta, params) == -math.inf:
        raise OffSupportError(f"score_P undefined off the support: x={tuple(x)}, theta={theta}")
    d = y - theta
    # on either side of theta only one g term is alive and its log-derivative is z-free
    return -g_log_derivative(d) if d > 0 else g_log_derivative(-d)


def score_Q(y: float, theta: float, params: ModelParams) -> float:
    """d/dtheta log h_theta(y)."""
    if params.family == "control":
        return y - theta
    d = y - theta
    if d > 0:
        return -g_log_derivative(d)
    if d < 0:
        return g_log_derivative(-d)
    raise OffSupportError(f"score_Q undefined at y=theta={theta}")


def hellinger_derivative_f(x: PointX, theta: float, params: ModelParams) -> float:
    """d/dtheta sqrt f_theta(x) for the mixture families."""
    y, z = x
    s = z * (y - theta)
    if s > 0:
        return z * math.sqrt(params.beta) * gamma_hellinger(s)
    if s < 0:
        return -z * math.sqrt(1.0 - params.beta) * gamma_hellinger(-s)
    return 0.0


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

def replicate_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based stream for replicate ``index`` under master ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be nonnegative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, index))))


def draw(theta: float, n: int, rng: np.random.Generator,
         params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Draw n observations as (ys, zs) arrays; draw order is fixed per family."""
    if n < 1:
        raise ValueError("n must be at least 1")
    u = rng.random((n, 4))
    if params.family == "control":
        ys = theta + rng.standard_normal(n)
        zs = np.where(u[:, 3] < logistic(theta), 1, -1)
        return ys, zs
    w = -np.log1p(-u[:, :3]).sum(axis=1)
    zs = np.where(u[:, 3] < params.alpha, 1, -1)
    if params.family == "ks":
        direction = zs
    else:
        flip = rng.random(n) >= params.beta
        direction = np.where(flip, -zs, zs)
    return theta + direction * w, zs


def sample(theta: float, n: int, seed: int, params: ModelParams,
           index: int = 0) -> list[PointX]:
    ys, zs = draw(theta, n, replicate_rng(seed, index), params)
    return [PointX(float(y), int(z)) for y, z in zip(ys, zs)]


# --------------------------------------------------------------------------
# expectations under P_theta and Q_theta
# --------------------------------------------------------------------------

def expect_P(fn: Callable[[float, int], float], theta: float, params: ModelParams,
             extra_breakpoints: Iterable[float] = (), tol: float = DEFAULT_TOL) -> float:
    """Integral of fn(y, z) * f_theta(y, z) against the base measure.

    ``fn`` is only evaluated where f_theta > 0.
    """
    bps = sorted({theta, *extra_breakpoints})
    wts = sign_weights(params)
    total = 0.0
    for z in (1, -1):
        def integrand(y, z=z):
            fx = f_density(PointX(y, z), theta, params)
            return fn(y, z) * fx if fx > 0 else 0.0
        total += wts[z] * integrate(integrand, bps, "exponential", tol / 2).value
    return total


def expect_Q(fn: Callable[[float], float], theta: float, params: ModelParams,
             extra_breakpoints: Iterable[float] = (), tol: float = DEFAULT_TOL) -> float:
    bps = sorted({theta, *extra_breakpoints})

    def integrand(y):
        hy = h_density(y, theta, params)
        return fn(y) * hy if hy > 0 else 0.0
    return integrate(integrand, bps, "exponential", tol).value


def total_mass(theta: float, params: ModelParams, tol: float = DEFAULT_TOL) -> float:
    return expect_P(lambda y, z: 1.0, theta, params, tol=tol)


def points(ys: Sequence[float], zs: Sequence[int]) -> list[PointX]:
    return [PointX(float(y), int(z)) for y, z in zip(ys, zs)]
