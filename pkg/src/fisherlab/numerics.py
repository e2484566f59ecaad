"""Numerical substrate: adaptive quadrature, log-log slope fits, empirical CDFs.

The quadrature is a globally adaptive Gauss-Kronrod (7/15) scheme.  Finite
pieces between caller-supplied breakpoints are never straddled.  Each
unbounded tail is covered by panels of doubling width that stop once two in a
row carry negligible mass; this keeps every panel finite and in the original
variable, so oscillating or kinked tails are refined like any other piece.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

# Kronrod 15-point abscissae (descending, last is the centre) and weights; the
# embedded 7-point Gauss rule uses every other abscissa starting at index 1.
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)

DEFAULT_TOL = 1e-10
MAX_SUBDIVISIONS = 4000
# width of the first tail panel; later ones double
TAIL_SCALE = 2.0
MAX_TAIL_PANELS = 60


class QuadratureError(ArithmeticError):
    """Raised when adaptive quadrature cannot deliver a trustworthy value.

    ``estimate`` carries the best value reached (or ``nan``) and ``abscissa``
    the offending point when the integrand returned a non-finite value.
    """

    def __init__(self, message: str, estimate: float = math.nan,
                 error_estimate: float = math.inf, abscissa: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate
        self.abscissa = abscissa


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    subdivisions: int


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int

    def predict(self, t: float) -> float:
        return math.exp(self.intercept) * t ** self.slope


@dataclass(frozen=True)
class EmpiricalDistribution:
    sorted_values: tuple[float, ...]

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "EmpiricalDistribution":
        return cls(tuple(sorted(float(v) for v in values)))

    @property
    def size(self) -> int:
        return len(self.sorted_values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.sorted_values, dtype=float)

    def mean(self) -> float:
        return float(np.mean(self.sorted_values))

    def variance(self) -> float:
        """Unbiased sample variance."""
        return float(np.var(self.sorted_values, ddof=1))

    def median(self) -> float:
        return float(np.median(self.sorted_values))


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------

def _check(fx: float, x: float) -> float:
    if not math.isfinite(fx):
        raise QuadratureError(f"integrand returned {fx!r} at x={x!r}", abscissa=x)
    return fx


def _gk15(f: Callable[[float], float], a: float,
          b: float) -> tuple[float, float, float]:
    """One Gauss-Kronrod panel on [a, b]; returns (kronrod, error, int |f|).

    The error estimate is the QUADPACK one: |K - G| rescaled by the panel's
    mean absolute deviation, which is pessimistic on under-resolved panels.
    """
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fv = [0.0] * 15
    fv[7] = f(c)
    for j in range(7):
        dx = h * _XGK[j]
        fv[j] = f(c - dx)
        fv[14 - j] = f(c + dx)
    kron = _WGK[7] * fv[7]
    gauss = _WG[3] * fv[7]
    absint = _WGK[7] * abs(fv[7])
    for j in range(7):
        pair = fv[j] + fv[14 - j]
        kron += _WGK[j] * pair
        absint += _WGK[j] * (abs(fv[j]) + abs(fv[14 - j]))
        if j % 2 == 1:
            gauss += _WG[j // 2] * pair
    mean = 0.5 * kron
    asc = _WGK[7] * abs(fv[7] - mean)
    for j in range(7):
        asc += _WGK[j] * (abs(fv[j] - mean) + abs(fv[14 - j] - mean))
    h = abs(h)
    err = abs((kron - gauss) * h)
    asc *= h
    if asc != 0.0 and err != 0.0:
        err = asc * min(1.0, (200.0 * err / asc) ** 1.5)
    return kron * (b - a) * 0.5, err, absint * h


def _tail_panels(f: Callable[[float], float], edge: float, direction: int,
                 negligible: float) -> list[tuple[float, float, tuple[float, float, float]]]:
    panels = []
    quiet = 0
    lo, width = edge, TAIL_SCALE
    for _ in range(MAX_TAIL_PANELS):
        hi = lo + direction * width
        a, b = (lo, hi) if direction > 0 else (hi, lo)
        res = _gk15(f, a, b)
        panels.append((a, b, res))
        quiet = quiet + 1 if res[2] <= negligible else 0
        if quiet == 2:
            return panels
        lo, width = hi, 2.0 * width
    raise QuadratureError(f"integrand does not decay beyond x={lo!r}", abscissa=lo)


def integrate(f: Callable[[float], float], breakpoints: Sequence[float] = (),
              tail_decay_hint: str = "none", tol: float = DEFAULT_TOL,
              max_subdivisions: int = MAX_SUBDIVISIONS) -> QuadratureResult:
    """Integrate ``f`` over the pieces delimited by ``breakpoints``.

    With ``tail_decay_hint="exponential"`` the two unbounded tails beyond the
    outermost breakpoints are included (the integrand must already be decaying
    there: a bump far out behind two empty panels would be missed); with ``"none"`` only the finite span
    ``[breakpoints[0], breakpoints[-1]]`` is integrated.  Panels are refined
    where the Gauss/Kronrod disagreement is largest until the summed error
    estimate drops below ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if tail_decay_hint not in ("none", "exponential"):
        raise ValueError(f"unknown tail_decay_hint {tail_decay_hint!r}")
    bps = [float(b) for b in breakpoints]
    if any(not math.isfinite(b) for b in bps):
        raise ValueError("breakpoints must be finite")
    if any(b1 < b0 for b0, b1 in zip(bps, bps[1:])):
        raise ValueError("breakpoints must be sorted ascending")
    tails = tail_decay_hint == "exponential"
    if tails and not bps:
        bps = [0.0]
    if not tails and len(bps) < 2:
        raise ValueError("need at least two breakpoints without tails")

    def g(x):
        return _check(f(x), x)

    panels = [(lo, hi, _gk15(g, lo, hi)) for lo, hi in zip(bps[:-1], bps[1:]) if hi > lo]
    if tails:
        negligible = 1e-3 * tol
        panels = (_tail_panels(g, bps[0], -1, negligible)[::-1] + panels
                  + _tail_panels(g, bps[-1], 1, negligible))

    heap: list[tuple[float, int, float, float, float, float]] = []
    total = total_err = total_abs = 0.0
    for counter, (a, b, (val, err, absint)) in enumerate(panels):
        total += val
        total_err += err
        total_abs += absint
        heapq.heappush(heap, (-err, counter, a, b, val, absint))
    counter = len(heap)

    subdivisions = len(heap)
    while total_err > tol:
        # roundoff floor: further splitting cannot improve the estimate
        if total_err <= 50 * np.finfo(float).eps * total_abs:
            break
        if subdivisions >= max_subdivisions:
            raise QuadratureError(
                f"no convergence after {subdivisions} panels "
                f"(error estimate {total_err:.3e} > tol {tol:.3e})",
                estimate=total, error_estimate=total_err)
        neg_err, _, a, b, val, absint = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        total -= val
        total_err += neg_err
        total_abs -= absint
        for lo, hi in ((a, mid), (mid, b)):
            v, e, ab = _gk15(g, lo, hi)
            total += v
            total_err += e
            total_abs += ab
            heapq.heappush(heap, (-e, counter, lo, hi, v, ab))
            counter += 1
        subdivisions += 1

    # re-sum from the panels to shed accumulated cancellation in the running totals
    value = math.fsum(item[4] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return QuadratureResult(value=value, error_estimate=err, subdivisions=subdivisions)


# --------------------------------------------------------------------------
# fits
# --------------------------------------------------------------------------

def fit_line(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Ordinary least-squares line; returns (slope, intercept, r_squared)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points for a line fit")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("abscissae are all equal")
    slope = float(np.sum((x - xm) * (y - ym))) / sxx
    intercept = float(ym - slope * xm)
    ss_tot = float(np.sum((y - ym) ** 2))
    ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, intercept, min(1.0, max(0.0, r2))


def fit_power_law(samples: Sequence[tuple[float, float]]) -> PowerLawFit:
    """Fit ``v = c * t**k`` by least squares on (log t, log v)."""
    if len(samples) < 2:
        raise ValueError("fit_power_law needs at least two samples")
    for i, (t, v) in enumerate(samples):
        if not (t > 0 and math.isfinite(t)):
            raise ValueError(f"sample {i}: t={t!r} must be positive")
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"sample {i}: v={v!r} must be positive")
    slope, intercept, r2 = fit_line([math.log(t) for t, _ in samples],
                                    [math.log(v) for _, v in samples])
    return PowerLawFit(slope=slope, intercept=intercept, r_squared=r2,
                       points_used=len(samples))


# --------------------------------------------------------------------------
# empirical distributions
# --------------------------------------------------------------------------

def ks_distance(sample: EmpiricalDistribution,
                cdf: Callable[[float], float]) -> float:
    """Sup-norm distance between the empirical CDF of ``sample`` and ``cdf``."""
    n = sample.size
    if n == 0:
        raise ValueError("ks_distance of an empty sample")
    d = 0.0
    for i, x in enumerate(sample.sorted_values):
        fx = cdf(x)
        d = max(d, (i + 1) / n - fx, fx - i / n)
    return min(1.0, max(0.0, d))
