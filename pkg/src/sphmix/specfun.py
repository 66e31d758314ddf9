"""Scalar special functions used by the spherical families and mixing laws.

Covers the modified Bessel function of the first kind I_a, the confluent
hypergeometric function 1F1, the parabolic cylinder function D_nu for
negative index, and the Gegenbauer / Chebyshev polynomial evaluators with
their max-normalized variant D_n^lam.

Transcendental functions operate on scalars and provide log-scale variants
for overflow safety; the polynomial evaluators accept scalars or arrays in
the argument ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

# exp() overflows just above 709, and I_a(x) ~ e^x / sqrt(2 pi x); callers
# needing larger arguments must use bessel_i_log or bessel_i_ratio.
BESSEL_LINEAR_MAX = 700.0

_SERIES_MAX_TERMS = 20000
_PCD_MAX_NODES = 4096


@dataclass(frozen=True)
class Order:
    """Index pair: a Bessel/1F1 order ``alpha`` and an ultraspherical index
    ``lam``; for points on the sphere of dimension d, lam = (d - 1) / 2."""

    alpha: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise DomainError("Order.alpha must be nonnegative")
        if self.lam < 0:
            raise DomainError("Order.lam must be nonnegative")

    @classmethod
    def from_dimension(cls, d: int, alpha: float = 0.0) -> "Order":
        if d < 1:
            raise DomainError("dimension must be a positive integer")
        return cls(alpha=alpha, lam=0.5 * (d - 1))


def log_pochhammer(a: float, n: int) -> float:
    """log (a)_n = log Gamma(a + n) - log Gamma(a) for a > 0, integer n >= 0."""
    if n < 0:
        raise DomainError("pochhammer index must be nonnegative")
    if n == 0:
        return 0.0
    if a <= 0:
        raise DomainError("pochhammer base must be positive")
    return math.lgamma(a + n) - math.lgamma(a)


def pochhammer(a: float, n: int) -> float:
    return math.exp(log_pochhammer(a, n))


def _bessel_i_small(alpha: float, x: float) -> float:
    # ascending series, all terms positive; safe up to x ~ 30 without scaling
    term = math.exp(alpha * math.log(0.5 * x) - math.lgamma(alpha + 1.0))
    total = term
    q = 0.25 * x * x
    n = 0
    while True:
        n += 1
        term *= q / (n * (n + alpha))
        total += term
        if term <= 1e-17 * total:
            return total
        if n > _SERIES_MAX_TERMS:
            raise ConvergenceError("Bessel series did not converge")


def _bessel_i_log_scaled(alpha: float, x: float) -> float:
    # log-space series with max-term scaling; terms peak near n ~ x/2
    lh = math.log(0.5 * x)
    logs = []
    lmax = -math.inf
    n = 0
    while True:
        ln = (2 * n + alpha) * lh - math.lgamma(n + 1.0) - math.lgamma(n + alpha + 1.0)
        logs.append(ln)
        if ln > lmax:
            lmax = ln
        if n > 0.5 * x and ln < lmax - 45.0:
            break
        n += 1
        if n > _SERIES_MAX_TERMS:
            raise ConvergenceError("Bessel log-series did not converge")
    arr = np.asarray(logs)
    return lmax + math.log(np.exp(arr - lmax).sum())


def bessel_i(alpha: float, x: float) -> float:
    """Modified Bessel function I_alpha(x) = sum_n (x/2)^(2n+alpha) / (n! Gamma(n+alpha+1)).

    Requires alpha >= 0 and x >= 0.  Raises OverflowError beyond the linear
    representation range; use :func:`bessel_i_log` or :func:`bessel_i_ratio`
    there instead.
    """
    if alpha < 0 or x < 0:
        raise DomainError("bessel_i requires alpha >= 0 and x >= 0")
    if x == 0.0:
        return 1.0 if alpha == 0 else 0.0
    if x > BESSEL_LINEAR_MAX:
        raise OverflowError(
            f"bessel_i overflows for x > {BESSEL_LINEAR_MAX:g}; "
            "use bessel_i_log or bessel_i_ratio"
        )
    if x <= 30.0:
        return _bessel_i_small(alpha, x)
    return math.exp(_bessel_i_log_scaled(alpha, x))


def bessel_i_log(alpha: float, x: float) -> float:
    """log I_alpha(x) for alpha >= 0, x > 0; stable for large x."""
    if alpha < 0 or x < 0:
        raise DomainError("bessel_i_log requires alpha >= 0 and x >= 0")
    if x == 0.0:
        if alpha == 0:
            return 0.0
        return -math.inf
    if x <= 30.0:
        return math.log(_bessel_i_small(alpha, x))
    return _bessel_i_log_scaled(alpha, x)


def bessel_i_ratio(lam: float, n: int, x: float) -> float:
    """I_(lam+n)(x) / I_lam(x), computed as a difference of log values.

    Lies in (0, 1] for n >= 0 and is strictly decreasing in n.
    """
    if x <= 0:
        raise DomainError("bessel_i_ratio requires x > 0")
    if n < 0:
        raise DomainError("bessel_i_ratio requires n >= 0")
    if n == 0:
        return 1.0
    return math.exp(bessel_i_log(lam + n, x) - bessel_i_log(lam, x))


def _hyp1f1_series(a: float, b: float, x: float) -> float:
    term = 1.0
    total = 1.0
    scale = 1.0
    n = 0
    while True:
        term *= (a + n) * x / ((b + n) * (n + 1.0))
        total += term
        n += 1
        scale = max(scale, abs(term))
        if abs(term) <= 1e-17 * max(abs(total), 1e-300) and n > 4:
            return total
        if n > _SERIES_MAX_TERMS:
            raise ConvergenceError("1F1 series did not converge")


def hyp1f1(a: float, b: float, x: float) -> float:
    """Confluent hypergeometric 1F1(a; b; x) = sum_n (a)_n / ((b)_n n!) x^n.

    Requires a > 0 and b > 0.  For x < -8 the Kummer transformation
    1F1(a;b;x) = e^x 1F1(b-a;b;-x) is applied so the series has positive
    terms; moderately negative x uses the direct (alternating) series, which
    keeps the two evaluation routes independent where identities are tested.
    """
    if a <= 0 or b <= 0:
        raise DomainError("hyp1f1 requires a > 0 and b > 0")
    if x == 0.0:
        return 1.0
    if x < -8.0 and b - a > 0:
        return math.exp(x) * _hyp1f1_series(b - a, b, -x)
    return _hyp1f1_series(a, b, x)


def hyp1f1_log(a: float, b: float, x: float) -> float:
    """log 1F1(a; b; x); for x >= 0 summed in log space with max-term scaling."""
    if a <= 0 or b <= 0:
        raise DomainError("hyp1f1_log requires a > 0 and b > 0")
    if x == 0.0:
        return 0.0
    if x < 0:
        if b - a <= 0:
            return math.log(hyp1f1(a, b, x))
        return x + hyp1f1_log(b - a, b, -x)
    lx = math.log(x)
    logs = []
    lmax = -math.inf
    n = 0
    while True:
        ln = (
            log_pochhammer(a, n)
            - log_pochhammer(b, n)
            + n * lx
            - math.lgamma(n + 1.0)
        )
        logs.append(ln)
        if ln > lmax:
            lmax = ln
        if n > x and ln < lmax - 45.0:
            break
        n += 1
        if n > _SERIES_MAX_TERMS:
            raise ConvergenceError("1F1 log-series did not converge")
    arr = np.asarray(logs)
    return lmax + math.log(np.exp(arr - lmax).sum())


def _pcd_log_integral(a: float, z: float) -> float:
    """log of int_0^inf t^a exp(-z t - t^2/2) dt for a > -1.

    Gauss-Legendre panels: [0, 1] under the substitution t = u^8 (absorbs the
    algebraic endpoint behaviour for fractional a), then width-doubling plain
    panels; the node count doubles until two successive estimates agree to
    1e-12 relative.
    """
    tpeak = 0.5 * (-z + math.sqrt(z * z + 4.0 * a)) if a > 0 else max(-z, 0.0)
    if tpeak > 0:
        big = a * math.log(tpeak) - z * tpeak - 0.5 * tpeak * tpeak
    else:
        big = 0.0

    def scaled(t):
        return np.exp(a * np.log(t) - z * t - 0.5 * t * t - big)

    def estimate(n_nodes: int) -> float:
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        # first panel [0,1] via t = u^8: integrand 8 u^(8a+7) e^(-z u^8 - u^16/2)
        u = 0.5 * (x + 1.0)
        t = u**8
        first = 0.5 * np.sum(
            w * 8.0 * np.exp((8.0 * a + 7.0) * np.log(u) - z * t - 0.5 * t * t - big)
        )
        total = first
        lo, hi = 1.0, 2.0
        while True:
            tm = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            piece = 0.5 * (hi - lo) * np.sum(w * scaled(tm))
            total += piece
            if hi > tpeak and piece <= 1e-18 * max(total, 1e-300):
                break
            lo, hi = hi, 2.0 * hi
        return total

    n = 32
    prev = estimate(n)
    while n < _PCD_MAX_NODES:
        n *= 2
        cur = estimate(n)
        if abs(cur - prev) <= 1e-12 * max(abs(cur), 1e-300):
            return big + math.log(cur)
        prev = cur
    raise ConvergenceError("parabolic cylinder quadrature did not stabilize")


def parabolic_cylinder_d_log(nu: float, z: float) -> float:
    """log D_nu(z) for nu < 0 via the integral representation

        D_nu(z) = e^(-z^2/4) / Gamma(-nu) * int_0^inf t^(-nu-1) e^(-zt-t^2/2) dt.
    """
    if nu >= 0:
        raise DomainError("parabolic_cylinder_d requires nu < 0")
    return -0.25 * z * z - math.lgamma(-nu) + _pcd_log_integral(-nu - 1.0, z)


def parabolic_cylinder_d(nu: float, z: float) -> float:
    """Parabolic cylinder function D_nu(z) for nu < 0; always positive."""
    return math.exp(parabolic_cylinder_d_log(nu, z))


def _check_unit_interval(t):
    arr = np.asarray(t, dtype=float)
    if np.any(np.abs(arr) > 1.0 + 1e-9):
        raise DomainError("polynomial argument must lie in [-1, 1]")
    return np.clip(arr, -1.0, 1.0)


def chebyshev_t(n: int, t):
    """Chebyshev polynomial T_n(t) = cos(n arccos t), branch-free on [-1, 1]."""
    arr = _check_unit_interval(t)
    out = np.cos(n * np.arccos(arr))
    return float(out) if np.isscalar(t) or out.ndim == 0 else out


def gegenbauer_c(n: int, lam: float, t):
    """Gegenbauer polynomial C_n^lam(t) for lam > 0 by three-term recurrence."""
    if lam <= 0:
        raise DomainError("gegenbauer_c requires lam > 0 (lam = 0 is the Chebyshev branch)")
    arr = _check_unit_interval(t)
    prev = np.ones_like(arr)
    if n == 0:
        out = prev
    else:
        cur = 2.0 * lam * arr
        for k in range(2, n + 1):
            prev, cur = cur, (2.0 * arr * (k + lam - 1.0) * cur - (k + 2.0 * lam - 2.0) * prev) / k
        out = cur
    return float(out) if np.isscalar(t) or out.ndim == 0 else out


def gegenbauer_c_one(n: int, lam: float) -> float:
    """C_n^lam(1) = (2 lam)_n / n!, the maximum of |C_n^lam| on [-1, 1]."""
    if lam <= 0:
        raise DomainError("gegenbauer_c_one requires lam > 0")
    return math.exp(log_pochhammer(2.0 * lam, n) - math.lgamma(n + 1.0))


def ultraspherical_d(n: int, lam: float, t):
    """Max-normalized ultraspherical polynomial:

    T_n(t) for lam = 0, else C_n^lam(t) / C_n^lam(1).  Bounded by 1 in
    absolute value on [-1, 1], with value 1 at t = 1.
    """
    if lam < 0:
        raise DomainError("ultraspherical_d requires lam >= 0")
    if n == 0:
        arr = _check_unit_interval(t)
        out = np.ones_like(arr)
        return float(out) if np.isscalar(t) or out.ndim == 0 else out
    if lam == 0.0:
        return chebyshev_t(n, t)
    scale = gegenbauer_c_one(n, lam)
    raw = gegenbauer_c(n, lam, t)
    return raw / scale
