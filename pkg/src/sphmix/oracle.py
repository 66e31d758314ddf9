"""Independent numerical oracles: latitude quadrature, Monte Carlo spherical
integration, and goodness-of-fit tests.

The latitude measure nu_d on [-1, 1] is the push-forward of the uniform
distribution on the d-sphere under x -> eta . x; its Lebesgue density is

    h_d(y) = Gamma(lam+1) / (Gamma(1/2) Gamma(lam+1/2)) * (1 - y^2)^(lam - 1/2)

with lam = (d - 1) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as _sp

from .errors import ConvergenceError, DomainError

_MAX_QUAD_NODES = 2**14


def lam_of_dim(d: int) -> float:
    if d < 1:
        raise DomainError("dimension must be >= 1")
    return 0.5 * (d - 1)


def latitude_density_constant(d: int) -> float:
    """Normalization of h_d: Gamma(lam+1) / (Gamma(1/2) Gamma(lam+1/2))."""
    lam = lam_of_dim(d)
    return math.exp(
        math.lgamma(lam + 1.0) - math.lgamma(0.5) - math.lgamma(lam + 0.5)
    )


def h_d(y, d: int):
    """Lebesgue density of nu_d on (-1, 1); integrates to 1 over dy."""
    lam = lam_of_dim(d)
    y = np.asarray(y, dtype=float)
    return latitude_density_constant(d) * (1.0 - y * y) ** (lam - 0.5)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on [-1, 1].

    GaussLegendre weights integrate against plain dy.  GaussGegenbauer
    weights embed the full nu_d measure (weight function and normalization),
    so sum(weights * f(nodes)) approximates the nu_d integral of f.
    """

    kind: str
    d: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f: Callable) -> float:
        return float(np.sum(self.weights * f(self.nodes)))


def gauss_legendre_rule(n: int, d: int = 1) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(kind="GaussLegendre", d=d, nodes=x, weights=w)


def gauss_gegenbauer_rule(n: int, d: int) -> QuadratureRule:
    """Rule exact for polynomials against nu_d (weight (1-y^2)^(lam-1/2))."""
    lam = lam_of_dim(d)
    if lam == 0.0:
        # Gauss-Chebyshev: nodes cos((2k-1) pi / 2n), equal weights pi/n;
        # with the 1/pi normalization the weights are exactly 1/n.
        k = np.arange(1, n + 1)
        x = np.cos((2 * k - 1) * np.pi / (2 * n))
        w = np.full(n, 1.0 / n)
        return QuadratureRule(kind="GaussGegenbauer", d=d, nodes=x, weights=w)
    x, w = _sp.roots_gegenbauer(n, lam)
    w = w * latitude_density_constant(d)
    return QuadratureRule(kind="GaussGegenbauer", d=d, nodes=x, weights=w)


def integrate_latitude(f: Callable, d: int, n_nodes: int | None = None) -> float:
    """nu_d integral of f over [-1, 1].

    With ``n_nodes`` given, a single Gauss-Gegenbauer rule is used; otherwise
    the node count doubles from 64 until two successive estimates agree to
    1e-12 relative, raising ConvergenceError past 2**14 nodes.
    """
    if n_nodes is not None:
        return gauss_gegenbauer_rule(n_nodes, d).integrate(f)
    n = 64
    prev = gauss_gegenbauer_rule(n, d).integrate(f)
    while n < _MAX_QUAD_NODES:
        n *= 2
        cur = gauss_gegenbauer_rule(n, d).integrate(f)
        if abs(cur - prev) <= 1e-12 * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise ConvergenceError("latitude quadrature did not stabilize at 2^14 nodes")


def sample_uniform_sphere(d: int, rng: np.random.Generator, size: int | None = None):
    """Uniform points on S_d as rows of a (size, d+1) array (or a single vector)."""
    m = 1 if size is None else int(size)
    z = rng.standard_normal((m, d + 1))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z[0] if size is None else z


def mc_integrate_sphere(
    f: Callable, d: int, n_samples: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte Carlo estimate (mean, standard error) of int f d unif(S_d)."""
    vals = f(sample_uniform_sphere(d, rng, n_samples))
    vals = np.asarray(vals, dtype=float)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_samples))


def kolmogorov_sf(t: float) -> float:
    """Survival function of the Kolmogorov distribution, 2 sum (-1)^(j-1) e^(-2 j^2 t^2)."""
    if t <= 0:
        return 1.0
    total = 0.0
    for j in range(1, 201):
        term = 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * t * t)
        total += term
        if abs(term) < 1e-16:
            break
    return min(1.0, max(0.0, total))


def ks_statistic(samples, cdf: Callable) -> float:
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    fx = np.asarray(cdf(x), dtype=float)
    upper = np.max(np.arange(1, n + 1) / n - fx)
    lower = np.max(fx - np.arange(0, n) / n)
    return float(max(upper, lower))


def ks_test(samples, cdf: Callable) -> float:
    """One-sample Kolmogorov-Smirnov p-value via the asymptotic distribution."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 100:
        raise DomainError("ks_test needs at least 100 samples")
    dstat = ks_statistic(samples, cdf)
    return kolmogorov_sf(math.sqrt(samples.size) * dstat)


def _merge_small_bins(counts: np.ndarray, expected: np.ndarray, min_expected: float):
    counts = list(counts.astype(float))
    expected = list(expected)
    while len(expected) > 1 and min(expected) < min_expected:
        i = int(np.argmin(expected))
        # fold into the smaller adjacent bin to equalize mass
        if i == 0:
            j = 1
        elif i == len(expected) - 1:
            j = i - 1
        else:
            j = i - 1 if expected[i - 1] <= expected[i + 1] else i + 1
        expected[j] += expected.pop(i)
        counts[j] += counts.pop(i)
    return np.asarray(counts), np.asarray(expected)


def chi2_test(counts, expected, min_expected: float = 5.0) -> float:
    """Pearson chi-square p-value with (bins - 1) degrees of freedom.

    Bins with expected count below ``min_expected`` are merged into their
    neighbours first; expected counts are rescaled to the observed total.
    """
    counts = np.asarray(counts, dtype=float)
    expected = np.asarray(expected, dtype=float)
    if counts.shape != expected.shape:
        raise DomainError("counts and expected must have equal length")
    expected = expected * counts.sum() / expected.sum()
    counts, expected = _merge_small_bins(counts, expected, min_expected)
    if len(expected) < 2 or expected.min() < min_expected:
        raise DomainError("insufficient expected counts after bin merging")
    stat = float(np.sum((counts - expected) ** 2 / expected))
    dof = len(expected) - 1
    return float(_sp.gammaincc(0.5 * dof, 0.5 * stat))
