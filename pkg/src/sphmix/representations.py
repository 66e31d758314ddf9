"""Discrete mixture representations of the spherical families.

A representation states that a target family equals a convex combination of
an indexed mixing base,

    target(eta, rho) = sum_n w_rho(n) * base_n(eta),

and is materialized here as the truncated weight table, the base
constructor, the target family, and the validity interval of the scalar
parameter.  Verification compares latitude densities on a Chebyshev-spaced
grid, which suffices because every member is isotropic about the same pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, ValidityError
from .mixing import (
    BetaBudget,
    MixingLaw,
    beta_unit_root,
    brownian_delta_weights,
    chs_law,
    death_process_law,
    dpc_law,
    sample_mixing,
    turan_delta_weights,
    turan_sigma_weights,
    vmf1_delta_weights,
    vmfd_delta_weights,
    wc_delta_weights,
    wn_delta_weights,
)
from .oracle import gauss_gegenbauer_rule, h_d, integrate_latitude, lam_of_dim
from .specfun import bessel_i_log, gegenbauer_c_one, ultraspherical_d
from .spherical import (
    SpherePoint,
    SphericalFamily,
    angular_gaussian,
    cosine_partial_sum,
    delta_base,
    heat_kernel_family,
    latitude_g,
    sample,
    sample_latitudes,
    spherical_beta,
    spherical_power,
    sqrt_poisson_kernel,
    von_mises_fisher,
    watson,
    wrapped_cauchy,
    wrapped_normal,
    polar_compose_batch,
    sample_longitudes,
)

_BOUNDARY_SLACK = 1e-9
_WEIGHT_CUMULATIVE_CUT = 1e-10

THEOREM_SELECTORS = (
    "vmf-sbeta",
    "watson-sp",
    "watson-sbeta",
    "ag-sbeta",
    "wc-delta",
    "wn-delta",
    "vmf1-delta",
    "vmfd-delta",
    "turan-delta",
    "turan-sigma",
    "brownian-delta",
    "brownian-sbeta",
)


def gamma_constant(n: int, lam: float) -> float:
    """Self-mixing contraction factor: 1 for n = 0; 1/2 on the circle;
    1 / ((1 + n/lam) C_n^lam(1)) for lam > 0."""
    if n < 0:
        raise DomainError("gamma_constant requires n >= 0")
    if n == 0:
        return 1.0
    if lam < 0:
        raise DomainError("gamma_constant requires lam >= 0")
    if lam == 0.0:
        return 0.5
    return 1.0 / ((1.0 + n / lam) * gegenbauer_c_one(n, lam))


@dataclass(frozen=True)
class GammaConstants:
    """The contraction sequence n -> gamma_n for a fixed ultraspherical index."""

    lam: float

    def __call__(self, n: int) -> float:
        return gamma_constant(n, self.lam)

    def values(self, n_max: int) -> np.ndarray:
        return np.asarray([gamma_constant(n, self.lam) for n in range(n_max + 1)])


@dataclass(frozen=True)
class MixtureRepresentation:
    name: str
    weights: MixingLaw
    base: Callable[[int], SphericalFamily]
    target: SphericalFamily
    validity: tuple[float, float]
    param: float


_root_cache: dict[tuple[str, float], float] = {}


def _cached_root(family: str, lam: float = 0.0) -> float:
    key = (family, lam)
    if key not in _root_cache:
        _root_cache[key] = beta_unit_root(BetaBudget(family, lam))
    return _root_cache[key]


def _require(cond: bool, message: str):
    if not cond:
        raise ValidityError(message)


def build_representation(
    theorem: str, eta: SpherePoint, rho: float, d: int | None = None
) -> MixtureRepresentation:
    """Construct the named mixture representation at parameter ``rho``
    (a time parameter for the heat-flow selectors).

    Raises ValidityError outside the representation's parameter range.
    """
    if d is not None and d != eta.d:
        raise DomainError("explicit dimension disagrees with the pole")
    d = eta.d
    lam = lam_of_dim(d)
    rho = float(rho)

    if theorem == "vmf-sbeta":
        _require(rho >= 0, "vmf-sbeta requires rho >= 0")
        weights = chs_law(lam + 0.5, 2.0 * lam + 1.0, 2.0 * rho)
        return MixtureRepresentation(
            theorem, weights, lambda n: spherical_beta(eta, 1.0, n + 1.0),
            von_mises_fisher(eta, rho), (0.0, math.inf), rho,
        )
    if theorem == "watson-sp":
        _require(rho >= 0, "watson-sp requires rho >= 0")
        weights = chs_law(0.5, lam + 1.0, rho)
        return MixtureRepresentation(
            theorem, weights, lambda n: spherical_power(eta, float(n)),
            watson(eta, rho), (0.0, math.inf), rho,
        )
    if theorem == "watson-sbeta":
        _require(rho <= 0, "watson-sbeta requires rho <= 0")
        weights = chs_law(lam + 0.5, lam + 1.0, -rho)
        return MixtureRepresentation(
            theorem, weights, lambda n: spherical_beta(eta, n + 1.0, n + 1.0),
            watson(eta, rho), (-math.inf, 0.0), rho,
        )
    if theorem == "ag-sbeta":
        _require(rho > 0, "ag-sbeta requires rho > 0")
        weights = dpc_law(lam + 1.0, rho)
        return MixtureRepresentation(
            theorem, weights, lambda n: spherical_beta(eta, 1.0, n + 1.0),
            angular_gaussian(eta, rho), (0.0, math.inf), rho,
        )
    if theorem == "wc-delta":
        _require(d == 1, "wc-delta lives on the circle")
        _require(0.0 <= rho <= 1.0 / 3.0 + _BOUNDARY_SLACK, "wc-delta requires rho in [0, 1/3]")
        weights = wc_delta_weights(min(rho, 1.0 / 3.0))
        return MixtureRepresentation(
            theorem, weights, lambda n: delta_base(eta, n),
            wrapped_cauchy(eta, rho), (0.0, 1.0 / 3.0), rho,
        )
    if theorem == "wn-delta":
        _require(d == 1, "wn-delta lives on the circle")
        rho0 = _cached_root("wn")
        _require(rho >= rho0 - _BOUNDARY_SLACK, f"wn-delta requires rho >= {rho0:.6f}")
        weights = wn_delta_weights(max(rho, rho0))
        return MixtureRepresentation(
            theorem, weights, lambda n: delta_base(eta, n),
            wrapped_normal(eta, rho), (rho0, math.inf), rho,
        )
    if theorem == "vmf1-delta":
        _require(d == 1, "vmf1-delta lives on the circle")
        rho0 = _cached_root("vmf1")
        _require(0.0 <= rho <= rho0 + _BOUNDARY_SLACK, f"vmf1-delta requires rho in [0, {rho0:.6f}]")
        weights = vmf1_delta_weights(min(rho, rho0))
        return MixtureRepresentation(
            theorem, weights, lambda n: delta_base(eta, n),
            von_mises_fisher(eta, rho), (0.0, rho0), rho,
        )
    if theorem == "vmfd-delta":
        _require(d >= 2, "vmfd-delta requires d >= 2 (use vmf1-delta on the circle)")
        rho0 = _cached_root("vmfd", lam)
        _require(0.0 <= rho <= rho0 + _BOUNDARY_SLACK, f"vmfd-delta requires rho in [0, {rho0:.6f}]")
        weights = vmfd_delta_weights(lam, min(rho, rho0)) if rho > 0 else vmfd_delta_weights(lam, 0.0)
        return MixtureRepresentation(
            theorem, weights, lambda n: delta_base(eta, n),
            von_mises_fisher(eta, rho), (0.0, rho0), rho,
        )
    if theorem == "turan-delta":
        _require(d == 1, "turan-delta lives on the circle")
        # budget (1 - rho)^(-1/2) - 1 crosses 1 at rho = 3/4
        _require(0.0 <= rho <= 0.75 + _BOUNDARY_SLACK, "turan-delta requires rho in [0, 3/4]")
        weights = turan_delta_weights(min(rho, 0.75))
        return MixtureRepresentation(
            theorem, weights, lambda n: delta_base(eta, n),
            sqrt_poisson_kernel(eta, rho), (0.0, 0.75), rho,
        )
    if theorem == "turan-sigma":
        _require(d == 1, "turan-sigma lives on the circle")
        _require(0.0 <= rho < 1.0, "turan-sigma requires rho in [0, 1)")
        weights = turan_sigma_weights(rho)
        return MixtureRepresentation(
            theorem, weights, lambda n: cosine_partial_sum(eta, n),
            sqrt_poisson_kernel(eta, rho), (0.0, 1.0), rho,
        )
    if theorem == "brownian-delta":
        _require(d >= 2, "brownian-delta requires d >= 2")
        t0 = _cached_root("brownian", lam)
        _require(rho >= t0 - _BOUNDARY_SLACK, f"brownian-delta requires t >= {t0:.6f}")
        weights = brownian_delta_weights(lam, max(rho, t0))
        return MixtureRepresentation(
            theorem, weights, lambda n: delta_base(eta, n),
            heat_kernel_family(eta, rho), (t0, math.inf), rho,
        )
    if theorem == "brownian-sbeta":
        _require(d >= 2, "brownian-sbeta requires d >= 2")
        _require(rho > 0, "brownian-sbeta requires t > 0")
        weights = death_process_law(rho, d)
        return MixtureRepresentation(
            theorem, weights, lambda n: spherical_beta(eta, 1.0, n + 1.0),
            heat_kernel_family(eta, rho), (0.0, math.inf), rho,
        )
    raise DomainError(f"unknown theorem selector {theorem!r}; choose from {THEOREM_SELECTORS}")


# ---------------------------------------------------------------------------
# verification


def _active_terms(weights: MixingLaw) -> int:
    cum = np.cumsum(weights.pmf)
    return min(len(weights.pmf), int(np.searchsorted(cum, 1.0 - _WEIGHT_CUMULATIVE_CUT)) + 1)


def mixture_latitude_density(rep: MixtureRepresentation, t) -> np.ndarray:
    """Latitude density of the truncated mixture, cut once the cumulative
    weight reaches 1 - 1e-10."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n_active = _active_terms(rep.weights)
    out = np.zeros_like(t)
    for n in range(n_active):
        w = rep.weights.pmf[n]
        if w == 0.0:
            continue
        out += w * latitude_g(rep.base(n))(t)
    return out


def truncation_residual(rep: MixtureRepresentation, t_grid) -> float:
    """Bound on the mixture mass ignored by the cumulative cut, scaled by the
    largest discarded base density on the grid."""
    n_active = _active_terms(rep.weights)
    pmf = rep.weights.pmf
    residual = 0.0
    for n in range(n_active, len(pmf)):
        if pmf[n] > 0:
            residual += pmf[n] * float(np.max(latitude_g(rep.base(n))(t_grid)))
    sup_next = float(np.max(latitude_g(rep.base(len(pmf)))(t_grid)))
    return residual + rep.weights.tail_bound * sup_next


def chebyshev_grid(grid_size: int) -> np.ndarray:
    return np.cos(np.linspace(0.0, math.pi, grid_size))


def verify_representation(rep: MixtureRepresentation, grid_size: int = 201) -> float:
    """Sup distance between the target latitude density and the truncated
    mixture latitude density on a Chebyshev-spaced grid of [-1, 1]."""
    grid = chebyshev_grid(grid_size)
    target = latitude_g(rep.target)(grid)
    mix = mixture_latitude_density(rep, grid)
    return float(np.max(np.abs(target - mix)))


def verify_report(rep: MixtureRepresentation, grid_size: int = 201) -> dict:
    grid = chebyshev_grid(grid_size)
    target = latitude_g(rep.target)(grid)
    mix = mixture_latitude_density(rep, grid)
    return {
        "theorem": rep.name,
        "param": rep.param,
        "sup_error": float(np.max(np.abs(target - mix))),
        "truncation": rep.weights.truncation,
        "tail_bound": rep.weights.tail_bound,
        "residual_bound": truncation_residual(rep, grid),
    }


# ---------------------------------------------------------------------------
# two-stage sampling


def two_stage_sample(rep: MixtureRepresentation, rng: np.random.Generator) -> SpherePoint:
    """Exact draw from the target: first the index, then the base member."""
    n = sample_mixing(rep.weights, rng)
    return sample(rep.base(n), rng)


def two_stage_latitudes(rep: MixtureRepresentation, size: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized latitudes of two-stage draws (grouped by mixing index)."""
    idx = sample_mixing(rep.weights, rng, size=size)
    out = np.empty(size, dtype=float)
    for n in np.unique(idx):
        mask = idx == n
        out[mask] = sample_latitudes(rep.base(int(n)), int(mask.sum()), rng)
    return out


# ---------------------------------------------------------------------------
# composition algebra


def compose(weights_a, weights_b, lam: float) -> np.ndarray:
    """Weight sequence of the composed kernel:
    w(n) = gamma_n * a(n) * b(n) for n >= 1, with the deficit at index 0."""
    a = np.asarray(weights_a, dtype=float)
    b = np.asarray(weights_b, dtype=float)
    m = min(len(a), len(b))
    out = np.zeros(max(m, 1))
    for n in range(1, m):
        out[n] = gamma_constant(n, lam) * a[n] * b[n]
    out[0] = 1.0 - out[1:].sum()
    return out


def self_mix_check(
    n: int,
    m: int,
    alpha: float,
    beta: float,
    lam: float,
    mc_samples: int,
    rng: np.random.Generator | None = None,
    bins: int = 32,
) -> float:
    """Monte-Carlo check of the two-step surface-harmonic kernel composition.

    Draws zeta from the order-n base about the pole, then X from the order-m
    base about zeta, and compares the binned latitude law of X against the
    closed form: order-n base with amplitude gamma_n alpha beta when m = n,
    the uniform law otherwise.  Returns the max absolute density deviation.
    """
    if abs(alpha) > 1 or abs(beta) > 1:
        raise DomainError("amplitudes must lie in [-1, 1]")
    d = int(round(2 * lam + 1))
    if abs(2 * lam + 1 - d) > 1e-9 or d < 1:
        raise DomainError("lam must correspond to an integer dimension")
    rng = np.random.default_rng(0) if rng is None else rng
    eta = SpherePoint.pole(d)
    y1 = sample_latitudes(delta_base(eta, n, beta), mc_samples, rng)
    zeta = polar_compose_batch(
        np.tile(eta.coords, (mc_samples, 1)), y1, sample_longitudes(d, rng, mc_samples)
    )
    y2 = sample_latitudes(delta_base(eta, m, alpha), mc_samples, rng)
    x = polar_compose_batch(zeta, y2, sample_longitudes(d, rng, mc_samples))
    lat = x @ eta.coords

    amp = gamma_constant(n, lam) * alpha * beta if m == n else 0.0
    predicted = delta_base(eta, n, amp) if amp != 0.0 else delta_base(eta, 0)
    g = latitude_g(predicted)

    edges = np.linspace(-1.0, 1.0, bins + 1)
    counts, _ = np.histogram(lat, bins=edges)
    emp = counts / mc_samples
    # bin probabilities of the closed form under nu_d, one Legendre rule per bin
    gl_x, gl_w = np.polynomial.legendre.leggauss(64)
    probs = np.empty(bins)
    for i in range(bins):
        lo, hi = edges[i], edges[i + 1]
        tt = 0.5 * (hi - lo) * gl_x + 0.5 * (hi + lo)
        probs[i] = 0.5 * (hi - lo) * np.sum(gl_w * g(tt) * h_d(tt, d))
    binwidth = edges[1] - edges[0]
    return float(np.max(np.abs(emp - probs)) / binwidth)


def harmonic_product_integral(n: int, m: int, eta: SpherePoint, xi: SpherePoint) -> float:
    """Quadrature value of int D_m(eta . x) D_n(xi . x) d unif(x), reduced to
    a double latitude integral through the polar decomposition about eta."""
    if eta.d != xi.d:
        raise DomainError("poles must share a dimension")
    d = eta.d
    lam = lam_of_dim(d)
    s = eta.dot(xi)
    s = min(1.0, max(-1.0, s))
    q = 2 * (n + m) + 8
    rule_y = gauss_gegenbauer_rule(q, d)
    if d == 1:
        v_nodes = np.array([-1.0, 1.0])
        v_weights = np.array([0.5, 0.5])
    else:
        rule_v = gauss_gegenbauer_rule(q, d - 1)
        v_nodes, v_weights = rule_v.nodes, rule_v.weights
    y = rule_y.nodes[:, None]
    v = v_nodes[None, :]
    inner = y * s + np.sqrt(np.clip(1.0 - y * y, 0.0, None)) * math.sqrt(max(0.0, 1.0 - s * s)) * v
    vals = ultraspherical_d(m, lam, rule_y.nodes)[:, None] * ultraspherical_d(
        n, lam, np.clip(inner, -1.0, 1.0)
    )
    return float(rule_y.weights @ (vals @ v_weights))


# ---------------------------------------------------------------------------
# expansion coefficients


def expansion_coefficients(fam: SphericalFamily, n_max: int) -> np.ndarray:
    """Surface-harmonic expansion coefficients beta_n of the latitude density,
    computed by quadrature: beta_n = <g, D_n> / gamma_n (index 0 is the mass)."""
    g = latitude_g(fam)
    lam = fam.lam
    out = np.empty(n_max + 1)
    out[0] = integrate_latitude(g, fam.d)
    for n in range(1, n_max + 1):
        raw = integrate_latitude(lambda t: g(t) * ultraspherical_d(n, lam, t), fam.d)
        out[n] = raw / gamma_constant(n, lam)
    return out


def vmf_expansion_coefficients(lam: float, rho: float, n_max: int) -> np.ndarray:
    """Closed-form coefficients of the von Mises-Fisher latitude density:
    beta_n = I_(lam+n)(rho) / (gamma_n I_lam(rho))."""
    out = np.empty(n_max + 1)
    out[0] = 1.0
    if rho == 0.0:
        out[1:] = 0.0
        return out
    lil = bessel_i_log(lam, rho)
    for n in range(1, n_max + 1):
        out[n] = math.exp(bessel_i_log(lam + n, rho) - lil) / gamma_constant(n, lam)
    return out


def wc_expansion_coefficients(rho: float, n_max: int) -> np.ndarray:
    out = np.asarray([1.0] + [2.0 * rho**n for n in range(1, n_max + 1)])
    return out


def wn_expansion_coefficients(rho: float, n_max: int) -> np.ndarray:
    return np.asarray([1.0] + [2.0 * math.exp(-0.5 * n * n * rho) for n in range(1, n_max + 1)])


def circle_kernel_compose(g_first, g_second, t, n_phi: int = 4096) -> np.ndarray:
    """Latitude density of a two-stage circle kernel: first a point at angle
    phi from the pole with density g_first(cos phi), then a point at angle
    theta whose increment has density g_second(cos(theta - phi)).

    Periodic trapezoid rule; spectrally accurate for smooth densities.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    theta = np.arccos(np.clip(t, -1.0, 1.0))
    phi = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    first = g_first(np.cos(phi))
    out = np.empty_like(t)
    for j, th in enumerate(theta):
        out[j] = np.mean(first * g_second(np.cos(th - phi)))
    return out
