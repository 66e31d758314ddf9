"""Spherical distribution families on S_d = {x in R^(d+1) : |x| = 1}.

Every family here is isotropic: its density with respect to the uniform
distribution depends on x only through the latitude eta . x, so each family
is determined by a pole ``eta`` and a latitude density g on [-1, 1] (a
density with respect to the measure nu_d, see :mod:`sphmix.oracle`).

Sampling follows the polar route: draw a latitude from g, draw an
independent longitude uniformly on the equator sphere S_(d-1), and rotate
into place with a fixed orthogonal completion of the pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError
from .oracle import h_d, lam_of_dim, latitude_density_constant
from .specfun import (
    bessel_i_log,
    chebyshev_t,
    gegenbauer_c_one,
    hyp1f1,
    log_pochhammer,
    ultraspherical_d,
)

_THETA_GRID = 8193
_UNIT_TOL = 1e-12

FAMILY_KINDS = (
    "uniform",
    "sp",
    "sbeta",
    "vmf",
    "watson",
    "ag",
    "wc",
    "wn",
    "delta",
    "sigma",
    "sqrtpk",
    "heat",
)


@dataclass(frozen=True)
class SpherePoint:
    """Unit vector in R^(d+1)."""

    coords: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise DomainError("a sphere point needs at least two coordinates")
        if abs(np.linalg.norm(arr) - 1.0) > _UNIT_TOL:
            raise DomainError("sphere point coordinates must have unit norm")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    @property
    def d(self) -> int:
        return self.coords.size - 1

    def dot(self, other: "SpherePoint") -> float:
        return float(self.coords @ other.coords)

    @classmethod
    def pole(cls, d: int) -> "SpherePoint":
        e1 = np.zeros(d + 1)
        e1[0] = 1.0
        return cls(e1)

    @classmethod
    def from_coords(cls, coords, normalize: bool = False) -> "SpherePoint":
        arr = np.asarray(coords, dtype=float)
        if normalize:
            nrm = np.linalg.norm(arr)
            if nrm == 0:
                raise DomainError("cannot normalize the zero vector")
            arr = arr / nrm
        return cls(arr)


@dataclass(frozen=True)
class SphericalFamily:
    """Tagged isotropic family member: a kind, a pole, and parameters."""

    kind: str
    eta: SpherePoint
    params: tuple = ()

    @property
    def d(self) -> int:
        return self.eta.d

    @property
    def lam(self) -> float:
        return lam_of_dim(self.d)


# ---------------------------------------------------------------------------
# constructors with domain validation


def uniform(eta: SpherePoint) -> SphericalFamily:
    return SphericalFamily("uniform", eta)


def spherical_power(eta: SpherePoint, p: float) -> SphericalFamily:
    if p <= -0.5:
        raise DomainError("spherical power requires p > -1/2")
    return SphericalFamily("sp", eta, (float(p),))


def spherical_beta(eta: SpherePoint, p: float, q: float) -> SphericalFamily:
    lam = lam_of_dim(eta.d)
    if p <= 0.5 - lam or q <= 0.5 - lam:
        raise DomainError("spherical beta requires p, q > 1/2 - lam")
    return SphericalFamily("sbeta", eta, (float(p), float(q)))


def von_mises_fisher(eta: SpherePoint, rho: float) -> SphericalFamily:
    if rho < 0:
        raise DomainError("von Mises-Fisher requires rho >= 0")
    return SphericalFamily("vmf", eta, (float(rho),))


def watson(eta: SpherePoint, rho: float) -> SphericalFamily:
    return SphericalFamily("watson", eta, (float(rho),))


def angular_gaussian(eta: SpherePoint, rho: float) -> SphericalFamily:
    if rho <= 0:
        raise DomainError("angular Gaussian requires rho > 0")
    return SphericalFamily("ag", eta, (float(rho),))


def wrapped_cauchy(eta: SpherePoint, rho: float) -> SphericalFamily:
    if eta.d != 1:
        raise DomainError("wrapped Cauchy lives on the circle (d = 1)")
    if not 0.0 <= rho < 1.0:
        raise DomainError("wrapped Cauchy requires rho in [0, 1)")
    return SphericalFamily("wc", eta, (float(rho),))


def wrapped_normal(eta: SpherePoint, rho: float) -> SphericalFamily:
    if eta.d != 1:
        raise DomainError("wrapped normal lives on the circle (d = 1)")
    if rho <= 0:
        raise DomainError("wrapped normal requires rho > 0")
    return SphericalFamily("wn", eta, (float(rho),))


def delta_base(eta: SpherePoint, n: int, alpha: float = 1.0) -> SphericalFamily:
    """Surface-harmonic base member with density 1 + alpha D_n^lam(eta . x);
    order zero is the uniform distribution."""
    if n < 0:
        raise DomainError("delta base requires n >= 0")
    if abs(alpha) > 1.0:
        raise DomainError("delta base requires |alpha| <= 1")
    if n == 0:
        return uniform(eta)
    return SphericalFamily("delta", eta, (int(n), float(alpha)))


def cosine_partial_sum(eta: SpherePoint, n: int) -> SphericalFamily:
    """Circle family with density sum_{k<=n} (1/2)_k / k! T_k(eta . x);
    positive by a classical cosine-sum inequality."""
    if eta.d != 1:
        raise DomainError("cosine partial sums live on the circle (d = 1)")
    if n < 0:
        raise DomainError("cosine partial sum requires n >= 0")
    return SphericalFamily("sigma", eta, (int(n),))


def sqrt_poisson_kernel(eta: SpherePoint, rho: float) -> SphericalFamily:
    """Circle family with latitude density

        g(t) = sqrt((1 - rho t + phi(t)) / 2) / phi(t),
        phi(t) = sqrt(1 - 2 rho t + rho^2),

    whose Chebyshev coefficients are (1/2)_n rho^n / n!."""
    if eta.d != 1:
        raise DomainError("the square-root Poisson kernel lives on the circle (d = 1)")
    if not 0.0 <= rho < 1.0:
        raise DomainError("square-root Poisson kernel requires rho in [0, 1)")
    return SphericalFamily("sqrtpk", eta, (float(rho),))


def heat_kernel_family(eta: SpherePoint, t: float) -> SphericalFamily:
    """Marginal law at time t of the isotropic heat flow (Brownian motion)
    on S_d started at eta, d >= 2."""
    if eta.d < 2:
        raise DomainError("the heat-kernel family requires d >= 2 (use wrapped normal on the circle)")
    if t <= 0:
        raise DomainError("heat-kernel family requires t > 0")
    return SphericalFamily("heat", eta, (float(t),))


# ---------------------------------------------------------------------------
# latitude densities and norming constants


def _sp_constant(lam: float, p: float) -> float:
    return math.exp(
        math.lgamma(0.5)
        + math.lgamma(p + lam + 1.0)
        - math.lgamma(p + 0.5)
        - math.lgamma(lam + 1.0)
    )


def _sbeta_constant(lam: float, p: float, q: float) -> float:
    return math.exp(
        -(p + q + 2.0 * (lam - 1.0)) * math.log(2.0)
        + math.lgamma(0.5)
        + math.lgamma(lam + 0.5)
        + math.lgamma(p + q + 2.0 * lam - 1.0)
        - math.lgamma(lam + 1.0)
        - math.lgamma(p + lam - 0.5)
        - math.lgamma(q + lam - 0.5)
    )


def _vmf_constant(lam: float, rho: float) -> float:
    if rho == 0.0:
        return 1.0
    return math.exp(
        lam * math.log(rho) - lam * math.log(2.0) - math.lgamma(lam + 1.0) - bessel_i_log(lam, rho)
    )


def _ag_coefficients(d: int, rho: float) -> np.ndarray:
    # power-series coefficients e^(-rho^2) (2 rho)^k Gamma((d+1+k)/2) / (k! Gamma((d+1)/2))
    base = -rho * rho - math.lgamma(0.5 * (d + 1))
    l2r = math.log(2.0 * rho)
    logs = []
    lmax = -math.inf
    k = 0
    while True:
        lk = base + k * l2r + math.lgamma(0.5 * (d + 1 + k)) - math.lgamma(k + 1.0)
        logs.append(lk)
        lmax = max(lmax, lk)
        if k > 4.0 * rho * rho + 8.0 and lk < lmax - 40.0:
            break
        k += 1
    return np.exp(np.asarray(logs))


def _wn_coefficients(rho: float) -> np.ndarray:
    # Chebyshev coefficients 2 e^(-n^2 rho / 2) for n >= 1, cut below 1e-16
    coefs = []
    n = 1
    while True:
        c = 2.0 * math.exp(-0.5 * n * n * rho)
        if c < 1e-16:
            break
        coefs.append(c)
        n += 1
    return np.asarray(coefs)


def _heat_coefficients(lam: float, t: float) -> np.ndarray:
    coefs = []
    n = 1
    while True:
        c = (1.0 + n / lam) * math.exp(
            log_pochhammer(2.0 * lam, n) - math.lgamma(n + 1.0) - 0.5 * n * (n + 2.0 * lam) * t
        )
        if c < 1e-16 and n > 1:
            break
        coefs.append(c)
        n += 1
    return np.asarray(coefs)


def _clenshaw_chebyshev(coefs: np.ndarray, t: np.ndarray) -> np.ndarray:
    # f(t) = sum_k coefs[k] T_k(t), evaluated by the Clenshaw recurrence
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    for a in coefs[:0:-1]:
        b1, b2 = a + 2.0 * t * b1 - b2, b1
    return coefs[0] + t * b1 - b2


def sigma_coefficients(n: int) -> np.ndarray:
    """Cosine-sum coefficients (1/2)_k / k! for k = 0..n."""
    return np.asarray(
        [math.exp(log_pochhammer(0.5, k) - math.lgamma(k + 1.0)) if k else 1.0 for k in range(n + 1)]
    )


def norming_constant(fam: SphericalFamily) -> float:
    """Closed-form multiplicative constant of the family's latitude density.

    Families whose density is written in already-normalized form (series or
    rational expressions) return 1.
    """
    lam = fam.lam
    if fam.kind == "sp":
        return _sp_constant(lam, fam.params[0])
    if fam.kind == "sbeta":
        return _sbeta_constant(lam, *fam.params)
    if fam.kind == "vmf":
        return _vmf_constant(lam, fam.params[0])
    if fam.kind == "watson":
        return 1.0 / hyp1f1(0.5, lam + 1.0, fam.params[0])
    return 1.0


def latitude_g(fam: SphericalFamily) -> Callable:
    """Vectorized latitude density g with density(fam, x) = g(eta . x)."""
    lam = fam.lam
    kind = fam.kind
    if kind == "uniform":
        return lambda t: np.ones_like(np.asarray(t, dtype=float))
    if kind == "sp":
        p = fam.params[0]
        c = _sp_constant(lam, p)
        return lambda t: c * np.abs(np.asarray(t, dtype=float)) ** (2.0 * p)
    if kind == "sbeta":
        p, q = fam.params
        c = _sbeta_constant(lam, p, q)
        return lambda t: c * (1.0 - np.asarray(t, dtype=float)) ** (p - 1.0) * (
            1.0 + np.asarray(t, dtype=float)
        ) ** (q - 1.0)
    if kind == "vmf":
        rho = fam.params[0]
        c = _vmf_constant(lam, rho)
        return lambda t: c * np.exp(rho * np.asarray(t, dtype=float))
    if kind == "watson":
        rho = fam.params[0]
        c = 1.0 / hyp1f1(0.5, lam + 1.0, rho)
        return lambda t: c * np.exp(rho * np.asarray(t, dtype=float) ** 2)
    if kind == "ag":
        coefs = _ag_coefficients(fam.d, fam.params[0])
        return lambda t: np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), coefs)
    if kind == "wc":
        rho = fam.params[0]
        return lambda t: (1.0 - rho * rho) / (
            1.0 - 2.0 * rho * np.asarray(t, dtype=float) + rho * rho
        )
    if kind == "wn":
        coefs = np.concatenate(([1.0], _wn_coefficients(fam.params[0])))
        return lambda t: _clenshaw_chebyshev(coefs, np.asarray(t, dtype=float))
    if kind == "delta":
        n, alpha = fam.params
        return lambda t: 1.0 + alpha * ultraspherical_d(int(n), lam, t)
    if kind == "sigma":
        coefs = sigma_coefficients(int(fam.params[0]))
        return lambda t: _clenshaw_chebyshev(coefs, np.asarray(t, dtype=float))
    if kind == "sqrtpk":
        rho = fam.params[0]

        def g(t):
            t = np.asarray(t, dtype=float)
            phi = np.sqrt(1.0 - 2.0 * rho * t + rho * rho)
            return np.sqrt(0.5 * (1.0 - rho * t + phi)) / phi

        return g
    if kind == "heat":
        coefs = _heat_coefficients(lam, fam.params[0])

        def g(t):
            t = np.asarray(t, dtype=float)
            out = np.ones_like(t)
            for i, c in enumerate(coefs, start=1):
                out = out + c * ultraspherical_d(i, lam, t)
            return out

        return g
    raise DomainError(f"unknown family kind {kind!r}")


def density(fam: SphericalFamily, x: SpherePoint) -> float:
    """Density of the family at x with respect to unif(S_d)."""
    if x.d != fam.d:
        raise DomainError("point and family dimensions differ")
    return float(latitude_g(fam)(fam.eta.dot(x)))


# ---------------------------------------------------------------------------
# latitude laws: cdf, quantile, and sampling


class LatitudeLaw:
    """Distribution on [-1, 1] with nu_d-density g.

    The cdf and quantile tables are built lazily on the angle scale
    t = cos(theta), where the Lebesgue density g(cos theta) sin(theta)^(2 lam)
    is free of endpoint singularities for every d.
    """

    def __init__(self, d: int, g: Callable, sampler: Callable | None = None, name: str = ""):
        self.d = int(d)
        self.g = g
        self.name = name
        self._sampler = sampler
        self._theta = None
        self._cdf_theta = None
        self._ppf = None

    def pdf(self, t):
        """nu_d-density."""
        return self.g(np.asarray(t, dtype=float))

    def lebesgue_pdf(self, t):
        t = np.asarray(t, dtype=float)
        return self.g(t) * h_d(t, self.d)

    def _ensure_tables(self):
        if self._ppf is not None:
            return
        lam = lam_of_dim(self.d)
        theta = np.linspace(0.0, math.pi, _THETA_GRID)
        vals = self.pdf(np.cos(theta)) * np.sin(theta) ** (2.0 * lam)
        vals = np.clip(vals, 0.0, None) * latitude_density_constant(self.d)
        steps = np.diff(theta)
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * steps * (vals[1:] + vals[:-1]))))
        total = cdf[-1]
        if total <= 0:
            raise DomainError("latitude density is not integrable or identically zero")
        cdf /= total
        self._theta = theta
        self._cdf_theta = cdf
        # quantile interpolation needs strictly increasing knots
        keep = np.concatenate(([True], np.diff(cdf) > 1e-15))
        keep[-1] = cdf[-2] < cdf[-1] or keep[-1]
        knots_u = cdf[keep]
        knots_theta = theta[keep]
        if knots_u[-1] < 1.0:
            knots_u = np.append(knots_u, 1.0)
            knots_theta = np.append(knots_theta, math.pi)
        self._ppf = PchipInterpolator(knots_u, knots_theta)

    def cdf(self, t):
        """P(Y <= t) = 1 - G(arccos t) with G the angle cdf."""
        self._ensure_tables()
        t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
        g_interp = np.interp(np.arccos(t), self._theta, self._cdf_theta)
        return 1.0 - g_interp

    def ppf(self, u):
        self._ensure_tables()
        u = np.asarray(u, dtype=float)
        return np.cos(self._ppf(1.0 - u))

    def sample(self, rng: np.random.Generator, size: int | None = None):
        if self._sampler is not None:
            return self._sampler(rng, size)
        self._ensure_tables()
        u = rng.uniform(size=size)
        return np.cos(self._ppf(u))


def _closed_form_sampler(fam: SphericalFamily) -> Callable | None:
    lam = fam.lam
    d = fam.d
    if fam.kind == "uniform":
        return lambda rng, size=None: 1.0 - 2.0 * rng.beta(0.5 * d, 0.5 * d, size=size)
    if fam.kind == "sbeta":
        p, q = fam.params
        a, b = p + lam - 0.5, q + lam - 0.5
        # 1 - 2 Beta(a, b): orientation puts weight near t = 1 for small a
        return lambda rng, size=None: 1.0 - 2.0 * rng.beta(a, b, size=size)
    if fam.kind == "sp":
        p = fam.params[0]

        def sampler(rng, size=None):
            s = rng.beta(p + 0.5, lam + 0.5, size=size)
            sign = rng.choice((-1.0, 1.0), size=size)
            return sign * np.sqrt(s)

        return sampler
    return None


def latitude_law(fam: SphericalFamily) -> LatitudeLaw:
    """The latitude law of the family: push-forward under x -> eta . x."""
    return LatitudeLaw(fam.d, latitude_g(fam), sampler=_closed_form_sampler(fam), name=fam.kind)


# ---------------------------------------------------------------------------
# polar composition and sampling on the sphere


def householder_from_pole(eta: np.ndarray) -> np.ndarray:
    """Deterministic orthogonal matrix with eta as first column (reflection
    that swaps e1 and eta)."""
    eta = np.asarray(eta, dtype=float)
    k = eta.size
    v = -eta.copy()
    v[0] += 1.0
    n2 = float(v @ v)
    if n2 < 1e-28:
        return np.eye(k)
    return np.eye(k) - (2.0 / n2) * np.outer(v, v)


def polar_compose(eta: SpherePoint, y: float, z: SpherePoint) -> SpherePoint:
    """Build the point at latitude y about eta with longitude direction z.

    For eta = e1 the result is (y, sqrt(1-y^2) z); general poles apply the
    Householder completion, so eta . result = y up to rounding.
    """
    if z.coords.size != eta.coords.size - 1:
        raise DomainError("longitude direction must live one dimension down")
    if abs(y) > 1.0 + 1e-12:
        raise DomainError("latitude must lie in [-1, 1]")
    y = min(1.0, max(-1.0, float(y)))
    s = math.sqrt(max(0.0, 1.0 - y * y))
    w = np.concatenate(([y], s * z.coords))
    u = householder_from_pole(eta.coords)
    x = u @ w
    x = x / np.linalg.norm(x)
    return SpherePoint(x)


def polar_compose_batch(poles: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Vectorized polar composition: rows of poles (m, d+1), latitudes y (m,),
    equator directions z (m, d); returns (m, d+1) unit rows."""
    poles = np.asarray(poles, dtype=float)
    y = np.clip(np.asarray(y, dtype=float), -1.0, 1.0)
    s = np.sqrt(np.clip(1.0 - y * y, 0.0, None))
    w = np.concatenate((y[:, None], s[:, None] * z), axis=1)
    v = -poles.copy()
    v[:, 0] += 1.0
    n2 = np.sum(v * v, axis=1)
    safe = n2 > 1e-28
    coef = np.zeros_like(n2)
    coef[safe] = 2.0 * np.sum(v[safe] * w[safe], axis=1) / n2[safe]
    x = w - coef[:, None] * v
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def sample_longitudes(d: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform points on S_(d-1) as (size, d) rows; for d = 1 these are signs."""
    z = rng.standard_normal((size, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample(fam: SphericalFamily, rng: np.random.Generator) -> SpherePoint:
    """One exact draw from the family via the latitude/longitude route."""
    y = float(latitude_law(fam).sample(rng))
    z = sample_longitudes(fam.d, rng, 1)[0]
    return polar_compose(fam.eta, y, SpherePoint(z))


def sample_batch(fam: SphericalFamily, size: int, rng: np.random.Generator) -> np.ndarray:
    y = np.asarray(latitude_law(fam).sample(rng, size=size), dtype=float)
    z = sample_longitudes(fam.d, rng, size)
    poles = np.tile(fam.eta.coords, (size, 1))
    return polar_compose_batch(poles, y, z)


def sample_latitudes(fam: SphericalFamily, size: int, rng: np.random.Generator) -> np.ndarray:
    return np.asarray(latitude_law(fam).sample(rng, size=size), dtype=float)


def polar_decompose(eta: SpherePoint, x: SpherePoint) -> tuple[float, SpherePoint]:
    """Latitude and longitude direction of x about eta.

    At the poles (x = +-eta) the longitude is undefined; the tie-break is the
    Householder image of e2, i.e. the first equator coordinate direction.
    """
    if x.d != eta.d:
        raise DomainError("point and pole dimensions differ")
    u = householder_from_pole(eta.coords)
    w = u @ x.coords  # u is symmetric orthogonal, so this is u^T x
    y = min(1.0, max(-1.0, float(w[0])))
    s = math.sqrt(max(0.0, 1.0 - y * y))
    if s < 1e-12:
        z = np.zeros(eta.d)
        z[0] = 1.0
        return y, SpherePoint(z)
    return y, SpherePoint.from_coords(w[1:], normalize=True)


def apply_rotation(fam: SphericalFamily, u: np.ndarray) -> SphericalFamily:
    """Push the family forward under an orthogonal matrix: the pole rotates,
    the kind and parameters are unchanged."""
    u = np.asarray(u, dtype=float)
    k = fam.d + 1
    if u.shape != (k, k):
        raise DomainError("rotation matrix has the wrong shape")
    if np.max(np.abs(u.T @ u - np.eye(k))) > 1e-10:
        raise DomainError("matrix is not orthogonal to 1e-10")
    eta = SpherePoint.from_coords(u @ fam.eta.coords, normalize=True)
    return SphericalFamily(fam.kind, eta, fam.params)
