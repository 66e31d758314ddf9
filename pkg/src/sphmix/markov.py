"""Markov constructions on the sphere: isotropic random walks, latitude
lumping, n-step mixture marginals, heat-flow marginals, and the almost-sure
realization of the von Mises-Fisher family on one probability space.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, MLRWarning
from .mixing import BetaBudget, MixingLaw, beta_unit_root, chs_law, mixing_quantile
from .representations import MixtureRepresentation, build_representation, gamma_constant
from .spherical import (
    LatitudeLaw,
    SpherePoint,
    SphericalFamily,
    latitude_law,
    polar_compose,
    polar_compose_batch,
    sample_longitudes,
)


@dataclass(frozen=True)
class IsotropicKernel:
    """Transition kernel whose one-step law about any pole p is the isotropic
    family with that pole; fully described by the latitude law of a step."""

    step_law: LatitudeLaw
    d: int

    @classmethod
    def from_family(cls, fam: SphericalFamily) -> "IsotropicKernel":
        return cls(step_law=latitude_law(fam), d=fam.d)


@dataclass(frozen=True)
class ChainState:
    position: SpherePoint
    step: int
    pole: SpherePoint

    @property
    def latitude(self) -> float:
        return self.pole.dot(self.position)


def chain_start(eta: SpherePoint) -> ChainState:
    return ChainState(position=eta, step=0, pole=eta)


def chain_step(kernel: IsotropicKernel, state: ChainState, rng: np.random.Generator) -> ChainState:
    """One transition: a latitude from the step law about the current
    position, an independent uniform longitude, composed in the polar frame."""
    if state.position.d != kernel.d:
        raise DomainError("state and kernel dimensions differ")
    y = float(kernel.step_law.sample(rng))
    z = SpherePoint(sample_longitudes(kernel.d, rng, 1)[0])
    return ChainState(
        position=polar_compose(state.position, y, z),
        step=state.step + 1,
        pole=state.pole,
    )


def latitude_chain(
    kernel: IsotropicKernel,
    n_steps: int,
    rng: np.random.Generator,
    eta: SpherePoint | None = None,
) -> np.ndarray:
    """The latitude process (eta . X_k) for k = 0..n_steps; starts at 1."""
    if n_steps < 1:
        raise DomainError("latitude_chain requires n_steps >= 1")
    state = chain_start(SpherePoint.pole(kernel.d) if eta is None else eta)
    out = np.empty(n_steps + 1)
    out[0] = 1.0
    for k in range(1, n_steps + 1):
        state = chain_step(kernel, state, rng)
        out[k] = state.latitude
    return out


def run_latitude_chains(
    kernel: IsotropicKernel,
    n_steps: int,
    n_chains: int,
    rng: np.random.Generator,
    eta: SpherePoint | None = None,
) -> np.ndarray:
    """Vectorized latitude paths, shape (n_chains, n_steps + 1)."""
    eta = SpherePoint.pole(kernel.d) if eta is None else eta
    pos = np.tile(eta.coords, (n_chains, 1))
    out = np.empty((n_chains, n_steps + 1))
    out[:, 0] = 1.0
    for k in range(1, n_steps + 1):
        y = np.asarray(kernel.step_law.sample(rng, size=n_chains), dtype=float)
        z = sample_longitudes(kernel.d, rng, n_chains)
        pos = polar_compose_batch(pos, y, z)
        out[:, k] = pos @ eta.coords
    return out


def n_step_weights(weights, n: int, lam: float) -> np.ndarray:
    """Mixture weights of the chain marginal after n steps of a
    surface-harmonic kernel: w_n(k) = gamma_k^(n-1) w(k)^n for k >= 1."""
    if n < 1:
        raise DomainError("n_step_weights requires n >= 1")
    w = np.asarray(weights, dtype=float)
    out = np.zeros_like(w)
    for k in range(1, len(w)):
        out[k] = gamma_constant(k, lam) ** (n - 1) * w[k] ** n
    out[0] = 1.0 - out[1:].sum()
    return out


def brownian_time_root(lam: float) -> float:
    """The time t0 at which the heat-flow budget crosses 1."""
    return beta_unit_root(BetaBudget("brownian", lam))


def brownian_marginal(
    eta: SpherePoint, t: float, d: int | None = None, base: str = "delta"
) -> MixtureRepresentation:
    """Mixture representation of the heat-flow marginal at time t.

    ``base='delta'`` uses the surface-harmonic base (requires t >= t0);
    ``base='sbeta'`` uses the death-process weights over the (1+y)^n
    spherical-beta base, valid for every t > 0.
    """
    if base == "delta":
        return build_representation("brownian-delta", eta, t, d)
    if base == "sbeta":
        return build_representation("brownian-sbeta", eta, t, d)
    raise DomainError("base must be 'delta' or 'sbeta'")


# ---------------------------------------------------------------------------
# almost-sure realization of the von Mises-Fisher family


class ASCoupling:
    """One probability space carrying the whole family {vMF(eta, rho)}.

    A single gamma variable V and a stream W_0, W_1, ... (gamma then
    exponentials) generate the monotone latitude chain

        Y_n = 1 - 2 V / (V + W_0 + ... + W_n),

    whose n-th marginal is the latitude law of the (1+y)^n spherical-beta
    base.  A single uniform U drives the quantile-coupled index process
    N_rho, and a single longitude Z is reused for every rho, so rho -> X_rho
    moves along one great circle with nondecreasing latitude.
    """

    def __init__(self, eta: SpherePoint, rng: np.random.Generator):
        self.eta = eta
        self.d = eta.d
        self.v = float(rng.gamma(0.5 * self.d))
        self._w = [float(rng.gamma(0.5 * self.d))]
        self.u = float(rng.uniform())
        self.z = SpherePoint(sample_longitudes(self.d, rng, 1)[0])
        self._rng = rng

    def _partial_sum(self, n: int) -> float:
        while len(self._w) <= n:
            self._w.append(float(self._rng.standard_exponential()))
        return float(np.sum(self._w[: n + 1]))

    def latitude(self, n: int) -> float:
        """Y_n, the latitude of the n-th base member along the coupling."""
        if n < 0:
            raise DomainError("chain index must be nonnegative")
        return 1.0 - 2.0 * self.v / (self.v + self._partial_sum(n))

    def index(self, rho: float) -> int:
        """Quantile-coupled mixing index N_rho; nondecreasing in rho."""
        if rho < 0:
            raise DomainError("rho must be nonnegative")
        if rho == 0.0:
            return 0
        law = chs_law(0.5 * self.d, float(self.d), 2.0 * rho)
        return mixing_quantile(law, self.u)

    def point(self, rho: float) -> SpherePoint:
        return polar_compose(self.eta, self.latitude(self.index(rho)), self.z)


def as_vmf_sampler(coupling: ASCoupling, rho: float) -> SpherePoint:
    """X_rho of the coupling; marginally vMF(eta, rho) for every rho >= 0."""
    return coupling.point(rho)


def as_vmf_batch(
    eta: SpherePoint, rhos, n_couplings: int, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    """Vectorized couplings over a rho grid.

    Returns ``indices`` (couplings x rhos), ``latitudes`` (Y at the coupled
    index), and the shared per-coupling inputs.  Row monotonicity in rho is
    exact when ``rhos`` is ascending.
    """
    rhos = np.asarray(rhos, dtype=float)
    d = eta.d
    m = int(n_couplings)
    v = rng.gamma(0.5 * d, size=m)
    u = rng.uniform(size=m)
    z = sample_longitudes(d, rng, m)

    indices = np.empty((m, rhos.size), dtype=np.int64)
    for j, r in enumerate(rhos):
        if r == 0.0:
            indices[:, j] = 0
            continue
        law = chs_law(0.5 * d, float(d), 2.0 * r)
        indices[:, j] = np.minimum(np.searchsorted(law.cdf(), u), law.truncation)

    nmax = int(indices.max())
    w = np.empty((m, nmax + 1))
    w[:, 0] = rng.gamma(0.5 * d, size=m)
    if nmax >= 1:
        w[:, 1:] = rng.standard_exponential((m, nmax))
    partial = np.cumsum(w, axis=1)
    rows = np.arange(m)[:, None]
    latitudes = 1.0 - 2.0 * v[:, None] / (v[:, None] + partial[rows, indices])
    return {"indices": indices, "latitudes": latitudes, "v": v, "u": u, "z": z}


# ---------------------------------------------------------------------------
# quantile coupling under monotone likelihood ratio


def check_mlr(law_lo: MixingLaw, law_hi: MixingLaw, rel_floor: float = 1e-13) -> bool:
    """Numerical check that pmf_hi / pmf_lo is nondecreasing on the common
    truncated support (ignoring entries lost to truncation noise)."""
    m = min(len(law_lo.pmf), len(law_hi.pmf))
    lo = law_lo.pmf[:m]
    hi = law_hi.pmf[:m]
    floor = rel_floor * max(lo.max(), 1e-300)
    mask = lo > floor
    ratio = hi[mask] / lo[mask]
    return bool(np.all(np.diff(ratio) >= -1e-9 * np.maximum(ratio[:-1], 1.0)))


def mlr_quantile_couple(
    laws: Callable[[float], MixingLaw],
    u: float,
    rho: float,
    check: bool = True,
    rho_step: float = 1e-3,
) -> int:
    """Inverse-CDF index of laws(rho) at level u.

    For families with monotone likelihood ratio the map rho -> index is
    nondecreasing at fixed u; the ratio property is spot-checked against a
    slightly larger rho and a warning is emitted if it fails.
    """
    if not 0.0 < u < 1.0:
        raise DomainError("quantile level must lie in (0, 1)")
    law = laws(rho)
    if check:
        hi = laws(rho * (1.0 + rho_step) + 1e-9)
        if not check_mlr(law, hi):
            warnings.warn(
                "likelihood ratio is not monotone on the truncated support; "
                "quantile paths may not be monotone in rho",
                MLRWarning,
                stacklevel=2,
            )
    return mixing_quantile(law, u)
