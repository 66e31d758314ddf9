"""Mixing distributions on the nonnegative integers.

Every law is materialized as a truncated pmf table together with a declared
tail bound; truncation extends until ten consecutive terms fall below 1e-14
of the running maximum.  Sampling is inverse-CDF over the table with the
tail mass folded into the last retained index, which preserves the low-order
pmf values exactly for verification.

Weight vectors of surface-harmonic mixtures that fall outside their validity
range (total budget exceeding one) are still constructible but carry
``probability=False``; representation builders reject those.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CancellationWarning, ConvergenceError, DomainError
from .specfun import (
    bessel_i_log,
    bessel_i_ratio,
    hyp1f1_log,
    log_pochhammer,
    parabolic_cylinder_d_log,
)

_TRUNC_REL_FLOOR = 1e-14
_TRUNC_RUN = 10
_TRUNC_MAX_INDEX = 200000
_NEG_CLAMP = 1e-12


@dataclass(frozen=True)
class MixingLaw:
    """Truncated distribution on {0, 1, ..., N} with declared tail bound."""

    kind: str
    params: tuple
    pmf: np.ndarray
    tail_bound: float
    probability: bool = True

    @property
    def truncation(self) -> int:
        return len(self.pmf) - 1

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)

    def mass(self) -> float:
        return float(self.pmf.sum())


def _build_table(
    term: Callable[[int], float],
    start: int = 0,
    rel_floor: float = _TRUNC_REL_FLOOR,
    run: int = _TRUNC_RUN,
) -> np.ndarray:
    vals = [0.0] * start
    peak = 0.0
    small = 0
    n = start
    while True:
        v = float(term(n))
        vals.append(v)
        av = abs(v)
        peak = max(peak, av)
        if av < rel_floor * max(peak, 1e-300):
            small += 1
            if small >= run:
                break
        else:
            small = 0
        n += 1
        if n > _TRUNC_MAX_INDEX:
            raise ConvergenceError("mixing pmf truncation did not terminate")
    return np.asarray(vals, dtype=float)


def _finalize(kind: str, params: tuple, pmf: np.ndarray, neg_clamp: float = _NEG_CLAMP) -> MixingLaw:
    probability = True
    if pmf.min() < -neg_clamp:
        probability = False
    else:
        pmf = np.where(pmf < 0.0, 0.0, pmf)
    if probability:
        tail = max(0.0, 1.0 - float(pmf.sum()))
    else:
        # geometric estimate from the last retained magnitudes
        a, b = abs(pmf[-2]) if len(pmf) > 1 else 0.0, abs(pmf[-1])
        r = b / a if a > 0 else 0.0
        tail = b * r / (1.0 - r) if 0.0 < r < 1.0 else b
    return MixingLaw(kind=kind, params=params, pmf=pmf, tail_bound=tail, probability=probability)


# ---------------------------------------------------------------------------
# scalar pmfs


def chs_pmf(n: int, alpha: float, beta: float, tau: float) -> float:
    """Confluent hypergeometric series pmf
    (1F1(alpha;beta;tau))^-1 (alpha)_n / (beta)_n tau^n / n!; point mass at 0
    when tau = 0."""
    if alpha <= 0 or beta <= 0:
        raise DomainError("chs_pmf requires alpha, beta > 0")
    if tau < 0:
        raise DomainError("chs_pmf requires tau >= 0")
    if n < 0:
        return 0.0
    if tau == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(
        -hyp1f1_log(alpha, beta, tau)
        + log_pochhammer(alpha, n)
        - log_pochhammer(beta, n)
        + n * math.log(tau)
        - math.lgamma(n + 1.0)
    )


def dpc_pmf(k: int, delta: float, tau: float) -> float:
    """Discrete parabolic cylinder pmf built from D_(-(k+2 delta))(sqrt(2) tau)."""
    if delta <= 0.5:
        raise DomainError("dpc_pmf requires delta > 1/2")
    if tau <= 0:
        raise DomainError("dpc_pmf requires tau > 0")
    if k < 0:
        return 0.0
    s2t = math.sqrt(2.0) * tau
    logv = (
        -math.lgamma(k + 1.0)
        + k * math.log(s2t)
        + (k + delta - 1.0) * math.log(2.0)
        + math.log(k + 2.0 * delta - 1.0)
        + math.lgamma(k + delta - 0.5)
        - math.lgamma(0.5)
        - 0.5 * tau * tau
        + parabolic_cylinder_d_log(-(k + 2.0 * delta), s2t)
    )
    return math.exp(logv)


def psk_pmf(n: int, rho: float) -> float:
    """Positive Skellam pmf 2 e^-rho I_n(rho) / (1 - e^-rho I_0(rho)), n >= 1."""
    if rho <= 0:
        raise DomainError("psk_pmf requires rho > 0")
    if n < 1:
        return 0.0
    denom = 1.0 - math.exp(bessel_i_log(0.0, rho) - rho)
    return 2.0 * math.exp(bessel_i_log(float(n), rho) - rho) / denom


def _gpsk_logc(kappa: float, tau: float) -> float:
    return (
        kappa * math.log(2.0)
        + math.lgamma(kappa + 1.0)
        - kappa * math.log(tau)
        - tau
        + bessel_i_log(kappa, tau)
    )


def gpsk_pmf(n: int, kappa: float, tau: float) -> float:
    """Generalized positive Skellam pmf on n >= 1 with Bessel-ratio terms."""
    if kappa <= 0 or tau <= 0:
        raise DomainError("gpsk_pmf requires kappa > 0 and tau > 0")
    if n < 1:
        return 0.0
    c = math.exp(_gpsk_logc(kappa, tau))
    return (
        (1.0 + n / kappa)
        * math.exp(log_pochhammer(2.0 * kappa, n) - math.lgamma(n + 1.0))
        * c
        / (1.0 - c)
        * bessel_i_ratio(kappa, n, tau)
    )


def geometric_n0_pmf(n: int, p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError("geometric parameter must lie in (0, 1)")
    return p * (1.0 - p) ** n if n >= 0 else 0.0


def geometric_n_pmf(n: int, p: float) -> float:
    """Zero-inflated counterpart of the geometric law, supported on n >= 1."""
    if not 0.0 < p < 1.0:
        raise DomainError("geometric parameter must lie in (0, 1)")
    return p * (1.0 - p) ** (n - 1) if n >= 1 else 0.0


def znb_pmf(n: int, r: float, p: float) -> float:
    """Zero-inflated negative binomial pmf (r)_n / n! (1-p)^n p^r / (1 - p^r), n >= 1."""
    if r <= 0 or not 0.0 < p < 1.0:
        raise DomainError("znb_pmf requires r > 0 and p in (0, 1)")
    if n < 1:
        return 0.0
    return math.exp(
        log_pochhammer(r, n) - math.lgamma(n + 1.0) + n * math.log1p(-p)
    ) * p**r / (1.0 - p**r)


# ---------------------------------------------------------------------------
# law constructors


def point_mass_zero() -> MixingLaw:
    return MixingLaw(kind="point0", params=(), pmf=np.array([1.0]), tail_bound=0.0)


def chs_law(alpha: float, beta: float, tau: float) -> MixingLaw:
    if tau == 0.0:
        return MixingLaw(kind="chs", params=(alpha, beta, 0.0), pmf=np.array([1.0]), tail_bound=0.0)
    lognorm = hyp1f1_log(alpha, beta, tau)
    ltau = math.log(tau)

    def term(n: int) -> float:
        return math.exp(
            -lognorm
            + log_pochhammer(alpha, n)
            - log_pochhammer(beta, n)
            + n * ltau
            - math.lgamma(n + 1.0)
        )

    return _finalize("chs", (alpha, beta, tau), _build_table(term))


def dpc_law(delta: float, tau: float) -> MixingLaw:
    return _finalize("dpc", (delta, tau), _build_table(lambda k: dpc_pmf(k, delta, tau)))


def psk_law(rho: float) -> MixingLaw:
    return _finalize("psk", (rho,), _build_table(lambda n: psk_pmf(n, rho), start=1))


def gpsk_law(kappa: float, tau: float) -> MixingLaw:
    return _finalize("gpsk", (kappa, tau), _build_table(lambda n: gpsk_pmf(n, kappa, tau), start=1))


def geometric_law(p: float, zero_inflated: bool = False) -> MixingLaw:
    if zero_inflated:
        return _finalize("geoN", (p,), _build_table(lambda n: geometric_n_pmf(n, p), start=1))
    return _finalize("geo0", (p,), _build_table(lambda n: geometric_n0_pmf(n, p)))


def znb_law(r: float, p: float) -> MixingLaw:
    return _finalize("znb", (r, p), _build_table(lambda n: znb_pmf(n, r, p), start=1))


def _with_zero_atom(kind: str, params: tuple, beta: float, table: np.ndarray) -> MixingLaw:
    table = table.copy()
    table[0] = 1.0 - beta
    return _finalize(kind, params, table, neg_clamp=1e-7)


def wc_delta_weights(rho: float) -> MixingLaw:
    """Surface-harmonic weights of the wrapped Cauchy family: w(n) = 2 rho^n."""
    if not 0.0 <= rho < 1.0:
        raise DomainError("wrapped Cauchy requires rho in [0, 1)")
    if rho == 0.0:
        return point_mass_zero()
    table = _build_table(lambda n: 2.0 * rho**n, start=1)
    return _with_zero_atom("wc-delta", (rho,), beta_budget("wc", rho), table)


def wn_delta_weights(rho: float) -> MixingLaw:
    """Surface-harmonic weights of the wrapped normal family: w(n) = 2 e^(-n^2 rho / 2)."""
    if rho <= 0:
        raise DomainError("wrapped normal requires rho > 0")
    table = _build_table(lambda n: 2.0 * math.exp(-0.5 * n * n * rho), start=1)
    return _with_zero_atom("wn-delta", (rho,), beta_budget("wn", rho), table)


def vmf1_delta_weights(rho: float) -> MixingLaw:
    """Circle von Mises-Fisher surface-harmonic weights w(n) = 2 I_n(rho)/I_0(rho)."""
    if rho < 0:
        raise DomainError("von Mises-Fisher requires rho >= 0")
    if rho == 0.0:
        return point_mass_zero()
    li0 = bessel_i_log(0.0, rho)
    table = _build_table(lambda n: 2.0 * math.exp(bessel_i_log(float(n), rho) - li0), start=1)
    return _with_zero_atom("vmf1-delta", (rho,), beta_budget("vmf1", rho), table)


def vmfd_delta_weights(lam: float, rho: float) -> MixingLaw:
    """Sphere von Mises-Fisher surface-harmonic weights
    w(n) = (1 + n/lam) (2 lam)_n / n! * I_(lam+n)(rho) / I_lam(rho)."""
    if lam <= 0:
        raise DomainError("vmfd weights require lam > 0 (use vmf1 on the circle)")
    if rho < 0:
        raise DomainError("von Mises-Fisher requires rho >= 0")
    if rho == 0.0:
        return point_mass_zero()
    lil = bessel_i_log(lam, rho)

    def term(n: int) -> float:
        return (1.0 + n / lam) * math.exp(
            log_pochhammer(2.0 * lam, n)
            - math.lgamma(n + 1.0)
            + bessel_i_log(lam + n, rho)
            - lil
        )

    table = _build_table(term, start=1)
    return _with_zero_atom("vmfd-delta", (lam, rho), beta_budget(BetaBudget("vmfd", lam), rho), table)


def turan_delta_weights(rho: float) -> MixingLaw:
    """Surface-harmonic weights of the square-root Poisson kernel family:
    w(n) = (1/2)_n / n! rho^n."""
    if not 0.0 <= rho < 1.0:
        raise DomainError("square-root Poisson kernel requires rho in [0, 1)")
    if rho == 0.0:
        return point_mass_zero()
    lr = math.log(rho)
    table = _build_table(
        lambda n: math.exp(log_pochhammer(0.5, n) - math.lgamma(n + 1.0) + n * lr),
        start=1,
    )
    return _with_zero_atom("turan-delta", (rho,), beta_budget("turan", rho), table)


def turan_sigma_weights(rho: float) -> MixingLaw:
    """Geometric weights over cosine-polynomial partial sums, valid on all of [0, 1)."""
    if not 0.0 <= rho < 1.0:
        raise DomainError("square-root Poisson kernel requires rho in [0, 1)")
    if rho == 0.0:
        return point_mass_zero()
    return _finalize("turan-sigma", (rho,), _build_table(lambda n: geometric_n0_pmf(n, 1.0 - rho)))


def brownian_delta_weights(lam: float, t: float) -> MixingLaw:
    """Heat-flow surface-harmonic weights
    w(n) = (1 + n/lam) (2 lam)_n / n! e^(-n (n + 2 lam) t / 2)."""
    if lam <= 0:
        raise DomainError("spherical heat-flow weights require lam > 0")
    if t <= 0:
        raise DomainError("time parameter must be positive")

    def term(n: int) -> float:
        return (1.0 + n / lam) * math.exp(
            log_pochhammer(2.0 * lam, n)
            - math.lgamma(n + 1.0)
            - 0.5 * n * (n + 2.0 * lam) * t
        )

    table = _build_table(term, start=1)
    return _with_zero_atom("brownian-delta", (lam, t), beta_budget(BetaBudget("brownian", lam), t), table)


# ---------------------------------------------------------------------------
# death-process weights (spherical-beta heat-flow mixture)


def death_process_weights(n: int, t: float, d: int) -> float:
    """Marginal probability that a pure death process started from infinity
    sits at n by time t; the weight of the (1 + y)^n spherical-beta component
    in the heat-flow mixture.

        w_t(n) = sum_{k>=n} (-1)^(k-n) (d+2k-1) (d+n)_(k-1) / (n! (k-n)!) e^(-k(k+d-1)t/2)

    The n = k = 0 term uses (d)_(-1) = 1/(d-1), which the Gamma-function form
    of the ascending factorial produces automatically.
    """
    if t <= 0:
        raise DomainError("death_process_weights requires t > 0")
    if d < 2:
        raise DomainError("death_process_weights requires d >= 2")
    if n < 0:
        return 0.0
    if t < 0.05:
        warnings.warn(
            "death-process weights are ill-conditioned for t < 0.05",
            CancellationWarning,
            stacklevel=2,
        )
    lg_dn = math.lgamma(d + n)
    lg_n = math.lgamma(n + 1.0)
    total = 0.0
    comp = 0.0  # Kahan compensation: the series alternates and cancels at small t
    peak = 0.0
    small = 0
    k = n
    while True:
        logmag = (
            math.log(d + 2.0 * k - 1.0)
            + math.lgamma(d + n + k - 1.0)
            - lg_dn
            - lg_n
            - math.lgamma(k - n + 1.0)
            - 0.5 * k * (k + d - 1.0) * t
        )
        term = math.exp(logmag)
        if (k - n) % 2:
            term = -term
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
        peak = max(peak, abs(term))
        if abs(term) < 1e-14 * max(1.0, peak):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        k += 1
        if k - n > _TRUNC_MAX_INDEX:
            raise ConvergenceError("death-process series did not terminate")
    if peak > 1e6 * max(abs(total), 1e-300):
        warnings.warn(
            f"death-process weight lost more than 6 digits to cancellation (n={n}, t={t})",
            CancellationWarning,
            stacklevel=2,
        )
    return total


def death_process_law(t: float, d: int) -> MixingLaw:
    table = _build_table(lambda n: death_process_weights(n, t, d))
    return _finalize("death", (t, d), table, neg_clamp=1e-8)


# ---------------------------------------------------------------------------
# budget functions and their unit roots


@dataclass(frozen=True)
class BetaBudget:
    """Total-variation-style budget selector: the sum of absolute
    surface-harmonic expansion coefficients of a target family."""

    family: str
    lam: float = 0.0

    def __post_init__(self):
        if self.family not in ("wc", "wn", "vmf1", "vmfd", "turan", "brownian"):
            raise DomainError(f"unknown budget family {self.family!r}")
        if self.lam < 0:
            raise DomainError("budget lam must be nonnegative")


def _as_budget(budget) -> BetaBudget:
    return budget if isinstance(budget, BetaBudget) else BetaBudget(str(budget))


def _wn_series(rho: float) -> float:
    total = 0.0
    n = 1
    while True:
        term = 2.0 * math.exp(-0.5 * n * n * rho)
        total += term
        if term < 1e-18 * max(total, 1e-300):
            return total
        n += 1
        if n > _TRUNC_MAX_INDEX:
            raise ConvergenceError("wrapped-normal budget series did not converge")


def _heat_series(lam: float, t: float) -> float:
    total = 0.0
    n = 1
    small = 0
    while True:
        term = (1.0 + n / lam) * math.exp(
            log_pochhammer(2.0 * lam, n) - math.lgamma(n + 1.0) - 0.5 * n * (n + 2.0 * lam) * t
        )
        total += term
        if term < 1e-18 * max(total, 1e-300):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
        n += 1
        if n > _TRUNC_MAX_INDEX:
            raise ConvergenceError("heat-flow budget series did not converge")


def beta_budget(budget, x: float) -> float:
    """Budget beta(x) of the selected family; domain errors outside the range."""
    b = _as_budget(budget)
    if b.family == "wc":
        if not 0.0 <= x < 1.0:
            raise DomainError("wrapped Cauchy budget requires rho in [0, 1)")
        return 2.0 * x / (1.0 - x)
    if b.family == "turan":
        if not 0.0 <= x < 1.0:
            raise DomainError("square-root Poisson kernel budget requires rho in [0, 1)")
        return 1.0 / math.sqrt(1.0 - x) - 1.0
    if b.family == "wn":
        if x <= 0:
            raise DomainError("wrapped normal budget requires rho > 0")
        return _wn_series(x)
    if b.family == "vmf1" or (b.family == "vmfd" and b.lam == 0.0):
        if x < 0:
            raise DomainError("von Mises-Fisher budget requires rho >= 0")
        if x == 0.0:
            return 0.0
        return math.expm1(x - bessel_i_log(0.0, x))
    if b.family == "vmfd":
        if x < 0:
            raise DomainError("von Mises-Fisher budget requires rho >= 0")
        if x == 0.0:
            return 0.0
        lam = b.lam
        return math.expm1(
            lam * math.log(x)
            + x
            - lam * math.log(2.0)
            - math.lgamma(lam + 1.0)
            - bessel_i_log(lam, x)
        )
    # brownian
    if b.lam <= 0:
        raise DomainError("heat-flow budget requires lam > 0")
    if x <= 0:
        raise DomainError("heat-flow budget requires t > 0")
    return _heat_series(b.lam, x)


def _bisect_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-9) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ConvergenceError("no sign change in the root bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def beta_unit_root(budget) -> float:
    """The parameter at which the budget crosses 1 (closed form where available)."""
    b = _as_budget(budget)
    if b.family == "wc":
        return 1.0 / 3.0
    if b.family == "turan":
        # (1 - rho)^(-1/2) = 2  <=>  rho = 3/4
        return 0.75
    return _bisect_root(lambda x: beta_budget(b, x) - 1.0, 1e-6, 50.0)


# ---------------------------------------------------------------------------
# sampling


def mixing_quantile(law: MixingLaw, u: float) -> int:
    """Smallest n with CDF(n) >= u; tail mass maps to the last index."""
    idx = int(np.searchsorted(law.cdf(), u))
    return min(idx, law.truncation)


def sample_mixing(law: MixingLaw, rng: np.random.Generator, size: int | None = None):
    """Inverse-CDF draw(s) from the truncated table."""
    if not law.probability:
        raise DomainError("cannot sample from a weight vector flagged invalid-as-probability")
    cdf = law.cdf()
    u = rng.uniform(size=size)
    idx = np.minimum(np.searchsorted(cdf, u), law.truncation)
    return int(idx) if size is None else idx.astype(np.int64)
