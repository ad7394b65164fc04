"""Seller price laws for a given buyer search mix.

In a market with n active sellers a seller charging the price at survival
level x sells to a buyer with probability beta'(x) / n, where beta mixes the
observation generating functions at k and k + 1 searches.  Equal profit on the
support pins the inverse price function

    p_n(x) = v * beta'(0) / beta'(x),

which falls from v at x = 0 to the support bottom p_n(1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from . import hypergeom as hg
from . import quadrature
from .errors import DegenerateDispersion, OutOfSupport
from .market import MarketConfig, SearchMix

CDF_TOL = 1e-12
CDF_MAX_ITER = 200


class LawKind(enum.Enum):
    MONOPOLY_ATOM = "monopoly-atom"
    MARGINAL_COST_ATOM = "marginal-cost-atom"
    DISPERSED = "dispersed"
    UNREACHED = "unreached"


def _mix_prime_coeffs(N: int, n: int, mix: SearchMix) -> np.ndarray:
    out = np.zeros(N)
    for j, w in mix.weights().items():
        c = hg.prime_coeffs(N, n, j)
        out[: c.size] += w * c
    return out


def beta(config: MarketConfig, mix: SearchMix, n: int, x):
    """q * gen(n, k, x) + (1 - q) * gen(n, k + 1, x)."""
    mix.check(config.N)
    total = 0.0
    for j, w in mix.weights().items():
        total = total + w * hg.gen(hg.SampleFrame(config.N, n, j), x)
    return total


def beta_prime(config: MarketConfig, mix: SearchMix, n: int, x):
    """Derivative of :func:`beta` in x."""
    mix.check(config.N)
    return P.polyval(x, _mix_prime_coeffs(config.N, n, mix))


@dataclass(frozen=True, eq=False)
class PriceLaw:
    """The symmetric seller strategy in a market with n active sellers.

    Dispersed laws store the ascending coefficients of beta'(x); atoms need
    nothing beyond their price.
    """

    kind: LawKind
    n: int
    v: float
    mix: SearchMix | None = None
    coeffs: tuple = ()
    lower: float = float("nan")
    profit: float = float("nan")
    N: int = 0
    _edges: np.ndarray = field(default=None, repr=False)

    @property
    def price(self) -> float:
        """Atom price (v for monopoly, 0 for marginal cost)."""
        if self.kind is LawKind.MONOPOLY_ATOM:
            return self.v
        if self.kind is LawKind.MARGINAL_COST_ATOM:
            return 0.0
        raise ValueError(f"{self.kind.value} law has no single price")

    @property
    def is_dispersed(self) -> bool:
        return self.kind is LawKind.DISPERSED

    @property
    def edges(self) -> np.ndarray:
        return self._edges

    def _require_dispersed(self):
        if self.kind is not LawKind.DISPERSED:
            raise ValueError(f"operation needs a dispersed law, got {self.kind.value}")

    def inverse(self, x):
        """Price at survival level x."""
        self._require_dispersed()
        c = self.coeffs
        return self.v * c[0] / P.polyval(x, c)

    def inverse_derivative(self, x):
        """d p / d x = -v beta'(0) beta''(x) / beta'(x)^2."""
        self._require_dispersed()
        c = self.coeffs
        d = P.polyval(x, c)
        return -self.v * c[0] * P.polyval(x, P.polyder(c)) / d ** 2

    def survival(self, p):
        """x with inverse(x) = p, by bisection; 1 - x is the price CDF."""
        self._require_dispersed()
        p = np.asarray(p, dtype=float)
        slack = 1e-12 * self.v
        if np.any(p < self.lower - slack) or np.any(p > self.v + slack):
            raise OutOfSupport(f"price outside [{self.lower:.12g}, {self.v:.12g}]")
        lo = np.zeros_like(p)
        hi = np.ones_like(p)
        for _ in range(CDF_MAX_ITER):
            mid = 0.5 * (lo + hi)
            above = self.inverse(mid) > p
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
            if np.max(hi - lo, initial=0.0) <= CDF_TOL:
                break
        out = 0.5 * (lo + hi)
        out = np.where(p >= self.v, 0.0, np.where(p <= self.lower, 1.0, out))
        return float(out) if out.ndim == 0 else out

    def payment(self, j: int, order: int = quadrature.DEFAULT_ORDER) -> float:
        """Expected amount paid by a buyer sampling j firms (no purchase pays 0)."""
        if self.kind is LawKind.UNREACHED:
            raise ValueError("unreached market has no law")
        if self.kind is LawKind.MARGINAL_COST_ATOM:
            return 0.0
        a0 = hg.pmf_vector(self.N, self.n, j)[0]
        if self.kind is LawKind.MONOPOLY_ATOM:
            return self.v * (1.0 - a0)
        num = hg.prime_coeffs(self.N, self.n, j)
        c = self.coeffs
        scale = self.v * c[0]
        return scale * quadrature.integrate(
            lambda x: P.polyval(x, num) / P.polyval(x, c), self._edges, order)

    def virtual(self, j: int, order: int = quadrature.DEFAULT_ORDER) -> float:
        """Expected price for a j-search buyer, counting no purchase as paying v."""
        if self.kind is LawKind.MARGINAL_COST_ATOM:
            return self.v * hg.pmf_vector(self.N, self.n, j)[0]
        if self.kind is LawKind.MONOPOLY_ATOM:
            return self.v
        return self.v * hg.pmf_vector(self.N, self.n, j)[0] + self.payment(j, order)

    def virtual_gap_by_parts(self, j: int, order: int = quadrature.DEFAULT_ORDER) -> float:
        """virtual(j) - virtual(j + 1) computed as -int p'(x) (gen_j - gen_{j+1}) dx."""
        a_lo = hg.pmf_vector(self.N, self.n, j)
        a_hi = hg.pmf_vector(self.N, self.n, j + 1)
        if self.kind is LawKind.MONOPOLY_ATOM:
            return 0.0
        if self.kind is LawKind.MARGINAL_COST_ATOM:
            return self.v * (a_lo[0] - a_hi[0])
        diff = np.zeros(j + 2)
        diff[: j + 1] += a_lo
        diff -= a_hi
        return -quadrature.integrate(
            lambda x: self.inverse_derivative(x) * P.polyval(x, diff), self._edges, order)


def _dispersed(N: int, n: int, v: float, mix: SearchMix) -> PriceLaw:
    c = _mix_prime_coeffs(N, n, mix)
    c = np.trim_zeros(c, "b")
    if c.size == 0 or c[0] <= 0:
        raise DegenerateDispersion(f"no buyer observes exactly one price at n={n}")
    lower = v * c[0] / float(np.sum(c))
    if c.size == 1:
        # beta' constant: every buyer sees one price, the law collapses to v.
        return PriceLaw(LawKind.MONOPOLY_ATOM, n, v, mix, N=N)
    return PriceLaw(LawKind.DISPERSED, n, v, mix, tuple(c.tolist()), lower,
                    v * c[0] / n, N, quadrature.breakpoints_for(c))


@lru_cache(maxsize=4096)
def build_price_laws(config: MarketConfig, mix: SearchMix, strict: bool = True) -> tuple:
    """PriceLaw for every n = 0..N under the buyer search mix.

    With ``strict`` a mix under which nobody in the smallest oligopoly sees a
    single price raises DegenerateDispersion; otherwise every oligopoly
    market prices at marginal cost, which is the limit law used for
    benefit-curve endpoints.
    """
    N, v = config.N, config.v
    mix.check(N)
    n_low = config.n_low
    k_min = mix.k_min
    top = N - k_min + 1
    if strict and n_low > top:
        raise DegenerateDispersion(
            f"all buyers search at least {k_min} > N - n_low + 1 = {N - n_low + 1} firms")
    laws = []
    for n in range(N + 1):
        if n == 0:
            laws.append(PriceLaw(LawKind.UNREACHED, 0, v, N=N))
        elif n == 1:
            laws.append(PriceLaw(LawKind.MONOPOLY_ATOM, 1, v, N=N))
        elif n < n_low:
            laws.append(PriceLaw(LawKind.UNREACHED, n, v, N=N))
        elif n <= top:
            laws.append(_dispersed(N, n, v, mix))
        else:
            laws.append(PriceLaw(LawKind.MARGINAL_COST_ATOM, n, v, N=N))
    return tuple(laws)


def price_inverse(config: MarketConfig, mix: SearchMix, n: int, x):
    """Inverse price function p_n(x) = v beta'(0) / beta'(x)."""
    b = _mix_prime_coeffs(config.N, n, mix.check(config.N))
    if b[0] <= 0:
        raise DegenerateDispersion(f"beta'(0) = 0 at n={n}: no locked-in buyers")
    return config.v * b[0] / P.polyval(x, b)


def price_cdf(law: PriceLaw, p):
    """Survival level x at price p (the distribution function is 1 - x)."""
    return law.survival(p)
