"""Search-cost heterogeneity: a share lambda of buyers observes every price.

Costly buyers randomize between N - 1 searches (weight q) and N searches.
Only duopolies keep locked-in buyers, and the duopoly price law has the closed
form x_2(p) = mu (v / p - 1), where mu(q) is the ratio of locked-in to
price-comparing buyers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .. import hypergeom as hg
from .. import quadrature
from ..equilibrium import Q_CLAMP, SLOPE_STEP
from ..errors import CostTooLarge, Degenerate, InvalidShift, ValidationError
from ..market import MarketConfig
from ..pricing import LawKind, PriceLaw


@dataclass(frozen=True)
class HeterogeneityConfig:
    market: MarketConfig
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        if not 0.0 < self.lam < 1.0:
            raise ValidationError("lambda-range", f"lambda must lie in (0, 1), got {self.lam}")
        if self.market.theta[2] <= 0:
            raise ValidationError("duopoly-mass", "theta_2 must be positive")

    @property
    def N(self) -> int:
        return self.market.N

    def with_market(self, market: MarketConfig) -> "HeterogeneityConfig":
        return HeterogeneityConfig(market, self.lam)


def mu(q, lam: float, N: int):
    """Locked-in to price-comparing buyer ratio in a duopoly."""
    a = np.asarray(q, dtype=float) * (1.0 - lam)
    out = a / (N - 2.0 * a)
    return float(out) if out.ndim == 0 else out


def q_of_mu(m: float, lam: float, N: int) -> float:
    """Inverse of :func:`mu` in q."""
    return N * m / ((1.0 - lam) * (1.0 + 2.0 * m))


def duopoly_price_law(q: float, lam: float, N: int, v: float) -> PriceLaw:
    """Dispersed duopoly law p(x) = v mu / (mu + x) with support [v mu / (1 + mu), v].

    Coefficients are normalized so that ``profit`` is the per-seller profit
    v (1 - lambda) q / N (each seller's share of locked-in buyers times v).
    """
    if q <= 0:
        raise Degenerate("q = 0 leaves no locked-in buyers")
    a = (1.0 - lam) * q / N
    b = 1.0 - 2.0 * a
    coeffs = (2.0 * a, 2.0 * b)
    m = a / b
    return PriceLaw(LawKind.DISPERSED, 2, v, None, coeffs, v * m / (1.0 + m), v * a, N,
                    quadrature.breakpoints_for(coeffs))


def spread_closed_form(m: float, v: float = 1.0) -> float:
    """E[p] - E[min(p1, p2)] = v mu ((1 + 2 mu) ln(1 + 1/mu) - 2)."""
    if m <= 0:
        return 0.0
    return v * m * ((1.0 + 2.0 * m) * math.log1p(1.0 / m) - 2.0)


def spread_quadrature(law: PriceLaw, order: int = quadrature.DEFAULT_ORDER) -> float:
    """int x (1 - x) dp over the support, evaluated in the survival variable."""
    return quadrature.integrate(lambda x: -x * (1.0 - x) * law.inverse_derivative(x),
                                law.edges, order)


def mean_price(law: PriceLaw, order: int = quadrature.DEFAULT_ORDER) -> float:
    """E[p] = v - int (1 - x) dp."""
    return law.v - quadrature.integrate(lambda x: -(1.0 - x) * law.inverse_derivative(x),
                                        law.edges, order)


def mean_min_price(law: PriceLaw, order: int = quadrature.DEFAULT_ORDER) -> float:
    """E[min(p1, p2)] = v - int (1 - x^2) dp."""
    return law.v - quadrature.integrate(lambda x: -(1.0 - x * x) * law.inverse_derivative(x),
                                        law.edges, order)


def stationary_residual(m: float) -> float:
    """M(mu) = ln(1 + 1/mu) - (3 + 4 mu) / ((1 + mu)(1 + 4 mu)); zero at the spread-curve peak."""
    return math.log1p(1.0 / m) - (3.0 + 4.0 * m) / ((1.0 + m) * (1.0 + 4.0 * m))


@lru_cache(maxsize=None)
def mu_star() -> float:
    """Unique positive root of :func:`stationary_residual`."""
    return brentq(stationary_residual, 1e-3, 10.0, xtol=1e-15)


def het_benefit(q: float, hcfg: HeterogeneityConfig) -> float:
    """v theta_2 (2/N) (E[p] - E[min]) for a costly buyer adding the N-th search."""
    N, v = hcfg.N, hcfg.market.v
    return v * hcfg.market.theta[2] * (2.0 / N) * spread_closed_form(mu(q, hcfg.lam, N))


def benefit_scale(hcfg: HeterogeneityConfig) -> float:
    return hcfg.market.v * hcfg.market.theta[2] * 2.0 / hcfg.N


def het_peak(hcfg: HeterogeneityConfig) -> tuple:
    """(q*, benefit at q*); q* = 1 when mu(1) does not exceed mu*."""
    q_star = q_of_mu(mu_star(), hcfg.lam, hcfg.N)
    if q_star >= 1.0:
        q_star = 1.0
    return q_star, het_benefit(q_star, hcfg)


@dataclass(frozen=True)
class HetRoot:
    q: float
    stable: bool
    slope: float
    residual: float


def het_solve(hcfg: HeterogeneityConfig, c: float | None = None) -> list:
    """Roots of het_benefit(q) = c on (0, 1); the rising-branch root is stable."""
    c = hcfg.market.c if c is None else float(c)
    q_star, peak = het_peak(hcfg)

    def f(q):
        return het_benefit(q, hcfg) - c

    brackets = [(Q_CLAMP, min(q_star, 1 - Q_CLAMP))]
    if q_star < 1.0 - Q_CLAMP:
        brackets.append((q_star, 1 - Q_CLAMP))
    roots = []
    for a, b in brackets:
        if f(a) * f(b) < 0:
            q = brentq(f, a, b, xtol=1e-15, maxiter=200)
            lo, hi = max(q - SLOPE_STEP, 0.0), min(q + SLOPE_STEP, 1.0)
            s = (het_benefit(hi, hcfg) - het_benefit(lo, hcfg)) / (hi - lo)
            roots.append(HetRoot(q, s > 0, s, f(q)))
    if not roots:
        raise CostTooLarge(peak)
    return roots


def het_stable(hcfg: HeterogeneityConfig, c: float | None = None) -> HetRoot:
    stable = [r for r in het_solve(hcfg, c) if r.stable]
    if not stable:
        raise CostTooLarge(het_peak(hcfg)[1])
    return stable[0]


@dataclass(frozen=True)
class HetOutcome:
    q: float
    mu: float
    price: float
    purchase: float
    virtual: float
    expenditure: float
    surplus: float
    min_term: float  # theta_2 * E[min(p1, p2)]


def het_report(hcfg: HeterogeneityConfig, q: float) -> HetOutcome:
    """Costly-buyer metrics: searches N - 1 with probability q, else N; first search free.

    Monopolies charge v, duopolies follow the closed-form law and larger
    markets price at marginal cost.
    """
    m = hcfg.market
    N, v = m.N, m.v
    law = duopoly_price_law(q, hcfg.lam, N, v)
    e_min = mean_min_price(law)
    e_one = mean_price(law)
    duo_price = q * (2.0 / N * e_one + (N - 2.0) / N * e_min) + (1.0 - q) * e_min
    purchase = payment = 0.0
    for n in range(1, N + 1):
        t = m.theta[n]
        if t == 0:
            continue
        for j, w in ((N - 1, q), (N, 1.0 - q)):
            purchase += t * w * (1.0 - hg.pmf_vector(N, n, j)[0])
        if n == 1:
            payment += t * v * (q * (N - 1) / N + (1.0 - q))
        elif n == 2:
            payment += t * duo_price
    virtual = payment + v * (1.0 - purchase)
    expenditure = (N - 1 - q) * m.c
    price = payment / purchase if purchase > 0 else float("nan")
    return HetOutcome(q, mu(q, hcfg.lam, N), price, purchase, virtual, expenditure,
                      v - virtual - expenditure, m.theta[2] * e_min)


def het_sweep_theta(hcfg: HeterogeneityConfig, i: int, j: int, grid) -> list:
    """(amount, HetOutcome or None) after moving ``amount`` from theta_j to theta_i."""
    if i == j:
        raise InvalidShift("source and target coincide")
    markets = [hcfg.market.shift(i, j, float(a)) for a in grid]
    rows = []
    for a, market in zip(grid, markets):
        h = hcfg.with_market(market)
        try:
            root = het_stable(h)
        except CostTooLarge:
            rows.append((float(a), None))
            continue
        rows.append((float(a), het_report(h, root.q)))
    return rows


def dmu_dtheta2(hcfg: HeterogeneityConfig, q: float) -> float:
    """Implicit derivative of the stable mu in theta_2 along the indifference condition.

    From theta_2 S(mu) = N c / (2 v): d mu / d theta_2 = -S(mu) / (theta_2 S'(mu)),
    negative on the rising branch where S' > 0.
    """
    m = mu(q, hcfg.lam, hcfg.N)
    s = spread_closed_form(m)
    h = 1e-7 * max(m, 1e-6)
    ds = (spread_closed_form(m + h) - spread_closed_form(m - h)) / (2 * h)
    return -s / (hcfg.market.theta[2] * ds)
