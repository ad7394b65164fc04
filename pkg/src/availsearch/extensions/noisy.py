"""Noisy search: a technology l reveals k firms with probability delta[l][k].

Buyers randomize between technology l = N - n_low + 1 and l + 1.  Only the
smallest oligopoly keeps locked-in buyers, so it is the only dispersed market;
larger markets price at marginal cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .. import hypergeom as hg
from .. import quadrature
from ..equilibrium import Q_CLAMP, SLOPE_STEP
from ..errors import CostTooLarge, DegenerateDispersion, DomainError, InvalidShift
from ..market import MarketConfig
from ..pricing import LawKind, PriceLaw

ROW_TOL = 1e-12
STRICT_MARGIN = 1e-12
X_GRID = np.linspace(0.0, 1.0, 21)


@dataclass(frozen=True)
class NoisyTech:
    """``delta[l - 1][k - 1]``: chance that technology l reveals k firms."""

    delta: tuple

    def __init__(self, delta):
        rows = tuple(tuple(float(x) for x in row) for row in delta)
        object.__setattr__(self, "delta", rows)

    @property
    def size(self) -> int:
        return len(self.delta)

    def row(self, l: int) -> np.ndarray:
        return np.asarray(self.delta[l - 1])

    @classmethod
    def identity(cls, N: int) -> "NoisyTech":
        return cls(np.eye(N))


def _line3(tech: NoisyTech, N: int, l: int, n: int, x):
    d = tech.row(l - 1) + tech.row(l + 1) - 2 * tech.row(l)
    return sum(d[k - 1] * hg.gen(hg.SampleFrame(N, n, k), x) for k in range(1, N + 1))


def validate_tech(tech: NoisyTech, N: int, grid=X_GRID) -> list:
    """Names of violated technology conditions; empty when the tech is valid.

    Checks: square N x N shape, nonnegative rows summing to one, support on
    k >= l, first-order dominance of row l + 1 over row l, and strict
    convexity in l of sum_k delta[l][k] gen_{n,k}(x) on the x grid.  The
    convexity expression vanishes at x = 1 for every tech and at x = 0 when
    n = N, so it is required to be strictly positive only on interior points.
    """
    out = []
    d = np.asarray(tech.delta, dtype=float)
    if d.shape != (N, N):
        return [f"shape: expected {N}x{N}, got {'x'.join(map(str, d.shape))}"]
    for l in range(1, N + 1):
        row = d[l - 1]
        if np.any(row < 0):
            out.append(f"nonnegative: row {l}")
        if abs(row.sum() - 1.0) > ROW_TOL:
            out.append(f"row-sum: row {l} sums to {row.sum():.12g}")
        if np.any(row[: l - 1] != 0):
            out.append(f"support: row {l} reveals fewer than {l} firms")
    for l in range(1, N):
        gap = np.cumsum(d[l - 1]) - np.cumsum(d[l])
        if np.any(gap[l - 1:] < -ROW_TOL):
            out.append(f"dominance: rows {l} and {l + 1}")
    grid = np.asarray(grid, dtype=float)
    interior = (grid > 0) & (grid < 1)
    for l in range(2, N):
        for n in range(2, N + 1):
            vals = _line3(tech, N, l, n, grid)
            bad = np.any(vals[interior] <= STRICT_MARGIN) or np.any(vals[~interior] < -STRICT_MARGIN)
            if bad:
                out.append(f"convexity: l={l}, n={n}")
    return out


def _check(config: MarketConfig, tech: NoisyTech) -> int:
    if tech.size != config.N:
        raise DomainError(f"technology matrix must be {config.N}x{config.N}")
    l = config.max_search
    if l >= config.N:
        raise DomainError("noisy mixing needs N - n_low + 1 <= N - 1")
    return l


def tech_weights(tech: NoisyTech, l: int, q: float) -> np.ndarray:
    """Distribution over firms revealed when technology l is used with probability q."""
    return q * tech.row(l) + (1.0 - q) * tech.row(l + 1)


def noisy_law(config: MarketConfig, tech: NoisyTech, q: float) -> PriceLaw:
    """Dispersed price law of the smallest oligopoly under the technology mix."""
    l = _check(config, tech)
    N, n, v = config.N, config.n_low, config.v
    w = tech_weights(tech, l, q)
    c = np.zeros(N)
    for k in range(1, N + 1):
        if w[k - 1] != 0:
            pc = hg.prime_coeffs(N, n, k)
            c[: pc.size] += w[k - 1] * pc
    c = np.trim_zeros(c, "b")
    if c.size == 0 or c[0] <= 0:
        raise DegenerateDispersion("no buyer observes exactly one price in the smallest oligopoly")
    return PriceLaw(LawKind.DISPERSED, n, v, None, tuple(c.tolist()), v * c[0] / c.sum(),
                    v * c[0] / n, N, quadrature.breakpoints_for(c))


def noisy_benefit(config: MarketConfig, tech: NoisyTech, q: float) -> float:
    """Gain from switching technology l + 1 for l at the mix q; zero in the limit q = 0."""
    l = _check(config, tech)
    if q == 0.0:
        return 0.0
    law = noisy_law(config, tech, q)
    diff = tech.row(l) - tech.row(l + 1)
    total = sum(diff[k - 1] * law.payment(k) for k in range(1, config.N + 1) if diff[k - 1] != 0)
    return config.theta[config.n_low] * total


@dataclass(frozen=True)
class NoisyRoot:
    q: float
    stable: bool
    slope: float
    residual: float


def _slope(config, tech, q, h=SLOPE_STEP):
    lo, hi = max(q - h, 0.0), min(q + h, 1.0)
    return (noisy_benefit(config, tech, hi) - noisy_benefit(config, tech, lo)) / (hi - lo)


def noisy_roots(config: MarketConfig, tech: NoisyTech, c: float | None = None) -> list:
    """All roots of noisy_benefit(q) = c on (0, 1), bracketed around the curve's peak."""
    c = config.c if c is None else float(c)
    res = minimize_scalar(lambda q: -noisy_benefit(config, tech, q), bounds=(0.0, 1.0),
                          method="bounded", options={"xatol": 1e-10})
    q_star = min(max(float(res.x), Q_CLAMP), 1 - Q_CLAMP)

    def f(q):
        return noisy_benefit(config, tech, q) - c

    roots = []
    for a, b in ((Q_CLAMP, q_star), (q_star, 1 - Q_CLAMP)):
        fa, fb = f(a), f(b)
        if fa * fb < 0:
            q = brentq(f, a, b, xtol=1e-15, maxiter=200)
            s = _slope(config, tech, q)
            roots.append(NoisyRoot(q, s > 0, s, f(q)))
    return roots


def noisy_solve(config: MarketConfig, tech: NoisyTech, c: float | None = None) -> NoisyRoot:
    """The stable (rising-branch) root; cost-too-large when none exists."""
    stable = [r for r in noisy_roots(config, tech, c) if r.stable]
    if not stable:
        res = minimize_scalar(lambda q: -noisy_benefit(config, tech, q), bounds=(0.0, 1.0),
                              method="bounded", options={"xatol": 1e-10})
        raise CostTooLarge(-float(res.fun))
    return stable[0]


@dataclass(frozen=True)
class NoisyOutcome:
    q: float
    price: float
    purchase: float
    virtual: float
    expenditure: float
    surplus: float


def noisy_report(config: MarketConfig, tech: NoisyTech, q: float) -> NoisyOutcome:
    """Buyer metrics at the technology mix q (technology l costs (l - 1) c)."""
    l = _check(config, tech)
    N, v = config.N, config.v
    w = tech_weights(tech, l, q)
    law = noisy_law(config, tech, q)
    purchase = payment = 0.0
    for n in range(1, N + 1):
        t = config.theta[n]
        if t == 0:
            continue
        for k in range(1, N + 1):
            if w[k - 1] == 0:
                continue
            bought = 1.0 - hg.pmf_vector(N, n, k)[0]
            purchase += t * w[k - 1] * bought
            if n == 1:
                payment += t * w[k - 1] * v * bought
            elif n == config.n_low:
                payment += t * w[k - 1] * law.payment(k)
    virtual = payment + v * (1.0 - purchase)
    expenditure = (l - q) * config.c
    price = payment / purchase if purchase > 0 else float("nan")
    return NoisyOutcome(q, price, purchase, virtual, expenditure, v - virtual - expenditure)


def noisy_sweep_theta(config: MarketConfig, tech: NoisyTech, i: int, j: int, grid) -> list:
    """(amount, NoisyOutcome or None) after moving ``amount`` from theta_j to theta_i."""
    if i == j:
        raise InvalidShift("source and target coincide")
    shifted = [config.shift(i, j, float(a)) for a in grid]
    rows = []
    for a, cfg in zip(grid, shifted):
        try:
            root = noisy_solve(cfg, tech)
        except CostTooLarge:
            rows.append((float(a), None))
            continue
        rows.append((float(a), noisy_report(cfg, tech, root.q)))
    return rows


def line3_values(tech: NoisyTech, N: int, l: int, n: int, x):
    """The convexity-in-l expression at (l, n) over x (diagnostic)."""
    return _line3(tech, N, l, n, np.asarray(x, dtype=float))
