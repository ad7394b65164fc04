"""Seeded Monte Carlo simulation of the search market.

Each trial draws the number of active sellers, the active set, every seller's
price and one buyer's search order.  The buyer's gross payoff (v minus the
lowest observed price, or 0 without a purchase) is recorded for several
search counts on the same draw so that payoff differences have small
variance.  Sellers in dispersed markets record their survival draw and
revenue, which must be flat in the draw at the equilibrium profit.

Randomness comes from PCG64 streams spawned from one SeedSequence, one per
block of trials, so results are bit-identical for a given (trials, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equilibrium import Equilibrium
from .errors import DomainError, InvalidEquilibrium
from .market import MarketConfig
from .pricing import LawKind, PriceLaw

BLOCK = 1 << 16
DECILES = 10
MIN_TRIALS = 10_000


@dataclass
class Moments:
    """Count, mean and centered sum of squares; merged with the parallel update."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, x) -> "Moments":
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return cls()
        mean = float(np.mean(x))
        return cls(int(x.size), mean, float(np.sum((x - mean) ** 2)))

    def merge(self, other: "Moments") -> "Moments":
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        n = self.n + other.n
        d = other.mean - self.mean
        return Moments(n, self.mean + d * other.n / n,
                       self.m2 + other.m2 + d * d * self.n * other.n / n)

    @property
    def sd(self) -> float:
        return math.sqrt(self.m2 / (self.n - 1)) if self.n > 1 else float("nan")

    @property
    def se(self) -> float:
        return self.sd / math.sqrt(self.n) if self.n > 1 else float("nan")


@dataclass
class MonteCarloReport:
    trials: int
    seed: int
    k: int
    q: float
    c: float
    price: Moments = field(default_factory=Moments)       # paid price, buyers who bought
    purchase: Moments = field(default_factory=Moments)    # purchase indicator
    gross: dict = field(default_factory=dict)             # j -> gross payoff moments
    gains: dict = field(default_factory=dict)             # j -> moments of gross(j+1) - gross(j)
    deciles: dict = field(default_factory=dict)           # n -> [Moments] * 10 of seller revenue
    profit: dict = field(default_factory=dict)            # n -> equilibrium profit

    def payoff(self, j: int) -> tuple:
        """Net payoff of searching j firms (first search free): (mean, se)."""
        m = self.gross[j]
        return m.mean - (j - 1) * self.c, m.se


def sample_prices(law: PriceLaw, size, rng: np.random.Generator) -> np.ndarray:
    """Inverse-survival sampling: price = p(u) with u uniform on [0, 1]."""
    if law.kind is LawKind.DISPERSED:
        return law.inverse(rng.random(size))
    return np.full(size, law.price)


def _search_counts(eq: Equilibrium, N: int) -> list:
    return [j for j in (eq.k - 1, eq.k, eq.k + 1, eq.k + 2) if 1 <= j <= N]


def _block(config: MarketConfig, eq: Equilibrium, size: int, rng: np.random.Generator,
           counts: list):
    N, v = config.N, config.v
    theta = np.asarray(config.theta)
    ns = rng.choice(N + 1, size=size, p=theta / theta.sum())
    # Active set: the n firms with the smallest keys.
    keys = rng.random((size, N))
    rank = np.argsort(np.argsort(keys, axis=1), axis=1)
    active = rank < ns[:, None]
    u = rng.random((size, N))
    prices = np.full((size, N), np.inf)
    for n in np.unique(ns):
        if n == 0:
            continue
        law = eq.laws[n] if n < len(eq.laws) else None
        if law is None or law.kind is LawKind.UNREACHED:
            raise InvalidEquilibrium(f"no price law for reachable market size n={n}")
        rows = ns == n
        if law.kind is LawKind.DISPERSED:
            prices[rows] = law.inverse(u[rows])
        else:
            prices[rows] = law.price
    prices = np.where(active, prices, np.inf)
    order = np.argsort(rng.random((size, N)), axis=1)
    seen = np.take_along_axis(prices, order, axis=1)
    best = np.minimum.accumulate(seen, axis=1)

    gross = {}
    for j in counts:
        b = best[:, j - 1]
        gross[j] = np.where(np.isfinite(b), v - b, 0.0)

    mix = eq.mix.weights()
    js = np.where(rng.random(size) < mix.get(eq.k, 0.0), eq.k, eq.k + 1)
    paid = best[np.arange(size), js - 1]
    bought = np.isfinite(paid)

    # Winning seller: uniform among the searched firms tied at the paid price.
    tie = (seen == paid[:, None]) & (np.arange(N)[None, :] < js[:, None]) & bought[:, None]
    tie_key = np.where(tie, rng.random((size, N)), -1.0)
    pos = np.argmax(tie_key, axis=1)
    winner = order[np.arange(size), pos]
    revenue = np.zeros((size, N))
    rows = np.nonzero(bought)[0]
    revenue[rows, winner[rows]] = paid[rows]
    return ns, active, u, revenue, gross, paid[bought], bought


def simulate(config: MarketConfig, eq: Equilibrium, trials: int = 1_000_000,
             seed: int = 0) -> MonteCarloReport:
    """Simulate ``trials`` independent markets with one tracked buyer each."""
    if trials < MIN_TRIALS:
        raise DomainError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if not eq.laws:
        raise InvalidEquilibrium("equilibrium carries no price laws")
    counts = _search_counts(eq, config.N)
    rep = MonteCarloReport(trials, int(seed), eq.k, eq.q, config.c)
    dispersed = [n for n in range(2, config.N + 1)
                 if config.theta[n] > 0 and eq.laws[n].kind is LawKind.DISPERSED]
    rep.deciles = {n: [Moments() for _ in range(DECILES)] for n in dispersed}
    rep.profit = {n: eq.laws[n].profit for n in dispersed}
    rep.gross = {j: Moments() for j in counts}
    rep.gains = {j: Moments() for j in counts if j + 1 in counts}

    n_blocks = -(-trials // BLOCK)
    streams = np.random.SeedSequence(int(seed)).spawn(n_blocks)
    for b, ss in enumerate(streams):
        size = min(BLOCK, trials - b * BLOCK)
        rng = np.random.Generator(np.random.PCG64(ss))
        ns, active, u, revenue, gross, paid, bought = _block(config, eq, size, rng, counts)
        rep.price = rep.price.merge(Moments.of(paid))
        rep.purchase = rep.purchase.merge(Moments.of(bought.astype(float)))
        for j in counts:
            rep.gross[j] = rep.gross[j].merge(Moments.of(gross[j]))
        for j in rep.gains:
            rep.gains[j] = rep.gains[j].merge(Moments.of(gross[j + 1] - gross[j]))
        for n in dispersed:
            mask = active & (ns == n)[:, None]
            bins = np.minimum((u[mask] * DECILES).astype(int), DECILES - 1)
            rev = revenue[mask]
            for d in range(DECILES):
                rep.deciles[n][d] = rep.deciles[n][d].merge(Moments.of(rev[bins == d]))
    return rep


def profit_flatness(rep: MonteCarloReport) -> float:
    """Largest |decile mean revenue - equilibrium profit| / SE over dispersed markets."""
    z = 0.0
    for n, cells in rep.deciles.items():
        for m in cells:
            if m.n > 1 and m.se > 0:
                z = max(z, abs(m.mean - rep.profit[n]) / m.se)
    return z


@dataclass(frozen=True)
class GapCheck:
    gain: float      # mean of gross(j+1) - gross(j)
    se: float
    c: float

    @property
    def z(self) -> float:
        return abs(self.gain - self.c) / self.se

    def within(self, k_se: float = 4.0) -> bool:
        return self.z <= k_se


def indifference_gap(rep: MonteCarloReport, j: int | None = None) -> GapCheck:
    """Payoff gain from the (j+1)-th search versus its cost c (default j = k)."""
    j = rep.k if j is None else j
    m = rep.gains[j]
    return GapCheck(m.mean, m.se, rep.c)


def pure_optimality(rep: MonteCarloReport, k_se: float = 4.0) -> bool:
    """For a pure-k strategy: k searches weakly beat k - 1 and k + 1 within k_se SE."""
    ok = True
    if rep.k + 1 in rep.gross:
        g = rep.gains[rep.k]
        ok &= g.mean <= rep.c + k_se * g.se
    if rep.k - 1 in rep.gross:
        g = rep.gains[rep.k - 1]
        ok &= g.mean >= rep.c - k_se * g.se
    return bool(ok)
