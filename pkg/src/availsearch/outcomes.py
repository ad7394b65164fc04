"""Welfare and price metrics of an equilibrium, and comparative-statics sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hypergeom as hg
from .equilibrium import Equilibrium, active, enumerate_equilibria
from .errors import DomainError, InvalidShift
from .market import MarketConfig

BOUNDARY_TOL = 1e-4


@dataclass(frozen=True)
class OutcomeReport:
    """Buyer-side summary of an equilibrium.

    ``price`` is the expected price paid conditional on buying; ``virtual``
    is the average virtual price (no purchase counted as paying v).  The first
    search is free, so expenditure is (searches - 1) * c.
    """

    price: float
    purchase: float
    virtual: float
    searches: float
    expenditure: float
    surplus: float


def report(config: MarketConfig, eq: Equilibrium) -> OutcomeReport:
    v = config.v
    weights = eq.mix.weights()
    purchase = 0.0
    payment = 0.0
    for n in range(1, config.N + 1):
        t = config.theta[n]
        if t == 0:
            continue
        law = eq.laws[n]
        for j, w in weights.items():
            purchase += t * w * (1.0 - float(hg.pmf_vector(config.N, n, j)[0]))
            payment += t * w * float(law.payment(j))
    virtual = payment + v * (1.0 - purchase)
    searches = eq.mix.expected_searches
    expenditure = (searches - 1.0) * config.c
    price = payment / purchase if purchase > 0 else float("nan")
    return OutcomeReport(price, purchase, virtual, searches, expenditure,
                         v - virtual - expenditure)


def conditional_price_fraction(N: int, k: int, n: int) -> float:
    """alpha[n,k,1] / (1 - alpha[n,k,0]): share of buying k-searchers who see one price.

    In a pure-k market with dispersed prices this times v is the expected
    price paid given a purchase; it is 0 once every buyer compares prices.
    """
    if not 1 <= n <= N:
        raise DomainError(f"need 1 <= n <= N, got n={n}")
    if not 2 <= k <= N:
        raise DomainError(f"need 2 <= k <= N, got k={k}")
    if n >= N - k + 2:
        return 0.0
    a = hg.pmf_exact_vector(N, n, k)
    return float(a[1] / (1 - a[0]))


def branch_label(eq: Equilibrium) -> str:
    return f"{eq.kind.label}-{eq.k}"


@dataclass
class SweepRow:
    """One grid point: the swept parameter and every stable active equilibrium."""

    index: int
    x: float
    config: MarketConfig
    branches: dict = field(default_factory=dict)  # label -> (Equilibrium, OutcomeReport)


@dataclass
class Sweep:
    rows: list
    boundaries: list  # (label, x where the branch appears or disappears)

    def branch(self, label: str) -> list:
        """(x, Equilibrium, OutcomeReport) along one branch, in grid order."""
        return [(r.x, *r.branches[label]) for r in self.rows if label in r.branches]

    def labels(self) -> list:
        seen = []
        for r in self.rows:
            for label in r.branches:
                if label not in seen:
                    seen.append(label)
        return seen


def _stable_branches(config: MarketConfig) -> dict:
    out = {}
    for eq in active(enumerate_equilibria(config)):
        if eq.stable:
            out[branch_label(eq)] = (eq, report(config, eq))
    return out


def _labels_at(make, x) -> set:
    cfg = make(x)
    return {branch_label(e) for e in active(enumerate_equilibria(cfg)) if e.stable}


def _bisect_boundary(make, label, a, b, tol=BOUNDARY_TOL) -> float:
    inside_a = label in _labels_at(make, a)
    while abs(b - a) > tol:
        m = 0.5 * (a + b)
        if (label in _labels_at(make, m)) == inside_a:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def _sweep(make, grid) -> Sweep:
    rows = []
    for i, x in enumerate(grid):
        cfg = make(float(x))
        rows.append(SweepRow(i, float(x), cfg, _stable_branches(cfg)))
    boundaries = []
    for prev, cur in zip(rows, rows[1:]):
        for label in sorted(set(prev.branches) ^ set(cur.branches)):
            boundaries.append((label, _bisect_boundary(make, label, prev.x, cur.x)))
    return Sweep(rows, boundaries)


def sweep_theta(config: MarketConfig, i: int, j: int, grid) -> Sweep:
    """Move mass grid[t] from theta_j to theta_i and track stable equilibria."""
    if i == j:
        raise InvalidShift("source and target coincide")
    grid = np.asarray(grid, dtype=float)
    for amount in grid:
        config.shift(i, j, amount)  # validate every point before solving
    return _sweep(lambda a: config.shift(i, j, a), grid)


def sweep_cost(config: MarketConfig, grid) -> Sweep:
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("cost grid must be positive and strictly ascending")
    return _sweep(config.with_cost, grid)
