"""Buyer-side equilibrium conditions, cutoff costs and equilibrium enumeration.

A buyer who mixes between k and k + 1 searches must be indifferent, i.e. the
benefit of the extra search P_k - P_{k+1} (difference of *virtual* prices,
where not buying counts as paying v) equals the search cost c.  The benefit
is concave in the weight q on k searches, so each k contributes at most two
mixed equilibria; the one on the rising branch is locally stable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

from scipy.optimize import brentq, minimize_scalar

from . import quadrature
from .errors import CostTooLarge, DomainError, SearchModelError
from .market import MarketConfig, SearchMix
from .pricing import build_price_laws

Q_CLAMP = 1e-6
SLOPE_STEP = 1e-6
CUTOFF_TIE = 1e-12


class EqKind(enum.IntEnum):
    """Ordering doubles as the enumeration sort key."""

    DIAMOND = 0
    PURE = 1
    MIXED = 2

    @property
    def label(self) -> str:
        return self.name.lower()


def virtual_price(config: MarketConfig, mix: SearchMix, j: int, *, strict: bool = True,
                  order: int = quadrature.DEFAULT_ORDER) -> float:
    """P_j: expected price for a buyer sampling j firms, no purchase counted as v."""
    if not 1 <= j <= config.N:
        raise DomainError(f"need 1 <= j <= N, got j={j}")
    theta = config.theta
    if not config.has_oligopoly:
        return config.v
    laws = build_price_laws(config, mix, strict)
    total = (theta[0] + theta[1]) * config.v
    for n in range(2, config.N + 1):
        if theta[n] > 0:
            total += theta[n] * laws[n].virtual(j, order)
    return total


def _check_k(config: MarketConfig, k: int):
    top = config.max_search
    if not 1 <= k <= top:
        raise DomainError(f"need 1 <= k <= N - n_low + 1 = {top}, got k={k}")


@lru_cache(maxsize=65536)
def benefit(config: MarketConfig, k: int, q: float, form: str = "direct",
            order: int = quadrature.DEFAULT_ORDER) -> float:
    """P_k - P_{k+1} under the mix (k, q); q = 0 and q = 1 give the exact limits.

    ``form="parts"`` evaluates the same quantity after integrating by parts,
    -sum_n theta_n int p_n'(x) (gen_k(x) - gen_{k+1}(x)) dx.
    """
    _check_k(config, k)
    q = float(q)
    mix = SearchMix(k, q)
    if not config.has_oligopoly:
        return 0.0
    laws = build_price_laws(config, mix, q > 0)
    total = 0.0
    for n in range(2, config.N + 1):
        t = config.theta[n]
        if t == 0:
            continue
        law = laws[n]
        if form == "direct":
            total += t * (law.virtual(k, order) - law.virtual(k + 1, order))
        elif form == "parts":
            total += t * law.virtual_gap_by_parts(k, order)
        else:
            raise ValueError(f"unknown form {form!r}")
    return total


def benefit_slope(config: MarketConfig, k: int, q: float, h: float = SLOPE_STEP) -> float:
    """d benefit / d q by central difference (one-sided next to 0 or 1)."""
    lo, hi = max(q - h, 0.0), min(q + h, 1.0)
    return (benefit(config, k, hi) - benefit(config, k, lo)) / (hi - lo)


@dataclass(frozen=True)
class MixedRange:
    """Cost interval over which the (k, k+1) benefit curve produces roots."""

    k: int
    lower: float
    upper: float
    q_star: float
    at_zero: float
    at_one: float


@lru_cache(maxsize=4096)
def mixed_cost_range(config: MarketConfig, k: int) -> MixedRange:
    """(c_low, c_high, q*) for the benefit curve between k and k + 1 searches."""
    _check_k(config, k)
    at_zero = benefit(config, k, 0.0)
    at_one = benefit(config, k, 1.0)
    res = minimize_scalar(lambda q: -benefit(config, k, q), bounds=(0.0, 1.0),
                          method="bounded", options={"xatol": 1e-10})
    q_star = float(res.x)
    upper = max(-float(res.fun), at_zero, at_one)
    return MixedRange(k, min(at_zero, at_one), upper, q_star, at_zero, at_one)


@lru_cache(maxsize=4096)
def pure_interval(config: MarketConfig, k: int) -> tuple:
    """[c_low_k, c_high_k]: costs at which all buyers searching k firms is optimal."""
    if not 2 <= k <= config.max_search:
        raise DomainError(f"need 2 <= k <= N - n_low + 1 = {config.max_search}, got k={k}")
    # Laws at mix(k-1, 0) coincide with those at mix(k, 1).
    return benefit(config, k, 1.0), benefit(config, k - 1, 0.0)


@dataclass(frozen=True)
class MixedRoot:
    q: float
    stable: bool
    slope: float
    residual: float


def solve_mixed(config: MarketConfig, k: int, c: float | None = None) -> list:
    """Roots of benefit(k, q) = c on (0, 1): at most one per monotone branch."""
    c = config.c if c is None else float(c)
    _check_k(config, k)
    if not config.has_oligopoly:
        return []
    rng = mixed_cost_range(config, k)
    q_star = min(max(rng.q_star, Q_CLAMP), 1 - Q_CLAMP)

    def f(q):
        return benefit(config, k, q) - c

    roots = []
    for a, b in ((Q_CLAMP, q_star), (q_star, 1 - Q_CLAMP)):
        fa, fb = f(a), f(b)
        if fa == 0.0:
            q = a
        elif fb == 0.0 and b != q_star:
            q = b
        elif fa * fb < 0:
            q = brentq(f, a, b, xtol=1e-15, maxiter=200)
        else:
            continue
        if roots and abs(roots[-1].q - q) < 1e-12:
            continue
        slope = benefit_slope(config, k, q)
        roots.append(MixedRoot(float(q), bool(slope > 0), float(slope), float(f(q))))
    return roots


@dataclass(frozen=True)
class Equilibrium:
    """An equilibrium: buyer strategy, seller laws and diagnostics.

    ``gap`` is the indifference residual benefit - c for mixed equilibria and
    the smaller of the two incentive slacks for pure ones.  ``slack`` is the
    participation slack v - (average virtual price + paid search cost).
    """

    kind: EqKind
    k: int
    q: float
    laws: tuple = field(repr=False, compare=False)
    stable: bool
    marginal: bool = False
    gap: float = 0.0
    slack: float = 0.0
    note: str = ""

    @property
    def mix(self) -> SearchMix:
        return SearchMix(self.k, self.q)

    @property
    def searches_more_than_one(self) -> bool:
        return self.kind is not EqKind.DIAMOND

    def sort_key(self):
        return (int(self.kind), self.k, self.q)

    def describe(self) -> str:
        if self.kind is EqKind.DIAMOND:
            return "diamond"
        if self.kind is EqKind.PURE:
            return f"pure(k={self.k})"
        return f"mixed(k={self.k}, q={self.q:.6g})"


def participation_slack(config: MarketConfig, mix: SearchMix) -> float:
    """v minus the expected virtual price and paid search cost under the mix."""
    cost = (mix.expected_searches - 1.0) * config.c
    paid = sum(w * virtual_price(config, mix, j) for j, w in mix.weights().items())
    return config.v - paid - cost


DIAMOND_NOTE = "stability not classified by the model; reported stable by convention"


def diamond(config: MarketConfig) -> Equilibrium:
    mix = SearchMix(1, 1.0)
    laws = build_price_laws(config, mix) if config.has_oligopoly else ()
    return Equilibrium(EqKind.DIAMOND, 1, 1.0, laws, True, False,
                       0.0, float(participation_slack(config, mix)), DIAMOND_NOTE)


def _mixed_equilibrium(config: MarketConfig, k: int, root: MixedRoot) -> Equilibrium:
    mix = SearchMix(k, root.q)
    return Equilibrium(EqKind.MIXED, k, root.q, build_price_laws(config, mix), root.stable,
                       root.slope == 0.0, root.residual, float(participation_slack(config, mix)))


def _pure_equilibrium(config: MarketConfig, k: int, c: float) -> Equilibrium | None:
    lo, hi = pure_interval(config, k)
    tol = CUTOFF_TIE * config.v
    if not lo - tol <= c <= hi + tol:
        return None
    marginal = bool(abs(c - lo) <= tol or abs(c - hi) <= tol)
    mix = SearchMix(k, 1.0)
    return Equilibrium(EqKind.PURE, k, 1.0, build_price_laws(config, mix), not marginal,
                       marginal, float(min(c - lo, hi - c)), float(participation_slack(config, mix)),
                       "cost on a cutoff boundary" if marginal else "")


def enumerate_equilibria(config: MarketConfig, c: float | None = None) -> list:
    """All equilibria at cost c (default: config.c), Diamond first."""
    if c is not None:
        config = config.with_cost(c)
    c = config.c
    out = [diamond(config)]
    if config.has_oligopoly:
        for k in range(1, config.max_search + 1):
            for root in solve_mixed(config, k, c):
                out.append(_mixed_equilibrium(config, k, root))
            if k >= 2:
                eq = _pure_equilibrium(config, k, c)
                if eq is not None:
                    out.append(eq)
    out.sort(key=Equilibrium.sort_key)
    return out


def active(equilibria) -> list:
    return [e for e in equilibria if e.kind is not EqKind.DIAMOND]


@dataclass(frozen=True)
class CutoffRow:
    k: int
    pure: tuple | None
    mixed: MixedRange


def cutoff_table(config: MarketConfig) -> list:
    """Per k: pure interval (k >= 2) and mixed cost range between k and k + 1."""
    rows = []
    for k in range(1, config.max_search + 1):
        rows.append(CutoffRow(k, pure_interval(config, k) if k >= 2 else None,
                              mixed_cost_range(config, k)))
    return rows


def small_cost_threshold(config: MarketConfig) -> float:
    """Cost bound below which exactly one stable active-search equilibrium exists.

    Uses the lower cutoffs of the pure intervals at k = 2 and k = N - n_low + 1.
    When N - n_low + 1 = 1 there is no pure interval and the peak of the single
    benefit curve is used instead.
    """
    top = config.max_search
    if top == 1:
        return mixed_cost_range(config, 1).upper
    return min(pure_interval(config, 2)[0], pure_interval(config, top)[0])


def stable_small_c(config: MarketConfig) -> Equilibrium:
    """The stable mixed equilibrium between N - n_low + 1 and N - n_low + 2 searches."""
    threshold = small_cost_threshold(config)
    if not config.c < threshold:
        raise CostTooLarge(threshold)
    k = config.max_search
    stable = [r for r in solve_mixed(config, k) if r.stable]
    if len(stable) != 1:
        raise SearchModelError(f"expected one stable root at k={k}, found {len(stable)}")
    eq = _mixed_equilibrium(config, k, stable[0])
    others = [e for e in active(enumerate_equilibria(config)) if e.stable and e != eq]
    if others:
        raise SearchModelError(f"stable equilibrium not unique: {[e.describe() for e in others]}")
    return eq


def stable_active(config: MarketConfig, c: float | None = None) -> list:
    """Stable active-search equilibria (mixed and interior pure)."""
    return [e for e in active(enumerate_equilibria(config, c)) if e.stable]
