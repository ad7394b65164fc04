"""Market primitives: the availability distribution and the buyer search mix."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import InvalidShift, NoOligopoly, ValidationError
from .hypergeom import MAX_FIRMS

THETA_SUM_TOL = 1e-12


@dataclass(frozen=True)
class MarketConfig:
    """N potential firms, valuation v, search cost c and availability PMF theta.

    ``theta[n]`` is the probability that exactly n firms are active sellers.
    """

    N: int
    v: float
    c: float
    theta: tuple

    def __init__(self, N: int, v: float, c: float, theta: Sequence[float]):
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "v", float(v))
        object.__setattr__(self, "c", float(c))
        object.__setattr__(self, "theta", tuple(float(t) for t in theta))
        self._validate()

    def _validate(self):
        N, theta = self.N, self.theta
        if not 3 <= N <= MAX_FIRMS:
            raise ValidationError("firm-count", f"need 3 <= N <= {MAX_FIRMS}, got {N}")
        if not (math.isfinite(self.v) and self.v > 0):
            raise ValidationError("valuation", f"v must be positive, got {self.v}")
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValidationError("search-cost", f"c must be positive, got {self.c}")
        if len(theta) != N + 1:
            raise ValidationError("theta-length", f"expected {N + 1} entries, got {len(theta)}")
        if any(not math.isfinite(t) or t < 0 for t in theta):
            raise ValidationError("theta-nonnegative")
        if abs(math.fsum(theta) - 1.0) > THETA_SUM_TOL:
            raise ValidationError("theta-sum", f"theta sums to {math.fsum(theta):.15g}")

    @property
    def monopoly_mass(self) -> float:
        """Probability of at most one seller."""
        return self.theta[0] + self.theta[1]

    @property
    def has_oligopoly(self) -> bool:
        return any(t > 0 for t in self.theta[2:])

    @property
    def n_low(self) -> int:
        """Smallest oligopoly size drawn with positive probability."""
        for n in range(2, self.N + 1):
            if self.theta[n] > 0:
                return n
        raise NoOligopoly("theta_0 + theta_1 = 1: no oligopoly market is ever drawn")

    @property
    def max_search(self) -> int:
        """Largest lower search count k an active-search equilibrium can use."""
        return self.N - self.n_low + 1

    def with_cost(self, c: float) -> "MarketConfig":
        return MarketConfig(self.N, self.v, c, self.theta)

    def with_theta(self, theta: Sequence[float]) -> "MarketConfig":
        return MarketConfig(self.N, self.v, self.c, theta)

    def shift(self, i: int, j: int, amount: float) -> "MarketConfig":
        """Move probability ``amount`` from theta[j] to theta[i]."""
        if not (0 <= i <= self.N and 0 <= j <= self.N) or i == j:
            raise InvalidShift(f"bad shift indices i={i}, j={j}")
        theta = list(self.theta)
        if theta[j] - amount < -THETA_SUM_TOL or theta[i] + amount < -THETA_SUM_TOL:
            raise InvalidShift(f"shifting {amount} from theta_{j}={theta[j]} makes it negative")
        theta[j] = max(theta[j] - amount, 0.0)
        theta[i] = max(theta[i] + amount, 0.0)
        return self.with_theta(theta)


@dataclass(frozen=True)
class SearchMix:
    """Buyers search k firms with probability q and k + 1 firms otherwise."""

    k: int
    q: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "q", float(self.q))
        if not 0.0 <= self.q <= 1.0:
            raise ValidationError("mix-weight", f"q must lie in [0, 1], got {self.q}")
        if self.k < 1:
            raise ValidationError("mix-count", f"k must be >= 1, got {self.k}")

    def check(self, N: int) -> "SearchMix":
        top = N if self.q == 1.0 else N - 1
        if self.k > top:
            raise ValidationError("mix-count", f"k={self.k} too large for N={N} at q={self.q}")
        return self

    @property
    def is_pure(self) -> bool:
        return self.q == 1.0

    @property
    def k_min(self) -> int:
        """Smallest search count played with positive probability."""
        return self.k if self.q > 0 else self.k + 1

    def weights(self) -> dict:
        """Search count -> probability, zero weights dropped."""
        out = {}
        if self.q > 0:
            out[self.k] = self.q
        if self.q < 1:
            out[self.k + 1] = 1.0 - self.q
        return out

    @property
    def expected_searches(self) -> float:
        return self.q * self.k + (1.0 - self.q) * (self.k + 1)

    def with_weight(self, q: float) -> "SearchMix":
        return replace(self, q=q)
