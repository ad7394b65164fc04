"""Hypergeometric observation probabilities.

A buyer who samples ``k`` of ``N`` firms, ``n`` of which are active sellers,
observes ``m`` prices with probability

    alpha[N, n, k, m] = C(N - n, k - m) * C(n, m) / C(N, k)

with the convention C(a, b) = 0 whenever a < b.  Binomials are evaluated in
exact integer arithmetic and converted to float only at the end.

The generating function ``gen`` and its derivative ``gen_prime`` are the
polynomials sum_m alpha_m x^m and sum_m m alpha_m x^(m-1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, ceil

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError, IdentityInapplicable

MAX_FIRMS = 64


def binom(a: int, b: int) -> int:
    """C(a, b) with C(a, b) = 0 for b < 0 or a < b."""
    if b < 0 or a < b:
        return 0
    return comb(a, b)


@dataclass(frozen=True)
class SampleFrame:
    """(N, n, k): potential firms, active sellers, firms searched."""

    N: int
    n: int
    k: int

    def __post_init__(self):
        N, n, k = self.N, self.n, self.k
        if not all(isinstance(v, (int, np.integer)) for v in (N, n, k)):
            raise DomainError(f"frame entries must be integers, got {self!r}")
        if not 3 <= N <= MAX_FIRMS:
            raise DomainError(f"need 3 <= N <= {MAX_FIRMS}, got N={N}")
        if not 0 <= n <= N:
            raise DomainError(f"need 0 <= n <= N, got n={n}")
        if not 1 <= k <= N:
            raise DomainError(f"need 1 <= k <= N, got k={k}")

    def searching(self, k: int) -> "SampleFrame":
        return SampleFrame(self.N, self.n, k)


def _frame(frame_or_N, n=None, k=None) -> SampleFrame:
    if isinstance(frame_or_N, SampleFrame):
        return frame_or_N
    return SampleFrame(int(frame_or_N), int(n), int(k))


@lru_cache(maxsize=None)
def pmf_exact_vector(N: int, n: int, k: int) -> tuple:
    """Exact PMF over m = 0..k as a tuple of Fractions."""
    total = comb(N, k)
    return tuple(Fraction(binom(N - n, k - m) * binom(n, m), total) for m in range(k + 1))


@lru_cache(maxsize=None)
def pmf_vector(N: int, n: int, k: int) -> np.ndarray:
    """Floating-point PMF over m = 0..k (read-only array)."""
    SampleFrame(N, n, k)
    out = np.array([float(f) for f in pmf_exact_vector(N, n, k)])
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def prime_coeffs(N: int, n: int, k: int) -> np.ndarray:
    """Ascending coefficients of the derivative polynomial gen_prime."""
    out = P.polyder(pmf_vector(N, n, k)) if k >= 1 else np.zeros(1)
    out.flags.writeable = False
    return out


def pmf_exact(frame: SampleFrame, m: int) -> Fraction:
    frame = _frame(frame)
    if not 0 <= m <= frame.k:
        raise DomainError(f"m must lie in [0, k={frame.k}], got {m}")
    return pmf_exact_vector(frame.N, frame.n, frame.k)[m]


def pmf(frame: SampleFrame, m: int) -> float:
    """Probability of observing exactly ``m`` prices."""
    return float(pmf_exact(frame, m))


def gen(frame: SampleFrame, x):
    """Probability generating function evaluated at ``x`` (scalar or array)."""
    frame = _frame(frame)
    return P.polyval(x, pmf_vector(frame.N, frame.n, frame.k))


def gen_prime(frame: SampleFrame, x):
    """Derivative of :func:`gen`; divided by n it is a seller's sale probability."""
    frame = _frame(frame)
    return P.polyval(x, prime_coeffs(frame.N, frame.n, frame.k))


def mode_index(frame: SampleFrame) -> Fraction:
    """The tie point t with pmf(t) = pmf(t + 1), as an exact rational."""
    frame = _frame(frame)
    return Fraction((frame.k + 1) * (frame.n + 1), frame.N + 2) - 1


def round_up_index(t: Fraction) -> int:
    """Map a tie point to the smallest maximizer.

    Negative values map to 0, integers to themselves, positive fractions to
    the next integer up.
    """
    if t < 0:
        return 0
    return int(ceil(t))


def mode(frame: SampleFrame) -> int:
    """Smallest m maximizing pmf(frame, m)."""
    frame = _frame(frame)
    return round_up_index(mode_index(frame))


def cumulative_exact(frame: SampleFrame, l: int) -> Fraction:
    frame = _frame(frame)
    vec = pmf_exact_vector(frame.N, frame.n, frame.k)
    return sum(vec[: max(0, min(l, frame.k) + 1)], Fraction(0))


def dominance_gap(frame: SampleFrame, l: int, exact: bool = False):
    """P(M_k <= l) - P(M_{k+1} <= l); never negative.

    ``frame`` carries the lower search count k.
    """
    frame = _frame(frame)
    if not 1 <= frame.k <= frame.N - 1:
        raise DomainError(f"need 1 <= k <= N - 1, got k={frame.k}")
    if not 0 <= l <= frame.k + 1:
        raise DomainError(f"need 0 <= l <= k + 1, got l={l}")
    gap = cumulative_exact(frame, l) - cumulative_exact(frame.searching(frame.k + 1), l)
    return gap if exact else float(gap)


def psi(N: int, n: int, k: int, x):
    """alpha[n,k,1] * gen_prime(k+1, x) - alpha[n,k+1,1] * gen_prime(k, x)."""
    lo, hi = SampleFrame(N, n, k), SampleFrame(N, n, k + 1)
    if n < 2:
        raise DomainError(f"psi needs n >= 2, got n={n}")
    a1_lo = pmf_vector(N, n, k)[1]
    a1_hi = pmf_vector(N, n, k + 1)[1]
    return a1_lo * gen_prime(hi, x) - a1_hi * gen_prime(lo, x)


def _pochhammer(a, m):
    out = Fraction(1)
    for i in range(m):
        out *= a + i
    return out


def gauss_series(a: int, b: int, c: int, x, terms: int):
    """Terminating 2F1(a, b; c; x) summed over m = 0..terms."""
    coeffs = [float(_pochhammer(a, m) * _pochhammer(b, m) / (_pochhammer(c, m) * _pochhammer(1, m)))
              for m in range(terms + 1)]
    return P.polyval(x, coeffs)


def gauss_identity_residual(frame: SampleFrame, x):
    """|gen - C(N-n,k)/C(N,k) * 2F1(-n, -k; N-n-k+1; x)|.

    Only meaningful when N - n - k + 1 >= 1; otherwise the Pochhammer
    denominators vanish.
    """
    frame = _frame(frame)
    N, n, k = frame.N, frame.n, frame.k
    c = N - n - k + 1
    if c < 1:
        raise IdentityInapplicable(f"N - n - k + 1 = {c} < 1")
    scale = binom(N - n, k) / comb(N, k)
    rhs = scale * gauss_series(-n, -k, c, x, min(n, k))
    return np.abs(gen(frame, x) - rhs)
