"""St. Petersburg game distribution: exact cdf/tail/quantile, truncation, sampling.

The classical game doubles a 1-unit stake on every tail before the first head,
so the payoff is 2^K with P{K = k} = 2^-k.  The generalized game pays q^(-k/alpha)
with P{K = k} = q^(k-1) * p, q = 1 - p; alpha = 1, p = 1/2 recovers the classical
game.  Everything here that touches the classical game goes through the float
exponent field (frexp/ldexp), so dyadic quantities come out exact, not rounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "GameParams",
    "CLASSICAL",
    "floor_log2",
    "frac_log2",
    "psi",
    "cdf",
    "tail",
    "quantile",
    "gamma_n",
    "truncated_cdf",
    "truncated_moment",
    "sample",
    "sample_levels",
    "sample_truncated_levels",
]

_LOG_SNAP = 1e-12  # relative snap when a log-derived index sits on an integer


@dataclass(frozen=True)
class GameParams:
    """Tail exponent alpha in (0, 2) and success probability p in (0, 1)."""

    alpha: float = 1.0
    p: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not (0.0 < self.p < 1.0):
            raise ValueError(f"p must lie in (0, 1), got {self.p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def is_classical(self) -> bool:
        return self.alpha == 1.0 and self.p == 0.5

    def payoff(self, k: int) -> float:
        """Payoff of level k >= 1."""
        if self.is_classical:
            return math.ldexp(1.0, k)
        return self.q ** (-k / self.alpha)

    def payoff_fraction(self, k: int) -> Fraction:
        """Exact rational payoff q^(-k) of the float-q law; requires alpha == 1."""
        if self.alpha != 1.0:
            raise ValueError("rational payoffs require alpha == 1")
        return Fraction(1) / Fraction(self.q) ** k

    def level_prob(self, k: int) -> float:
        """P{K = k} = q^(k-1) * p."""
        return self.q ** (k - 1) * self.p


CLASSICAL = GameParams(1.0, 0.5)


def floor_log2(x) -> int:
    """floor(log2 x) for x > 0, exact via the exponent field."""
    if isinstance(x, int):
        if x <= 0:
            raise ValueError("x must be positive")
        return x.bit_length() - 1
    if x <= 0 or math.isinf(x) or math.isnan(x):
        raise ValueError("x must be positive and finite")
    return math.frexp(x)[1] - 1


def psi(x) -> float:
    """2^{log2 x} with the fractional part taken in [0, 1): psi(2^m) = 1.

    Multiplicatively periodic modulo doubling, equals x * 2^-floor(log2 x);
    exact for every float because it only rescales the mantissa.
    """
    if isinstance(x, int):
        x = float(x)
    if x <= 0 or math.isinf(x) or math.isnan(x):
        raise ValueError("x must be positive and finite")
    return 2.0 * math.frexp(x)[0]


def frac_log2(x) -> float:
    """Fractional part of log2 x in [0, 1), exactly 0 at powers of two."""
    return math.log2(psi(x))


def _floor_frac_log_general(x: float, params: GameParams) -> tuple[int, float]:
    # floor and fractional part of log_{1/q}(x^alpha), with snapping so that
    # grid points q^(-k/alpha) land on integer index despite float logs.
    t = params.alpha * math.log(x) / -math.log(params.q)
    r = round(t)
    if abs(t - r) <= _LOG_SNAP * max(1.0, abs(t)):
        t = float(r)
    fl = math.floor(t)
    return fl, t - fl


def tail(x, params: GameParams = CLASSICAL) -> float:
    """P{X > x}.  Equals 1 below the smallest payoff; dyadic-exact classically."""
    x = float(x)
    if math.isnan(x):
        raise ValueError("x must not be NaN")
    if params.is_classical:
        if x < 2.0:
            return 1.0
        # 2^-floor(log2 x) = psi(x)/x
        return math.ldexp(1.0, -floor_log2(x))
    if x < params.payoff(1):
        return 1.0
    fl, _ = _floor_frac_log_general(x, params)
    return params.q**fl


def cdf(x, params: GameParams = CLASSICAL) -> float:
    """P{X <= x} = 1 - tail(x)."""
    return 1.0 - tail(x, params)


def quantile(s: float, params: GameParams = CLASSICAL) -> float:
    """Generalized inverse of the cdf: smallest payoff x with cdf(x) >= s.

    Always a payoff q^(-k/alpha); the classical value is 2^ceil(-log2(1-s)),
    with quantile(0) = 2.
    """
    if not (0.0 <= s < 1.0):
        raise ValueError(f"s must lie in [0, 1), got {s}")
    if params.is_classical:
        # smallest k with 1 - 2^-k >= s; ceil(-log2(1-s)) = 1 - e exactly,
        # where 1-s = m * 2^e with m in [1/2, 1)
        e = math.frexp(1.0 - s)[1]
        return math.ldexp(1.0, max(1 - e, 1))
    if s == 0.0:
        return params.payoff(1)
    t = math.log1p(-s) / math.log(params.q)
    r = round(t)
    if abs(t - r) <= _LOG_SNAP * max(1.0, abs(t)):
        t = float(r)
    return params.payoff(max(1, math.ceil(t)))


def gamma_n(n: int) -> float:
    """n / 2^ceil(log2 n), the position of n inside its dyadic octave, in (1/2, 1]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = (n - 1).bit_length()  # ceil(log2 n) for n >= 1
    return math.ldexp(float(n), -k)


def truncated_cdf(x, k: int) -> float:
    """Cdf of the game truncated at level k: levels > k removed, mass renormalized."""
    if k < 1:
        raise ValueError("k must be >= 1")
    x = float(x)
    if x < 2.0:
        return 0.0
    j = min(floor_log2(x), k)
    # P{X <= 2^j} / P{X <= 2^k}, both dyadic
    return (1.0 - math.ldexp(1.0, -j)) / (1.0 - math.ldexp(1.0, -k))


def truncated_moment(ell: int, k: int) -> float:
    """E[X^ell] under the level-k truncated classical game.

    ell = 1 gives k / (1 - 2^-k); for ell >= 2 the level sum is geometric with
    ratio 2^(ell-1).
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    norm = 1.0 - math.ldexp(1.0, -k)
    if ell == 1:
        return k / norm
    r = math.ldexp(1.0, ell - 1)
    return r / norm * (r**k - 1.0) / (r - 1.0)


def sample_levels(count: int, rng: np.random.Generator, params: GameParams = CLASSICAL) -> np.ndarray:
    """Draw level indices K (int64).  Classical atoms are exact: the level is read
    off the binary exponent of 1-U rather than a log transform."""
    u = rng.random(count)
    v = 1.0 - u  # v in (0, 1]
    if params.is_classical:
        m, e = np.frexp(v)
        # K = min{k : v > 2^-k}; when v is an exact power of two the mantissa
        # is 1/2 and the exponent overshoots by one.
        return (1 - e + (m == 0.5)).astype(np.int64)
    k = np.ceil(np.log(v) / math.log(params.q))
    return np.maximum(k, 1.0).astype(np.int64)


def sample_truncated_levels(k: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Classical levels conditioned on K <= k, atom-exact via the same exponent trick."""
    if k < 1:
        raise ValueError("k must be >= 1")
    u = rng.random(count)
    v = 1.0 - u * (1.0 - math.ldexp(1.0, -k))  # v in (2^-k, 1]
    m, e = np.frexp(v)
    return (1 - e + (m == 0.5)).astype(np.int64)


def payoffs_from_levels(levels: np.ndarray, params: GameParams = CLASSICAL) -> np.ndarray:
    """Map level indices to payoffs; classical uses ldexp so values are exact."""
    if params.is_classical:
        return np.ldexp(1.0, levels.astype(np.int64))
    return np.power(params.q, -levels / params.alpha)


def sample(params: GameParams, count: int, seed) -> np.ndarray:
    """Seeded i.i.d. payoff draws."""
    if count < 0:
        raise ValueError("count must be >= 0")
    rng = np.random.default_rng(seed)
    return payoffs_from_levels(sample_levels(count, rng, params), params)
