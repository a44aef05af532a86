"""Semistable limit laws of St. Petersburg sums.

Covers the merging weights, characteristic functions of the conditional limit
W_{j,gamma} and the full limit W_gamma, numeric CDF inversion (pointwise
Gil-Pelaez quadrature and batched FFT curves), the trimmed limit law G*, the
series sampler for the a.s.-convergent trimmed-limit series Y_{r,gamma}, its
tail asymptote, centering sequences, the digit constant xi, and the Chernoff
bound for the conditional limit.

Conventions: eta = 2^j / gamma; {log2 x} = 0 at exact powers of two, matching
stpdist.psi; all dyadic scalings go through ldexp/frexp so they are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad, simpson

from petersburg.stpdist import floor_log2, frac_log2, gamma_n, psi

__all__ = [
    "SemistableParams",
    "LevyAtomSeries",
    "CdfCurve",
    "InversionError",
    "InvertedCdf",
    "p_weight",
    "r_weight",
    "log_cf_f",
    "cf_Wjgamma",
    "cf_Wgamma",
    "cdf_from_cf",
    "wjg_cdf_curve",
    "wgamma_cdf_curve",
    "curve_moments",
    "gstar_cdf",
    "gmix_cdf",
    "sample_Y",
    "y_tail_rhs",
    "y_tail_parts",
    "a_const",
    "centering",
    "centering_closed",
    "xi_and_f",
    "chernoff_h",
    "chernoff_bound",
]


class InversionError(RuntimeError):
    """CF inversion could not meet its accuracy budget."""


@dataclass(frozen=True)
class SemistableParams:
    """gamma in [1/2, 1] and an optional conditioning index j; eta = 2^j/gamma."""

    gamma: float
    j: int = None

    def __post_init__(self):
        if not (0.5 <= self.gamma <= 1.0):
            raise ValueError(f"gamma must lie in [1/2, 1], got {self.gamma}")

    @property
    def eta(self) -> float:
        jj = 0 if self.j is None else self.j
        return math.ldexp(1.0, jj) / self.gamma


@dataclass(frozen=True)
class LevyAtomSeries:
    """Dyadic Levy atoms 2^i/gamma with masses gamma*2^-i, i ranging over a
    finite window (cut at i <= j for the conditional law)."""

    locations: np.ndarray
    masses: np.ndarray
    i_low: int
    i_high: int

    @classmethod
    def build(cls, gamma: float, i_low: int, i_high: int) -> "LevyAtomSeries":
        i = np.arange(i_low, i_high + 1)
        return cls(
            locations=np.ldexp(1.0, i) / gamma,
            masses=gamma * np.ldexp(1.0, -i),
            i_low=i_low,
            i_high=i_high,
        )


def _check_merging_gamma(gamma: float):
    if not (0.5 <= gamma <= 1.0):
        raise ValueError(f"gamma must lie in [1/2, 1], got {gamma}")


def p_weight(j: int, gamma: float) -> float:
    """Merging weight of the event {maximum sits j octaves above ceil(log2 n)}:
    e^(-gamma 2^-j) (1 - e^(-gamma 2^-j)); telescopes to 1 over j in Z."""
    _check_merging_gamma(gamma)
    lam = math.ldexp(gamma, -j)
    return math.exp(-lam) * -math.expm1(-lam)


def r_weight(j: int, gamma: float, m: int) -> float:
    """P{M = m} for M Poisson(gamma 2^-j) conditioned on M >= 1."""
    _check_merging_gamma(gamma)
    if m < 1:
        raise ValueError("m must be >= 1")
    lam = math.ldexp(gamma, -j)
    # log space keeps large lam and large m finite
    log_norm = lam if lam > 36.0 else math.log(math.expm1(lam))
    return math.exp(m * math.log(lam) - math.lgamma(m + 1) - log_norm)


# ---------------------------------------------------------------------------
# characteristic functions


def _log_cf_f_taylor(eta: float, t: float) -> complex:
    # sum_{k>=2} (it)^k/k! eta^(k-1) 2^(k-1)/(2^(k-1)-1), summed in exact
    # rational arithmetic: the terms peak near e^(|t| eta) and cancel, which
    # would wipe out float precision at |t| eta beyond ~25
    if t == 0.0:
        return 0j
    tf = Fraction(t)
    ef = Fraction(eta)
    re = Fraction(0)
    im = Fraction(0)
    power = tf * tf * ef  # t^k eta^(k-1) at k = 2
    kfact = 2
    tmag = abs(t) * abs(t) * eta / 2.0
    k = 2
    kmin = 2.0 * abs(t) * eta + 8.0
    # partial sums swing up to e^(|t| eta) before cancelling, so the stop
    # rule must compare terms to the size of the limit (~|t| eta), never to
    # the running sum
    stop = 1e-18 * (1.0 + abs(t) * eta)
    while k <= 1400:
        two = 1 << (k - 1)
        term = power * two / (kfact * (two - 1))
        # i^k cycle: k%4 = 0:+re, 1:+im, 2:-re, 3:-im
        rem = k & 3
        if rem == 0:
            re += term
        elif rem == 1:
            im += term
        elif rem == 2:
            re -= term
        else:
            im -= term
        if k >= kmin and tmag < stop:
            break
        k += 1
        power *= tf * ef
        kfact *= k
        tmag *= abs(t) * eta / k
    else:
        raise InversionError("Taylor series for log cf did not settle")
    return complex(float(re), float(im))


def _log_cf_f_atoms(eta: float, t):
    # sum_{d>=0} (2^d/eta)(e^(i t eta 2^-d) - 1 - i t eta 2^-d); remainder of
    # the dropped d > D terms is below t^2 eta 2^-D
    t = np.asarray(t, dtype=float)
    tmax = float(np.max(np.abs(t))) if t.size else 0.0
    D = 2 + max(0, math.ceil(math.log2(max(tmax * tmax * eta, 1e-280)) + 54))
    D = min(D, 1100)
    d = np.arange(D + 1)
    w = np.ldexp(1.0, d) / eta  # 2^d/eta
    locs = eta * np.ldexp(1.0, -d)
    out = np.empty(t.shape, dtype=complex)
    step = 32768  # bounds the outer-product workspace
    flat = t.reshape(-1)
    of = out.reshape(-1)
    for a in range(0, flat.size, step):
        z = np.multiply.outer(flat[a : a + step], locs)
        real = -2.0 * np.square(np.sin(0.5 * z))
        imag = np.sin(z) - z
        of[a : a + step] = (real + 1j * imag) @ w
    return out


def log_cf_f(eta: float, t, backend: str = "auto"):
    """log of the centered CF component f_eta(t); scalar t gives a complex,
    array t a complex array.

    backend "taylor" is the exact-rational reference (scalar only), "atoms"
    the vectorized Levy atom series; "auto" picks taylor for scalars with
    moderate |t| eta and atoms otherwise.
    """
    if eta <= 0:
        raise ValueError("eta must be > 0")
    if backend not in ("auto", "taylor", "atoms"):
        raise ValueError(f"unknown backend {backend!r}")
    if np.ndim(t) == 0:
        tt = float(t)
        if backend == "taylor" or (backend == "auto" and abs(tt) * eta <= 48.0):
            return _log_cf_f_taylor(eta, tt)
        return complex(_log_cf_f_atoms(eta, np.array([tt]))[0])
    if backend == "taylor":
        return np.array([_log_cf_f_taylor(eta, float(v)) for v in np.ravel(t)]).reshape(
            np.shape(t)
        )
    return _log_cf_f_atoms(eta, t)


def cf_Wjgamma(j: int, gamma: float, t, backend: str = "auto"):
    """CF of the limit law conditioned on the maximum's octave: location
    log2(eta) plus the f_eta component."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    eta = math.ldexp(1.0, j) / gamma
    mu = math.log2(eta)
    if np.ndim(t) == 0:
        return complex(np.exp(1j * float(t) * mu + log_cf_f(eta, t, backend)))
    t = np.asarray(t, dtype=float)
    return np.exp(1j * t * mu + log_cf_f(eta, t, backend))


def u_gamma_const(gamma: float) -> float:
    """Location constant of the full limit CF, from its two geometric series."""
    ks = range(1, 60)
    g2 = gamma * gamma
    a = math.fsum(g2 / (g2 + 4.0**k) for k in ks)
    b = math.fsum(1.0 / (1.0 + g2 * 4.0**k) for k in range(0, 60))
    return a - b


def cf_Wgamma(gamma: float, t):
    """CF of the untrimmed merging limit: shift s_gamma + u_gamma plus the
    two-sided dyadic atom series with the 1/(1+x^2) compensator."""
    _check_merging_gamma(gamma)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    tmax = float(np.max(np.abs(t))) if t.size else 0.0
    bits = max(0, math.ceil(math.log2(1.0 + tmax)))
    i_high = 60 + bits  # large atoms: term mass ~ gamma 2^-i
    i_low = -(64 + 2 * bits)  # small atoms: term ~ t^2 2^i / gamma
    series = LevyAtomSeries.build(gamma, i_low, i_high)
    shift = -math.log2(gamma) + u_gamma_const(gamma)
    x = series.locations
    comp = x / (1.0 + x * x)
    out = np.empty(t.shape, dtype=complex)
    step = 65536
    for a in range(0, t.size, step):
        ts = t[a : a + step]
        z = np.multiply.outer(ts, x)
        real = -2.0 * np.square(np.sin(0.5 * z))
        imag = np.sin(z) - np.multiply.outer(ts, comp)
        out[a : a + step] = np.exp((real + 1j * imag) @ series.masses + 1j * ts * shift)
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# inversion


class InvertedCdf(NamedTuple):
    value: float
    error: float


def cdf_from_cf(cf: Callable, x: float, tol: float = 1e-10) -> InvertedCdf:
    """Pointwise Gil-Pelaez inversion: 1/2 - (1/pi) int_0^inf Im(e^-itx cf)/t dt.

    The oscillatory factor is handled by weighted (QAWO) quadrature; the upper
    limit T adapts until |cf(T)| < 1e-12.  Raises InversionError when the
    budget runs out or the quadrature cannot reach the requested tolerance.
    """
    T = 64.0
    while abs(cf(T)) > 1e-12:
        T *= 2.0
        if T > 131072.0:
            raise InversionError("cf does not decay; no usable truncation point")

    def im_part(t):
        return cf(t).imag / t if t != 0.0 else 0.0

    def re_part(t):
        return cf(t).real / t if t != 0.0 else 0.0

    import warnings
    from scipy.integrate import IntegrationWarning

    # Im(cf)/t can oscillate at every dyadic scale down to t = 0 (semistable
    # log-periodicity) and grow like log(1/t) for infinite-mean laws; in the
    # log substitution t = e^u the head becomes a smooth gently-periodic
    # integrand that plain extrapolating quadrature handles.  [cut, T] goes to
    # QAWO.  QUADPACK warnings are advisory (the roundoff detector is
    # conservative); the returned error bounds are what gets checked.
    cut = min(1.0, T)
    eps_t = 1e-13

    def head(u):
        t = math.exp(u)
        return (im_part(t) * math.cos(x * t) - re_part(t) * math.sin(x * t)) * t

    u_hi = math.log(cut)
    u_lo = math.log(eps_t)
    n_panels = math.ceil((u_hi - u_lo) / math.log(2.0))
    bounds = np.linspace(u_lo, u_hi, n_panels + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        v0 = 0.0
        e0 = (50.0 + abs(x)) * eps_t  # bound on the dropped (0, eps_t] sliver
        for ua, ub in zip(bounds[:-1], bounds[1:]):
            pv, pe = quad(head, ua, ub, limit=100, epsabs=tol / (8 * n_panels), epsrel=1e-12)
            v0 += pv
            e0 += pe
        if abs(x) < 1e-12:
            v1, e1 = quad(im_part, cut, T, limit=800, epsabs=tol / 8, epsrel=1e-12)
            v2, e2 = 0.0, 0.0
        else:
            v1, e1 = quad(
                im_part, cut, T, weight="cos", wvar=x, limit=800, epsabs=tol / 8, epsrel=1e-12
            )
            v2, e2 = quad(
                re_part, cut, T, weight="sin", wvar=x, limit=800, epsabs=tol / 8, epsrel=1e-12
            )
            v2, e2 = -v2, e2
    err = (e0 + e1 + e2) / math.pi + abs(cf(T))
    if err > max(tol, 1e-8) * 50:
        raise InversionError(f"inversion error estimate {err:.2e} exceeds budget at x={x}")
    val = 0.5 - (v0 + v1 + v2) / math.pi
    return InvertedCdf(min(max(val, 0.0), 1.0), err)


@dataclass
class CdfCurve:
    """CDF (and density) on a uniform grid, with a global inversion error
    estimate; evaluation clamps to 0/1 outside the window."""

    x0: float
    dx: float
    cdf: np.ndarray
    density: np.ndarray
    error: float

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(len(self.cdf))

    def eval(self, x):
        """Cubic Hermite between grid nodes (density = derivative), so the
        interpolation error matches the integration accuracy; clamps to 0/1
        outside the window."""
        x = np.asarray(x, dtype=float)
        n = len(self.cdf)
        pos = (x - self.x0) / self.dx
        i = np.clip(np.floor(pos).astype(np.int64), 0, n - 2)
        t = pos - i
        f0, f1 = self.cdf[i], self.cdf[i + 1]
        g0, g1 = self.density[i] * self.dx, self.density[i + 1] * self.dx
        t2 = t * t
        t3 = t2 * t
        out = (
            (2 * t3 - 3 * t2 + 1) * f0
            + (t3 - 2 * t2 + t) * g0
            + (-2 * t3 + 3 * t2) * f1
            + (t3 - t2) * g1
        )
        out = np.where(pos <= 0.0, 0.0, np.where(pos >= n - 1, 1.0, out))
        return np.clip(out, 0.0, 1.0)

    def ppf(self, u):
        """Inverse CDF by interpolation on the strictly informative stretch."""
        c = self.cdf
        lo = int(np.searchsorted(c, 1e-12))
        hi = int(np.searchsorted(c, 1.0 - 1e-12))
        lo = max(lo - 1, 0)
        hi = min(hi + 1, len(c) - 1)
        cc, idx = np.unique(c[lo : hi + 1], return_index=True)
        return np.interp(u, cc, self.xs[lo : hi + 1][idx])


def invert_cf_curve(cf: Callable, lo: float, hi: float, n_points: int, max_points: int = 1 << 21) -> CdfCurve:
    """FFT inversion of a CF to a density/CDF curve on [lo, hi].

    The t-grid step is tied to the window (dt = 2pi/width); n_points doubles
    until |cf(T)| at the top of the t-grid is below 1e-12, which controls the
    ringing of the truncated transform.  Densities are clipped at 0 and the
    CDF renormalized; both defects are folded into the error estimate.
    """
    width = hi - lo
    if width <= 0:
        raise ValueError("need hi > lo")
    dt = 2.0 * math.pi / width
    n = n_points
    while True:
        t_top = dt * (n - 1)
        top = abs(cf(np.array([t_top]))[0])
        if top <= 1e-12 or n >= max_points:
            break
        n *= 2
    if top > 1e-9:
        raise InversionError(f"cf still {top:.2e} at end of t-grid (T={t_top:.1f})")
    t = dt * np.arange(n)
    phi = np.asarray(cf(t), dtype=complex)
    a = phi * np.exp(-1j * t * lo)
    a[0] *= 0.5  # trapezoid endpoint
    g = (dt / math.pi) * np.real(np.fft.fft(a))
    dx = width / n
    neg = max(0.0, float(-g.min()))
    g = np.clip(g, 0.0, None)
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (g[:-1] + g[1:])) * dx))
    # Euler-Maclaurin endpoint correction lifts the cumulative trapezoid from
    # O(dx^2) to O(dx^4)
    gp = np.gradient(g, dx)
    cdf -= (dx * dx / 12.0) * (gp - gp[0])
    mass = float(cdf[-1])
    err = abs(1.0 - mass) + neg * width + float(top)
    if mass <= 0.5:
        raise InversionError("inverted density lost most of its mass; window misplaced")
    cdf = np.minimum.accumulate(np.minimum(cdf / mass, 1.0)[::-1])[::-1]
    cdf = np.maximum.accumulate(np.clip(cdf, 0.0, 1.0))
    # curves can be large; a decimated grid keeps interpolation error tiny
    stride = max(1, n >> 18)
    return CdfCurve(x0=lo, dx=dx * stride, cdf=cdf[::stride], density=g[::stride] / mass, error=err)


_WJG_CACHE: dict = {}
_WG_CACHE: dict = {}


def wjg_cdf_curve(j: int, gamma: float) -> CdfCurve:
    """Cached CDF curve of the conditional limit W_{j,gamma}.

    Window: mean log2(eta), Gaussian scale sqrt(2 eta) near the centre, but the
    right edge must clear ~2.75 eta because single big Levy jumps carry mass
    way past the Gaussian range before the superexponential regime kicks in.
    """
    key = (j, float(gamma))
    hit = _WJG_CACHE.get(key)
    if hit is not None:
        return hit
    eta = math.ldexp(1.0, j) / gamma
    mu = math.log2(eta)
    sigma = math.sqrt(2.0 * eta)
    lo = mu - max(25.0, 9.0 * sigma)
    hi = mu + max(50.0, 14.0 * sigma, 2.75 * eta)
    t_req = 70.0 if eta >= 0.5 else max(70.0, math.sqrt(34.0 / eta))
    dx_target = min(0.02 if eta <= 64.0 else 0.08, sigma / 6.0, 2.0 * math.pi / t_req)
    n = 1 << max(10, math.ceil(math.log2((hi - lo) / dx_target)))
    curve = invert_cf_curve(lambda t: cf_Wjgamma(j, gamma, t, backend="atoms"), lo, hi, n)
    _WJG_CACHE[key] = curve
    return curve


def wgamma_cdf_curve(gamma: float, hi: float = 24576.0) -> CdfCurve:
    """Cached CDF curve of the untrimmed limit W_gamma.

    The law is heavy on the right (tail ~ 1/x), so the window runs far out
    and evaluation clamps to 1 beyond it; the clamp error is P{W > hi}.  The
    tail is spiky (a big-jump bump of mass 2^-k near every 2^k/gamma), and the
    FFT wraps whatever lies beyond the edge back into the window, so the edge
    is snapped to the quiet zone sqrt(2) 2^k/gamma between bumps; the wrapped
    remainder then lands far from the bulk.
    """
    key = (float(gamma), float(hi))
    hit = _WG_CACHE.get(key)
    if hit is not None:
        return hit
    k = floor_log2(hi * gamma)
    hi_snap = math.ldexp(math.sqrt(2.0), k) / gamma
    lo = -48.0
    dx_target = 2.0 * math.pi / 70.0
    n = 1 << max(12, math.ceil(math.log2((hi_snap - lo) / dx_target)))
    curve = invert_cf_curve(lambda t: cf_Wgamma(gamma, t), lo, hi_snap, n)
    _WG_CACHE[key] = curve
    return curve


def curve_moments(curve: CdfCurve) -> tuple:
    """(mean, variance) of a density curve via composite Simpson."""
    xs = curve.x0 + curve.dx * np.arange(len(curve.density))
    m0 = simpson(curve.density, dx=curve.dx)
    m1 = simpson(curve.density * xs, dx=curve.dx) / m0
    m2 = simpson(curve.density * (xs - m1) ** 2, dx=curve.dx) / m0
    return float(m1), float(m2)


# ---------------------------------------------------------------------------
# the trimmed limit G*


def _collapse_cut(gamma: float, x_hi: float) -> int:
    # components with eta_s >= (range + 40) look identical below x_hi up to
    # the explicit no-big-jump factor, so curves above s are never built
    need = gamma * (x_hi + 104.0)
    return max(2, math.ceil(math.log2(need)) + 1)


def _mixture_cdf(gamma: float, xs: np.ndarray, star: bool, weight_tol: float) -> np.ndarray:
    _check_merging_gamma(gamma)
    xs = np.asarray(xs, dtype=float)
    finite_hi = float(xs.max()) if xs.size else 0.0
    x_hi = min(max(finite_hi, 64.0), 4096.0)
    s_cut = _collapse_cut(gamma, x_hi)
    acc = np.zeros_like(xs)
    used = 0.0
    for j in range(-8, 64):
        pj = p_weight(j, gamma)
        if pj < weight_tol:
            if j > 4 and used > 1.0 - 1e-9:
                break
            continue
        jj = j - 1
        if jj > s_cut:
            curve = wjg_cdf_curve(s_cut, gamma)
            factor = math.exp(-gamma * (math.ldexp(1.0, -s_cut) - math.ldexp(1.0, -jj)))
        else:
            curve = wjg_cdf_curve(jj, gamma)
            factor = 1.0
        lam = math.ldexp(gamma, -j)
        step = math.ldexp(1.0, j) / gamma
        cum = 0.0
        m = 1
        while cum < 1.0 - 1e-12 and m < 400:
            rw = r_weight(j, gamma, m)
            cum += rw
            shift = (m - 1) * step if star else m * step
            if rw * factor > 1e-15:
                arg_hi = finite_hi - shift
                if arg_hi >= curve.x0:
                    acc += (pj * rw * factor) * curve.eval(xs - shift)
            m += 1
        used += pj
    return acc


def gstar_cdf(gamma: float, x, weight_tol: float = 1e-10):
    """CDF of the trimmed merging limit: the double mixture of conditional
    curves G_{j-1} shifted by (m-1) 2^j/gamma with weights p_j r_j(m)."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = _mixture_cdf(gamma, xs, star=True, weight_tol=weight_tol)
    return float(out[0]) if scalar else out


def gmix_cdf(gamma: float, x, weight_tol: float = 1e-10):
    """Untrimmed limit CDF assembled from the same mixture (shifts m 2^j/gamma);
    cross-checks the direct cf_Wgamma inversion."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = _mixture_cdf(gamma, xs, star=False, weight_tol=weight_tol)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# the series representation Y_{r,gamma}


def _psi_over_arg(vals: np.ndarray, gamma: float) -> np.ndarray:
    # Psi(v/gamma)/v = 2^-floor(log2(v/gamma))/gamma, exact dyadic scaling
    e = np.frexp(vals / gamma)[1]
    return np.ldexp(1.0 / gamma, 1 - e)


def series_center(r: int, gamma: float, truncation: int) -> float:
    """sum_{k=r+1}^N Psi(k/gamma)/k, the deterministic compensator."""
    ks = np.arange(r + 1, truncation + 1, dtype=float)
    return math.fsum(_psi_over_arg(ks, gamma))


_SAMPLE_CHUNK = 65536  # fixed; results must not depend on worker count


def sample_Y(
    r: int,
    gamma: float,
    truncation: int = 10_000,
    reps: int = 1,
    seed=None,
    method: str = "block",
) -> np.ndarray:
    """Seeded draws of the truncated series sum_{k=r+1}^N (Psi(Z_k/gamma)/Z_k
    - Psi(k/gamma)/k) with Z_k the unit Poisson arrival times.

    method "direct" materializes every arrival.  method "block" (default)
    simulates the first 64 arrivals exactly, then adds later arrivals per
    dyadic block of the arrival axis: within a block the summand is the
    constant 2^-m/gamma, so only the Poisson count per block matters, and
    truncation keeps the earliest arrivals by taking blocks in order.  The two
    methods sample the same law; block turns 10^4 terms into ~10 counts.
    """
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    if truncation < r + 1:
        raise ValueError("truncation must be >= r + 1")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if method not in ("block", "direct"):
        raise ValueError(f"unknown method {method!r}")
    center = series_center(r, gamma, truncation)
    seeds = np.random.SeedSequence(seed).spawn((reps + _SAMPLE_CHUNK - 1) // _SAMPLE_CHUNK)
    out = np.empty(reps)
    pos = 0
    for ss in seeds:
        b = min(_SAMPLE_CHUNK, reps - pos)
        rng = np.random.default_rng(ss)
        if method == "direct":
            out[pos : pos + b] = _sample_chunk_direct(r, gamma, truncation, b, rng)
        else:
            out[pos : pos + b] = _sample_chunk_block(r, gamma, truncation, b, rng)
        pos += b
    return out - center


def _sample_chunk_direct(r, gamma, truncation, b, rng):
    s = np.zeros(b)
    carry = np.zeros(b)
    k0 = 0
    colblock = 2048  # bounded memory; fixed so draws are reproducible
    while k0 < truncation:
        cols = min(colblock, truncation - k0)
        z = carry[:, None] + np.cumsum(rng.standard_exponential((b, cols)), axis=1)
        carry = z[:, -1]
        lo = max(r - k0, 0)  # global indices k0+i+1 > r contribute
        if lo < cols:
            s += _psi_over_arg(z[:, lo:], gamma).sum(axis=1)
        k0 += cols
    return s


def _sample_chunk_block(r, gamma, truncation, b, rng):
    k0 = min(truncation, max(64, r + 1))
    z = np.cumsum(rng.standard_exponential((b, k0)), axis=1)
    s = _psi_over_arg(z[:, r:], gamma).sum(axis=1)
    rem = truncation - k0
    if rem == 0:
        return s
    remaining = np.full(b, rem, dtype=np.int64)
    t_lo = z[:, -1]
    m = np.frexp(t_lo / gamma)[1] - 1  # current dyadic block of the arrival axis
    for _ in range(500):
        hi = np.ldexp(gamma, m + 1)
        lam = np.where(remaining > 0, hi - t_lo, 0.0)
        counts = rng.poisson(lam)
        take = np.minimum(counts, remaining)
        s += take * np.ldexp(1.0 / gamma, -m)
        remaining -= take
        if not remaining.any():
            return s
        t_lo = hi
        m = m + 1
    raise RuntimeError("block sampler failed to exhaust the truncation budget")


def a_const(r: int, gamma: float) -> float:
    """A_{r,gamma} = sum_{k=1}^r Psi(k/gamma)/k (empty sum for r = 0)."""
    if r < 0:
        raise ValueError("r must be >= 0")
    if r == 0:
        return 0.0
    return series_center(0, gamma, r)


def y_tail_parts(
    r: int,
    gamma: float,
    x: float,
    y0_samples: np.ndarray = None,
    truncation: int = 10_000,
    reps: int = 200_000,
    seed=0,
) -> dict:
    """Pieces of the trimmed-limit tail asymptote at x: leading term, the two
    inner probabilities (ell = 0, 1) of Y_{0,gamma} + A_{r,gamma} exceeding
    x(1 - 2^(ell - {log2(gamma x)})), and the assembled bracket."""
    if r < 0:
        raise ValueError("r must be >= 0")
    gx = gamma * x
    if gx < 2.0:
        raise ValueError("need gamma * x >= 2")
    if y0_samples is None:
        y0_samples = sample_Y(0, gamma, truncation, reps, seed)
    ys = np.sort(np.asarray(y0_samples) + a_const(r, gamma))
    n = len(ys)
    fl = floor_log2(gx)
    leading = psi(gx) ** (r + 1) / (math.factorial(r + 1) * x ** (r + 1))
    inner = []
    for ell in (0, 1):
        thr = x - math.ldexp(1.0, fl + ell) / gamma  # x(1 - 2^(ell - frac)) exactly
        inner.append(float(n - np.searchsorted(ys, thr, side="right")) / n)
    scale = float(1 << (r + 1))
    bracket = 1.0 / scale + (scale - 1.0) * (inner[0] + inner[1] / scale)
    return {
        "leading": leading,
        "inner0": inner[0],
        "inner1": inner[1],
        "bracket": bracket,
        "value": leading * bracket,
        "reps": n,
    }


def y_tail_rhs(
    r: int,
    gamma: float,
    x: float,
    y0_samples: np.ndarray = None,
    truncation: int = 10_000,
    reps: int = 200_000,
    seed=0,
) -> float:
    """Tail asymptote of the trimmed limit Y_{r,gamma} at x (gamma x >= 2)."""
    return y_tail_parts(r, gamma, x, y0_samples, truncation, reps, seed)["value"]


# ---------------------------------------------------------------------------
# centering and the digit constant


def centering(n: int, gamma: float, r: int = 0) -> float:
    """a_{n,gamma}^(r) = sum_{j=r+1}^n Psi(j/gamma)/j; exact dyadic terms."""
    if not (0 <= r < n):
        raise ValueError("need 0 <= r < n")
    if not (0.0 < gamma <= 1.0):
        raise ValueError("gamma must lie in (0, 1]")
    return series_center(r, gamma, n)


def centering_closed(n: int, gamma: float) -> float:
    """Closed form of the untrimmed centering: with m_n = floor(log2((n+1)/gamma)),
    (n+1)/(gamma 2^m_n) - 1/gamma + sum_{m=1}^{m_n} ceil(gamma 2^m)/(gamma 2^m)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < gamma <= 1.0):
        raise ValueError("gamma must lie in (0, 1]")
    m_n = floor_log2((n + 1) / gamma)
    terms = [(n + 1) / math.ldexp(gamma, m_n) - 1.0 / gamma]
    for m in range(1, m_n + 1):
        g2m = math.ldexp(gamma, m)
        terms.append(math.ceil(g2m) / g2m)
    return math.fsum(terms)


def xi_and_f(gamma: float) -> tuple:
    """(xi, f) for gamma in (1/2, 1].

    xi(gamma) = 2 - (1/gamma) sum_k k eps_k 2^-k - log2(gamma), where eps are
    the binary digits of gamma in the representation with infinitely many 1's;
    floats are exactly dyadic, so the digit sum is evaluated in closed form
    after flipping the lowest set bit.  f(gamma) is its companion series
    sum_m (ceil(2^m gamma) - 2^m gamma)/(2^m gamma), a finite sum for dyadic
    gamma.  They satisfy f = xi + log2(gamma) - 1 + 1/gamma.
    """
    if not (0.5 < gamma <= 1.0):
        raise ValueError("gamma must lie in (1/2, 1]")
    g = Fraction(gamma)  # exact: floats are dyadic rationals
    if gamma == 1.0:
        digit_sum = Fraction(2)  # eps_k = 1 for all k: sum k 2^-k = 2
    else:
        den_bits = g.denominator.bit_length() - 1  # gamma = num / 2^den_bits
        num = g.numerator
        low = (num & -num).bit_length() - 1  # lowest set bit of the numerator
        t = den_bits - low  # digit index of the trailing 1 to flip
        # digits above t keep their value; digit t flips to 0; below t all 1
        head = sum(
            Fraction(k, 1 << k) for k in range(1, t) if (num >> (den_bits - k)) & 1
        )
        digit_sum = head + Fraction(t + 2, 1 << t)
    xi = float(2 - digit_sum / g) - math.log2(gamma)
    # f: terms vanish once 2^m gamma is an integer
    f_terms = []
    m = 1
    while True:
        g2m = g * (1 << m)
        if g2m.denominator == 1:
            break
        f_terms.append((math.ceil(g2m) - g2m) / g2m)
        m += 1
    f = float(sum(f_terms, start=Fraction(0)))
    return xi, f


# ---------------------------------------------------------------------------
# Chernoff bound for the conditional limit


def chernoff_h(x: float) -> float:
    """(2+x) ln(1+x/2) - x, the exponent of the conditional-limit tail bound;
    sandwiched between x^2/(4+x) and x^2/2."""
    if x < 0:
        raise ValueError("x must be >= 0")
    return (2.0 + x) * math.log1p(0.5 * x) - x


def chernoff_bound(n: int, j: int, gamma: float = None, x: float = 0.0) -> float:
    """exp(-h(x)/eta) with eta = 2^j/gamma; gamma defaults to gamma_n(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if j < 1 - (n - 1).bit_length():
        raise ValueError("j below the admissible conditioning range for this n")
    g = gamma_n(n) if gamma is None else gamma
    if g <= 0:
        raise ValueError("gamma must be > 0")
    eta = math.ldexp(1.0, j) / g
    return math.exp(-chernoff_h(x) / eta)
