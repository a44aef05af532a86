"""End-to-end consistency checks tying the engines together.

Each check compares independent routes to the same quantity (closed form vs
exact table, exact tail vs asymptote, simulation vs limit curve) and returns
a CheckResult with the pinned target and the measured outcome.  The test
suite asserts one check per test; the repro-all subcommand runs the same
functions and renders a report.  Every stochastic check takes its seed and
replicate count as keyword arguments so a config file can override them.
"""

from __future__ import annotations

import math
import os
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from petersburg.asymptotics import gen_snr_tail_rhs, snr_tail_rhs, subexp_limits
from petersburg.exact import (
    conv_ratio_curve,
    dyadic_grid,
    enum_oracle,
    sum_tail_exact,
    trimmed_tail_exact,
    two_sum_tail_closed,
)
from petersburg.limitlaw import (
    centering,
    centering_closed,
    chernoff_h,
    curve_moments,
    log_cf_f,
    p_weight,
    r_weight,
    sample_Y,
    wjg_cdf_curve,
    xi_and_f,
    y_tail_rhs,
)
from petersburg.montecarlo import (
    chernoff_check,
    histogram_fig1,
    merge_check,
    side_lobe_stats,
    trimmed_merge_check,
)
from petersburg.stpdist import GameParams, frac_log2

__all__ = [
    "CheckResult",
    "ALL_CHECKS",
    "DEFAULT_CONFIG",
    "run_by_name",
    "check_two_sum_closed_form",
    "check_trimmed_exact_vs_enumeration",
    "check_trimmed_tail_asymptote",
    "check_oscillation_band",
    "check_two_sum_convolution_ratio",
    "check_weight_normalization",
    "check_cf_moments_and_backends",
    "check_merging_ks",
    "check_y_tail_bracket",
    "check_centering_identities",
    "check_chernoff_bounds",
    "check_generalized_game",
    "check_figure_shapes",
    "check_thread_determinism",
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    target: str
    measured: str

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name}: {self.measured}  [target: {self.target}]"


def _tail_float(dp) -> float:
    return float(dp.as_fraction())


def check_two_sum_closed_form() -> CheckResult:
    """Closed form for P{S_2 > 2^k + 2^l} against the exact table."""
    total = bad = 0
    for k in range(1, 13):
        for ell in range(k, 13):
            total += 1
            if two_sum_tail_closed(k, ell) != sum_tail_exact(2, (1 << k) + (1 << ell)):
                bad += 1
    return CheckResult(
        "two_sum_closed_form",
        bad == 0,
        "exact rational equality for all 1 <= k <= l <= 12",
        f"{total - bad}/{total} pairs equal",
    )


def check_trimmed_exact_vs_enumeration() -> CheckResult:
    """Trimmed-sum DP against brute multiset enumeration on small games."""
    total = bad = 0
    for n in range(1, 5):
        for r in range(0, min(3, n)):
            for x in range(2, 65):
                total += 1
                if trimmed_tail_exact(n, r, x) != enum_oracle(n, r, x):
                    bad += 1
    return CheckResult(
        "trimmed_exact_vs_enumeration",
        bad == 0,
        "exact rational equality for n <= 4, r <= 2, x in 2..64",
        f"{total - bad}/{total} points equal",
    )


def check_trimmed_tail_asymptote(ratio_lo: float = 0.98, ratio_hi: float = 1.02) -> CheckResult:
    """Exact trimmed tail over its first-order asymptote at mid-octave points."""
    ratios = []
    for m in range(10, 15):
        x = 3 * (1 << m)
        exact = _tail_float(trimmed_tail_exact(4, 1, x))
        asym = snr_tail_rhs(4, 1, x).value
        ratios.append(exact / asym)
    ok = all(ratio_lo <= v <= ratio_hi for v in ratios)
    return CheckResult(
        "trimmed_tail_asymptote",
        ok,
        f"exact/asymptote in [{ratio_lo}, {ratio_hi}] at x = 3*2^m, m = 10..14",
        f"ratios {min(ratios):.5f}..{max(ratios):.5f}",
    )


# Oscillation extremes of x P{S_n > x} / n.  The lower envelope is approached
# just above a power of two (where the inner correction is still small but the
# leading factor has reset), the upper one just below.  The x values below sit
# at the measured minima for each n; the band check covers two full octaves.
_LIMINF_POINTS = {2: 66192, 4: 132120, 16: 529900}
_LIMSUP_X = 8191


def check_oscillation_band(
    band_lo: float = 0.999, band_hi: float = 2.1, endpoint_tol: float = 0.02
) -> CheckResult:
    guard = 1 << 20
    worst_lo = worst_hi = 0.0
    ok = True
    # largest x first so each n caches one table and the rest reuse it
    for n, x in _LIMINF_POINTS.items():
        v = x * _tail_float(sum_tail_exact(n, x, cap_guard=guard)) / n
        worst_lo = max(worst_lo, abs(v - 1.0))
        ok = ok and abs(v - 1.0) <= endpoint_tol
    for n in (2, 4, 16):
        v = _LIMSUP_X * _tail_float(sum_tail_exact(n, _LIMSUP_X, cap_guard=guard)) / (2 * n)
        worst_hi = max(worst_hi, abs(v - 1.0))
        ok = ok and abs(v - 1.0) <= endpoint_tol
    band = []
    for n in (2, 4, 16):
        for x in dyadic_grid(12, 14, 33):
            if not 0.1 < frac_log2(x) < 0.9:
                continue
            band.append(x * _tail_float(sum_tail_exact(n, x, cap_guard=guard)) / n)
    ok = ok and all(band_lo <= v <= band_hi for v in band)
    return CheckResult(
        "oscillation_band",
        ok,
        f"endpoints within {endpoint_tol} of n and 2n; band in [{band_lo}, {band_hi}]",
        f"endpoint devs {worst_lo:.4f}/{worst_hi:.4f}; band {min(band):.4f}..{max(band):.4f} over {len(band)} points",
    )


def check_two_sum_convolution_ratio(conv_tol: float = 0.01) -> CheckResult:
    """P{S_2 > x} / P{X > x} hits 4 at a power of two and 2 just below it."""
    rows = dict(conv_ratio_curve([4096.0, 4095.0]))
    d_hi = abs(rows[4096.0] / 4.0 - 1.0)
    d_lo = abs(rows[4095.0] / 2.0 - 1.0)
    return CheckResult(
        "two_sum_convolution_ratio",
        d_hi <= conv_tol and d_lo <= conv_tol,
        f"ratio(4096)/4 and ratio(4095)/2 within {conv_tol} of 1",
        f"ratio(4096) = {rows[4096.0]:.6f}, ratio(4095) = {rows[4095.0]:.6f}",
    )


def check_weight_normalization(
    weight_count: int = 50, weight_seed: int = 23, weight_tol: float = 1e-12
) -> CheckResult:
    """Level weights sum to one, and so do the tie counts at each level."""
    rng = np.random.default_rng(weight_seed)
    worst_p = worst_r = 0.0
    for _ in range(weight_count):
        j = int(rng.integers(-6, 41))
        g = 0.5 + 0.5 * float(rng.uniform())
        total_p = sum(p_weight(i, g) for i in range(-8, 61))
        worst_p = max(worst_p, abs(total_p - 1.0))
        total_r = sum(r_weight(j, g, m) for m in range(1, 400))
        worst_r = max(worst_r, abs(total_r - 1.0))
    ok = worst_p <= weight_tol and worst_r <= weight_tol
    return CheckResult(
        "weight_normalization",
        ok,
        f"both families sum to 1 within {weight_tol:g} for {weight_count} random (j, gamma)",
        f"worst level-weight error {worst_p:.2e}, worst tie-count error {worst_r:.2e}",
    )


def check_cf_moments_and_backends(
    moment_tol: float = 1e-6, cf_tol: float = 1e-10
) -> CheckResult:
    """Inverted curve moments against mean log2(eta), variance 2*eta; and the
    series backend of the log characteristic exponent against the atom sum."""
    cases = ((0, 1.0), (1, 0.75), (-1, 0.6))
    worst_mom = 0.0
    for j, g in cases:
        eta = 2.0**j / g
        mean, var = curve_moments(wjg_cdf_curve(j, g))
        worst_mom = max(worst_mom, abs(mean - math.log2(eta)), abs(var - 2.0 * eta))
    ts = np.linspace(0.25, 12.0, 48)
    worst_cf = 0.0
    for j, g in cases:
        eta = 2.0**j / g
        d = np.abs(log_cf_f(eta, ts, backend="taylor") - log_cf_f(eta, ts, backend="atoms"))
        worst_cf = max(worst_cf, float(d.max()))
    ok = worst_mom <= moment_tol and worst_cf <= cf_tol
    return CheckResult(
        "cf_moments_and_backends",
        ok,
        f"moments within {moment_tol:g}; backends agree within {cf_tol:g}",
        f"worst moment error {worst_mom:.2e}, worst backend gap {worst_cf:.2e}",
    )


def check_merging_ks(
    merge_reps: int = 200_000, merge_seed: int = 11, ks_tol: float = 0.05
) -> CheckResult:
    """KS distance to the limit curve shrinks from n = 64 to n = 4096 and ends
    below tolerance, for the full sum and for the max-trimmed sum."""
    ks_small = merge_check(64, reps=merge_reps, seed=merge_seed)["ks"]
    ks_big = merge_check(4096, reps=merge_reps, seed=merge_seed)["ks"]
    kst_small = trimmed_merge_check(64, reps=merge_reps, seed=merge_seed)["ks"]
    kst_big = trimmed_merge_check(4096, reps=merge_reps, seed=merge_seed)["ks"]
    ok = ks_big <= ks_tol and kst_big <= ks_tol and ks_big < ks_small and kst_big < kst_small
    return CheckResult(
        "merging_ks",
        ok,
        f"KS at n = 4096 below {ks_tol} and below the n = 64 value, both statistics",
        f"full {ks_small:.4f} -> {ks_big:.4f}; trimmed {kst_small:.4f} -> {kst_big:.4f}",
    )


def check_y_tail_bracket(
    y_reps: int = 10_000_000,
    y_truncation: int = 10_000,
    y_seed: int = 13,
    y_ratio_lo: float = 0.9,
    y_ratio_hi: float = 1.1,
    y_band_lo: float = 0.9,
    y_band_hi: float = 2.2,
) -> CheckResult:
    """Sampled limit-series tails against the bracket formula, sharing one
    sample array between the empirical side and the formula's inner terms."""
    ys = np.sort(sample_Y(0, 1.0, truncation=y_truncation, reps=y_reps, seed=y_seed))

    def phat(x: float) -> float:
        return float(ys.size - np.searchsorted(ys, x, side="right")) / ys.size

    ratios = []
    for x in (96.0, 192.0):
        rhs = y_tail_rhs(0, 1.0, x, y0_samples=ys, truncation=y_truncation)
        ratios.append(phat(x) / rhs)
    band = [x * phat(x) for x in dyadic_grid(4, 10, 4)]
    ok = all(y_ratio_lo <= v <= y_ratio_hi for v in ratios)
    ok = ok and all(y_band_lo <= v <= y_band_hi for v in band)
    return CheckResult(
        "y_tail_bracket",
        ok,
        f"empirical/formula in [{y_ratio_lo}, {y_ratio_hi}] at x = 96, 192; "
        f"x*tail in [{y_band_lo}, {y_band_hi}] on the dyadic sweep",
        f"ratios {ratios[0]:.4f}, {ratios[1]:.4f}; sweep {min(band):.4f}..{max(band):.4f}",
    )


def check_centering_identities(
    centering_count: int = 200,
    xi_count: int = 100,
    centering_seed: int = 29,
    centering_tol: float = 1e-12,
    xi_tol: float = 1e-10,
) -> CheckResult:
    ok_anchor = centering(8, 1.0, 0) == 3.125 and xi_and_f(0.75)[1] == 1.0 / 3.0
    rng = np.random.default_rng(centering_seed)
    worst_c = 0.0
    for _ in range(centering_count):
        n = int(rng.integers(1, 5001))
        g = 0.5 + 0.5 * float(rng.uniform(1e-9, 1.0))
        worst_c = max(worst_c, abs(centering(n, g, 0) - centering_closed(n, g)))
    worst_f = 0.0
    for _ in range(xi_count):
        g = 0.5 + 0.5 * float(rng.uniform(1e-9, 1.0))
        xi, f = xi_and_f(g)
        worst_f = max(worst_f, abs(f - (xi + math.log2(g) - 1.0 + 1.0 / g)))
    ok = ok_anchor and worst_c <= centering_tol and worst_f <= xi_tol
    return CheckResult(
        "centering_identities",
        ok,
        f"anchors exact; sum vs closed form within {centering_tol:g}; "
        f"f vs xi identity within {xi_tol:g}",
        f"anchors {'ok' if ok_anchor else 'BROKEN'}; "
        f"worst centering gap {worst_c:.2e}, worst identity gap {worst_f:.2e}",
    )


def check_chernoff_bounds(
    chernoff_reps: int = 1_000_000, chernoff_seed: int = 17
) -> CheckResult:
    """No empirical exceedance of the exponential bound, and the rate function
    sits between its two quadratic envelopes."""
    violations = 0
    rows = 0
    for j in (0, 1):
        res = chernoff_check(1024, j, reps=chernoff_reps, seed=chernoff_seed)
        rows += len(res["rows"])
        violations += sum(1 for row in res["rows"] if row["violation"])
    xs = np.linspace(1e-3, 50.0, 4000)
    h = np.array([chernoff_h(float(x)) for x in xs])
    lo = xs * xs / (4.0 + xs)
    hi = xs * xs / 2.0
    slack = 1e-12 * np.maximum(1.0, h)
    envel_ok = bool(np.all(h >= lo - slack) and np.all(h <= hi + slack))
    ok = violations == 0 and envel_ok
    return CheckResult(
        "chernoff_bounds",
        ok,
        "zero bound violations at n = 1024, j in {0, 1}; x^2/(4+x) <= h(x) <= x^2/2",
        f"{violations}/{rows} violations; envelopes {'hold' if envel_ok else 'BROKEN'}",
    )


def check_generalized_game(
    gen_ratio_lo: float = 0.85, gen_ratio_hi: float = 1.15, gen_far_tol: float = 0.015
) -> CheckResult:
    """Subexponential limits snap to (2, 3) at p = 1/3, and the generalized
    tail asymptote tracks brute enumeration along the payoff scale."""
    params = GameParams(1.0, 1.0 / 3.0)
    lims = subexp_limits(params)
    ok_lims = lims == (2.0, 3.0)
    x_near, x_far = 10.0, 10.0 * 1.5**8
    r_near = float(enum_oracle(3, 0, x_near, params=params)) / gen_snr_tail_rhs(
        3, 0, x_near, params=params
    )
    r_far = float(enum_oracle(3, 0, x_far, params=params)) / gen_snr_tail_rhs(
        3, 0, x_far, params=params
    )
    ok = ok_lims and gen_ratio_lo <= r_near <= gen_ratio_hi and abs(r_far - 1.0) <= gen_far_tol
    return CheckResult(
        "generalized_game",
        ok,
        f"limits == (2, 3); near ratio in [{gen_ratio_lo}, {gen_ratio_hi}]; "
        f"far ratio within {gen_far_tol} of 1",
        f"limits {lims}; ratio(10) = {r_near:.5f}, ratio(10*1.5^8) = {r_far:.5f}",
    )


def check_figure_shapes(
    fig1_reps: int = 1_000_000, fig_seed: int = 19, lobe_ratio_max: float = 0.25
) -> CheckResult:
    """Trimming kills the side lobes of the log-sum histogram, and the exact
    tail of S_16 drops strictly at every power of two."""
    hist = histogram_fig1(n=128, reps=fig1_reps, seed=fig_seed)
    stats = side_lobe_stats(hist)
    ok_lobes = stats["ratio"] < lobe_ratio_max and stats["lobes_untrimmed"] >= 2
    drops_ok = all(
        sum_tail_exact(16, (1 << m) - 1) > sum_tail_exact(16, 1 << m) for m in range(6, 13)
    )
    return CheckResult(
        "figure_shapes",
        ok_lobes and drops_ok,
        f"trimmed/untrimmed lobe mass < {lobe_ratio_max} with >= 2 lobes; "
        "strict tail drop at 2^m, m = 6..12",
        f"lobe ratio {stats['ratio']:.4f}, {stats['lobes_untrimmed']} lobes; "
        f"drops {'all strict' if drops_ok else 'BROKEN'}",
    )


def _run_cli(args: list, threads: str) -> subprocess.CompletedProcess:
    env = dict(os.environ)
    env["PETERSBURG_THREADS"] = threads
    cmd = [sys.executable, "-m", "petersburg.cli"] + args + ["--threads", threads]
    return subprocess.run(cmd, env=env, capture_output=True, timeout=600)


def check_thread_determinism(det_reps: int = 30_000, det_seed: int = 7) -> CheckResult:
    """Byte-identical stochastic output regardless of the advertised thread
    count, for a file-writing and a stdout-writing subcommand."""
    problems = []
    with tempfile.TemporaryDirectory() as td:
        blobs = []
        for threads in ("1", "8"):
            out = Path(td) / f"sim-{threads}.csv"
            res = _run_cli(
                [
                    "mc-sim",
                    "--n", "64",
                    "--r", "1",
                    "--reps", str(det_reps),
                    "--seed", str(det_seed),
                    "--out", str(out),
                ],
                threads,
            )
            if res.returncode != 0:
                problems.append(f"mc-sim exit {res.returncode}")
                blobs.append(b"")
            else:
                blobs.append(out.read_bytes())
        if blobs[0] != blobs[1] or not blobs[0]:
            problems.append("mc-sim outputs differ")
    merged = []
    for threads in ("1", "8"):
        res = _run_cli(
            ["merge-check", "--n", "64", "--reps", "20000", "--seed", str(det_seed)],
            threads,
        )
        if res.returncode != 0:
            problems.append(f"merge-check exit {res.returncode}")
        merged.append(res.stdout)
    if merged[0] != merged[1] or not merged[0]:
        problems.append("merge-check outputs differ")
    ok = not problems
    return CheckResult(
        "thread_determinism",
        ok,
        "identical bytes for --threads 1 vs 8 (flag and environment)",
        "both subcommands byte-identical" if ok else "; ".join(problems),
    )


DEFAULT_CONFIG = {
    "ratio_lo": 0.98,
    "ratio_hi": 1.02,
    "band_lo": 0.999,
    "band_hi": 2.1,
    "endpoint_tol": 0.02,
    "conv_tol": 0.01,
    "weight_count": 50,
    "weight_seed": 23,
    "weight_tol": 1e-12,
    "moment_tol": 1e-6,
    "cf_tol": 1e-10,
    "merge_reps": 200_000,
    "merge_seed": 11,
    "ks_tol": 0.05,
    "y_reps": 10_000_000,
    "y_truncation": 10_000,
    "y_seed": 13,
    "y_ratio_lo": 0.9,
    "y_ratio_hi": 1.1,
    "y_band_lo": 0.9,
    "y_band_hi": 2.2,
    "centering_count": 200,
    "xi_count": 100,
    "centering_seed": 29,
    "centering_tol": 1e-12,
    "xi_tol": 1e-10,
    "chernoff_reps": 1_000_000,
    "chernoff_seed": 17,
    "gen_ratio_lo": 0.85,
    "gen_ratio_hi": 1.15,
    "gen_far_tol": 0.015,
    "fig1_reps": 1_000_000,
    "fig_seed": 19,
    "lobe_ratio_max": 0.25,
    "det_reps": 30_000,
    "det_seed": 7,
}

# name, function, config keys passed through as keyword arguments
ALL_CHECKS = (
    ("two_sum_closed_form", check_two_sum_closed_form, ()),
    ("trimmed_exact_vs_enumeration", check_trimmed_exact_vs_enumeration, ()),
    ("trimmed_tail_asymptote", check_trimmed_tail_asymptote, ("ratio_lo", "ratio_hi")),
    ("oscillation_band", check_oscillation_band, ("band_lo", "band_hi", "endpoint_tol")),
    ("two_sum_convolution_ratio", check_two_sum_convolution_ratio, ("conv_tol",)),
    ("weight_normalization", check_weight_normalization,
     ("weight_count", "weight_seed", "weight_tol")),
    ("cf_moments_and_backends", check_cf_moments_and_backends, ("moment_tol", "cf_tol")),
    ("merging_ks", check_merging_ks, ("merge_reps", "merge_seed", "ks_tol")),
    ("y_tail_bracket", check_y_tail_bracket,
     ("y_reps", "y_truncation", "y_seed", "y_ratio_lo", "y_ratio_hi", "y_band_lo", "y_band_hi")),
    ("centering_identities", check_centering_identities,
     ("centering_count", "xi_count", "centering_seed", "centering_tol", "xi_tol")),
    ("chernoff_bounds", check_chernoff_bounds, ("chernoff_reps", "chernoff_seed")),
    ("generalized_game", check_generalized_game,
     ("gen_ratio_lo", "gen_ratio_hi", "gen_far_tol")),
    ("figure_shapes", check_figure_shapes, ("fig1_reps", "fig_seed", "lobe_ratio_max")),
    ("thread_determinism", check_thread_determinism, ("det_reps", "det_seed")),
)


def run_by_name(name: str, config: dict) -> CheckResult:
    for cname, fn, keys in ALL_CHECKS:
        if cname == name:
            return fn(**{k: config[k] for k in keys})
    raise KeyError(name)
