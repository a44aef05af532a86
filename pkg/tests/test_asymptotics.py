"""First-order tail asymptotes against the exact engine."""

import math

import pytest

from oracle_reference import general_trimmed_tail
from petersburg.asymptotics import (
    TailAsymptote,
    finer_as_rhs,
    gen_snr_tail_rhs,
    ratio_table,
    snr_tail_rhs,
    subexp_limits,
    uniform_bound_rhs,
)
from petersburg.exact import trimmed_tail_exact
from petersburg.stpdist import GameParams

GEN = GameParams(1.0, 1.0 / 3.0)

# exact/asymptote at x = 3*2^m, converging to 1 from below as m grows
RATIO_FIXTURES = {
    (4, 1, 8): 0.980125177366999,
    (4, 1, 11): 0.9974114699330089,
    (4, 1, 14): 0.9996747248413479,
    (8, 2, 8): 0.9102005963631217,
    (8, 2, 11): 0.9858764939099323,
    (8, 2, 14): 0.9981773884391294,
}


def test_exact_over_asymptote_converges():
    for (n, r, m), want in RATIO_FIXTURES.items():
        x = 3 * 2**m
        got = float(trimmed_tail_exact(n, r, x)) / snr_tail_rhs(n, r, x).value
        assert got == pytest.approx(want, rel=1e-12), (n, r, m)
    # monotone approach to 1 along each fixture family
    for n, r in ((4, 1), (8, 2)):
        seq = [RATIO_FIXTURES[(n, r, m)] for m in (8, 11, 14)]
        assert seq == sorted(seq)
        assert seq[-1] > 0.995


def test_asymptote_structure():
    a = snr_tail_rhs(4, 1, 3 * 2**10)
    assert isinstance(a, TailAsymptote)
    assert a.value == a.leading * a.correction
    assert a.inner_backend == "exact"
    assert a.inner_ci == 0.0
    assert a.correction > 1.0


def test_leading_term_formula():
    n, r, x = 5, 1, 3 * 2**9
    a = snr_tail_rhs(n, r, x)
    psi_x = x / 2.0 ** math.floor(math.log2(x))
    want = math.comb(n, r + 1) * (psi_x / x) ** (r + 1)
    assert a.leading == pytest.approx(want, rel=1e-12)
    assert a.correction == pytest.approx(1.0 + (2 ** (r + 1) - 1) * a.inner_prob, rel=1e-12)


def test_montecarlo_inner_fallback():
    # a tiny cap guard forces the inner probability onto the sampled route
    exact = snr_tail_rhs(4, 1, 3 * 2**8)
    mc = snr_tail_rhs(4, 1, 3 * 2**8, cap_guard=64, mc_reps=100_000, mc_seed=2)
    assert mc.inner_backend == "montecarlo"
    assert mc.inner_ci > 0.0
    assert abs(mc.inner_prob - exact.inner_prob) <= mc.inner_ci


def test_finer_as_fixture():
    assert finer_as_rhs(2, 0, 12, 6.0) == 0.0006103515625
    got = float(trimmed_tail_exact(2, 0, 2**12 + 6)) / finer_as_rhs(2, 0, 12, 6.0)
    assert got == pytest.approx(0.999609375, rel=1e-12)
    assert abs(got - 1.0) < 0.01


def test_finer_as_single_payoff():
    # with nothing left after trimming, the bracket collapses to 1
    for m in (4, 9, 13):
        assert finer_as_rhs(1, 0, m, 1.5) == 2.0**-m
        assert finer_as_rhs(1, 0, m, 100.0) == 2.0**-m


def test_finer_as_validation():
    with pytest.raises(ValueError):
        finer_as_rhs(2, 0, 12, 1.0)
    with pytest.raises(ValueError):
        finer_as_rhs(2, 0, 0, 2.5)
    with pytest.raises(ValueError):
        finer_as_rhs(2, 2, 12, 2.5)


def test_subexp_limits_classical_and_snapped():
    assert subexp_limits() == (2.0, 4.0)
    assert subexp_limits(GEN) == (2.0, 3.0)
    # non-integer limsup stays as computed
    lo, hi = subexp_limits(GameParams(1.0, 0.25))
    assert lo == 2.0
    assert hi == pytest.approx(8.0 / 3.0, rel=1e-15)


def test_gen_tail_delegates_classically():
    x = 3 * 2**9
    assert gen_snr_tail_rhs(4, 1, x) == snr_tail_rhs(4, 1, x).value


def test_gen_tail_tracks_reference_enumeration():
    # independent exact enumeration of the float-parameter generalized law
    for x, lo, hi in ((10.0, 0.85, 1.0), (10.0 * 1.5**8, 0.98, 1.0)):
        exact = float(general_trimmed_tail(3, 0, x, GEN.p))
        ratio = exact / gen_snr_tail_rhs(3, 0, x, params=GEN)
        assert lo <= ratio <= hi, (x, ratio)


def test_uniform_bound_terms():
    n, r, x, delta = 256, 1, 10.0, 0.3
    only_first = uniform_bound_rhs(n, r, x, delta, 0.0)
    want = 2.0 ** (r + 1) / math.factorial(r + 1) / ((1 - delta) * x) ** (r + 1)
    assert only_first == pytest.approx(want, rel=1e-12)
    with_c = uniform_bound_rhs(n, r, x, delta, 2.0)
    assert with_c == pytest.approx(only_first + 2.0 * delta ** -(r + 1.5) * x ** -(r + 1.5), rel=1e-12)
    # decreasing in x
    assert uniform_bound_rhs(n, r, 20.0, delta, 2.0) < with_c


def test_uniform_bound_validation():
    with pytest.raises(ValueError):
        uniform_bound_rhs(4, 1, 2.0, 0.3, 1.0)  # x below e
    with pytest.raises(ValueError):
        uniform_bound_rhs(4, 1, 10.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        uniform_bound_rhs(4, 1, 10.0, 1.0, 1.0)


def test_ratio_table_rows():
    rows = ratio_table(4, 1, [3 * 2**10, 3 * 2**11])
    assert len(rows) == 2
    x, frac, exact, asym, ratio, backend = rows[0]
    assert x == 3072.0
    assert frac == pytest.approx(math.log2(3.0) - 1.0, abs=1e-12)
    assert ratio == pytest.approx(exact / asym, rel=1e-15)
    assert backend == "exact"
    assert exact == float(trimmed_tail_exact(4, 1, 3072))
