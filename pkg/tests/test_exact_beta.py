import math
import warnings
from fractions import Fraction
from itertools import product

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symorbit import (
    BetaSpec,
    PrecisionError,
    QuadNumber,
    RationalInterval,
    build_beta_shift,
    decompose_word,
    enumerate_language,
    expansion_of_one,
    full_word_verdict,
    is_admissible_beta,
    is_full_word,
    language_counts,
)
from symorbit.beta import DepthLimitedWarning, beta_digits_of_real, is_dstar_prefix
from symorbit.exact import parse_decimal_interval

mpmath.mp.dps = 60
small = st.fractions(min_value=-20, max_value=20, max_denominator=30)


def mp_value(q: QuadNumber):
    return mpmath.mpf(q.a.numerator) / q.a.denominator + mpmath.mpf(q.b.numerator) / q.b.denominator * mpmath.sqrt(q.d)


def mp_of(x):
    if isinstance(x, QuadNumber):
        return mp_value(x)
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


@settings(max_examples=200)
@given(small, small, small, small, st.sampled_from([2, 3, 5, 7]))
def test_quad_arithmetic_against_mpmath(a, b, c, e, d):
    x = QuadNumber(a, b, d) if b else a
    y = QuadNumber(c, e, d) if e else c
    for got, want in ((x + y, mp_of(x) + mp_of(y)), (x - y, mp_of(x) - mp_of(y)), (x * y, mp_of(x) * mp_of(y))):
        assert abs(mp_of(got) - want) < mpmath.mpf(10) ** -40


@settings(max_examples=200)
@given(small, small.filter(lambda v: v != 0), st.sampled_from([2, 3, 5, 6]))
def test_quad_floor_and_sign(a, b, d):
    x = QuadNumber(a, b, d)
    v = mp_value(x)
    assert math.floor(x) == int(mpmath.floor(v))
    assert x.sign() == (1 if v > 0 else -1)


def test_golden_identity():
    phi = QuadNumber.from_parts(1, 1, 2, 5)
    assert phi * phi - phi - 1 == 0


def test_interval_floor_undecided():
    x = RationalInterval(Fraction(99, 100), Fraction(101, 100))
    with pytest.raises(PrecisionError):
        math.floor(x)
    assert math.floor(RationalInterval(Fraction(11, 10), Fraction(12, 10))) == 1


def test_decimal_interval_contains_value():
    x = parse_decimal_interval("1.5", 10)
    assert x.lo <= Fraction(3, 2) <= x.hi


# --- expansions ------------------------------------------------------------------------------------


def test_golden_expansion_of_one():
    e = expansion_of_one(BetaSpec.golden(), 8)
    assert e.digits == (1, 1) and e.finite
    q = BetaSpec.golden().quasi_greedy_expansion(6)
    assert q.digits == (1, 0, 1, 0, 1, 0) and q.period == 2 and q.preperiod == 0


def test_three_halves_expansion():
    e = expansion_of_one(BetaSpec.rational(Fraction(3, 2)), 6)
    assert "".join(map(str, e.digits)) == "101000"
    assert not e.finite


def test_integer_beta():
    b = BetaSpec.integer(3)
    assert b.quasi_greedy_expansion(4).digits == (2, 2, 2, 2)
    assert language_counts(build_beta_shift(b), 5) == [3**n for n in range(6)]


@pytest.mark.parametrize("text", ["golden", "quadratic:1,1,2,5", "quadratic:1,1,1,2", "rational:3/2", "rational:5/2"])
def test_expansion_sums_to_one(text):
    beta = BetaSpec.parse(text)
    digits = expansion_of_one(beta, 60).digits
    b = mp_of(beta.value)
    total = sum(d * b ** -(i + 1) for i, d in enumerate(digits))
    assert total <= 1 + mpmath.mpf(10) ** -30
    assert 1 - total < b ** -(len(digits) - 1) + mpmath.mpf(10) ** -30


@pytest.mark.parametrize("text", ["golden", "quadratic:1,1,1,2", "rational:3/2"])
def test_parry_self_consistency(text):
    beta = BetaSpec.parse(text)
    d = tuple(int(c) for c in beta.dstar(40))
    for k in range(1, 20):
        assert d[k:k + 20] <= d[:20]


def test_rejects_small_beta():
    with pytest.raises(ValueError):
        BetaSpec.parse("rational:1/2")
    with pytest.raises(ValueError):
        BetaSpec.parse("integer:1")


# --- admissibility and full words ---------------------------------------------------------------------


def _greedy_words(beta_float, n, npts=40000):
    """Length-n greedy digit prefixes of a fine grid of points (floating independent oracle)."""
    x = (np.arange(npts) + 0.5) / npts
    out = np.zeros((npts, n), dtype=np.int64)
    for i in range(n):
        y = x * beta_float
        out[:, i] = np.floor(y)
        x = y - out[:, i]
    return {tuple(r) for r in out}


@pytest.mark.parametrize("text", ["golden", "rational:3/2", "quadratic:1,1,1,2"])
def test_admissibility_matches_greedy_orbits(text):
    beta = BetaSpec.parse(text)
    shift = build_beta_shift(beta)
    for n in range(1, 8):
        assert set(enumerate_language(shift, n).words) == _greedy_words(float(beta), n)


def test_golden_admissibility_examples():
    g = BetaSpec.golden()
    assert is_admissible_beta(g, (0, 1, 0))
    assert not is_admissible_beta(g, (0, 1, 1))
    assert is_admissible_beta(g, ())


def test_admissible_iff_extendable(golden_beta):
    g = BetaSpec.golden()
    for n in range(1, 9):
        for w in product((0, 1), repeat=n):
            extendable = any(golden_beta.admissible(w + v) for v in product((0, 1), repeat=6))
            assert is_admissible_beta(g, w) == extendable


def test_full_word_examples():
    g = BetaSpec.golden()
    assert [is_full_word(g, w) for w in ((0,), (1,), (1, 0), ())] == [True, False, True, True]


def test_full_word_depth_limited_warning():
    beta = BetaSpec.rational(Fraction(3, 2))
    with pytest.warns(DepthLimitedWarning):
        is_full_word(beta, (1,))
    full, certain = full_word_verdict(beta, (0,))
    assert not certain


@pytest.mark.parametrize("text", ["golden", "quadratic:1,1,1,2"])
def test_entropy_sandwich(text):
    beta = BetaSpec.parse(text)
    b = float(beta)
    counts = language_counts(build_beta_shift(beta), 18)
    for n in range(1, 19):
        assert b**n <= counts[n] * (1 + 1e-12)
        assert counts[n] <= b ** (n + 1) / (b - 1) * (1 + 1e-12)


def test_nonfull_words_split_into_full_and_dstar_prefix(golden_beta):
    g = BetaSpec.golden()
    for n in range(1, 10):
        for w in enumerate_language(golden_beta, n).words:
            p, core, s = decompose_word(golden_beta, w)
            assert p == ()
            assert is_full_word(g, core)
            assert is_dstar_prefix(g, s)


def test_digits_of_real():
    assert beta_digits_of_real(0, BetaSpec.golden(), 5) == (0, 0, 0, 0, 0)
    assert beta_digits_of_real(Fraction(1, 2), BetaSpec.integer(2), 4) == (1, 0, 0, 0)
    assert beta_digits_of_real(Fraction(1, 2), BetaSpec.golden(), 5) == (0, 1, 0, 0, 1)


def test_projection_covering_bound(rng):
    b = float(BetaSpec.golden())
    for ell in range(1, 9):
        for _ in range(100):
            length = 2 * b**-ell
            start = rng.uniform(0, max(0.0, 1 - length))
            x = np.linspace(start, min(start + length, 1 - 1e-12), 4000)
            words = np.zeros((x.size, ell), dtype=np.int64)
            for i in range(ell):
                y = x * b
                words[:, i] = np.floor(y)
                x = y - words[:, i]
            assert len({tuple(r) for r in words}) <= 4 * (ell + 1)
