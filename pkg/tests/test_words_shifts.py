import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symorbit import (
    CapExceededError,
    EmptyLanguageError,
    GapSet,
    SftSpec,
    SpecificationError,
    build_full_shift,
    build_s_gap,
    build_sft,
    complexity_function,
    decompose_word,
    enumerate_language,
    gluing_word,
    language_counts,
)
from symorbit.shifts import in_filtration
from symorbit.words import as_word, is_prefix, lex_compare, word_str

from conftest import brute_language, random_admissible

digit_words = st.lists(st.integers(0, 2), max_size=8).map(tuple)


@given(digit_words, digit_words)
def test_lex_compare_matches_tuple_order(u, v):
    expected = (u > v) - (u < v)
    assert lex_compare(u, v) == expected
    assert lex_compare(v, u) == -expected


@given(digit_words, digit_words)
def test_prefix_compares_below_extension(u, v):
    if v:
        assert lex_compare(u, u + v) == -1
        assert is_prefix(u, u + v)


def test_word_round_trip():
    assert word_str(as_word("01101")) == "01101"


def test_full_shift_counts():
    assert language_counts(build_full_shift(3), 6) == [3**n for n in range(7)]


def test_golden_sft_counts_are_fibonacci(golden_sft):
    counts = language_counts(golden_sft, 25)
    fib = [1, 2]
    while len(fib) < 26:
        fib.append(fib[-1] + fib[-2])
    assert counts == fib


@pytest.mark.parametrize("forbid", [((1, 1),), ((0, 0, 0),), ((1, 0, 1), (1, 1))])
def test_automaton_counts_match_enumeration(forbid):
    shift = build_sft(SftSpec(2, forbidden=forbid))
    counts = language_counts(shift, 10)
    assert counts == [len(brute_language(shift, n)) for n in range(11)]


@pytest.mark.parametrize("name", ["full2", "golden_sft", "golden_beta"])
def test_factor_closure(name, request):
    shift = request.getfixturevalue(name)
    for w in enumerate_language(shift, 9).words:
        for i in range(len(w)):
            for j in range(i + 1, len(w) + 1):
                assert shift.admissible(w[i:j])


@pytest.mark.parametrize("name", ["full2", "golden_sft", "golden_beta"])
def test_counts_are_submultiplicative(name, request):
    c = language_counts(request.getfixturevalue(name), 16)
    for a in range(1, 9):
        for b in range(1, 9):
            assert c[a + b] <= c[a] * c[b]


def test_enumeration_is_sorted(golden_beta):
    words = enumerate_language(golden_beta, 8).words
    assert words == sorted(words)


def test_cap_is_enforced(full2):
    with pytest.raises(CapExceededError):
        enumerate_language(build_full_shift(2), 12, cap=100)


def test_cap_env_override(monkeypatch):
    monkeypatch.setenv("SYMORBIT_WORD_CAP", "50")
    with pytest.raises(CapExceededError):
        enumerate_language(build_full_shift(2), 8)


def test_empty_sft_is_rejected():
    with pytest.raises(EmptyLanguageError):
        build_sft(SftSpec(2, forbidden=((0,), (1,))))


def test_gapset_parse():
    S = GapSet.parse("0,2,4+")
    assert S.minimum == 0
    assert GapSet.parse("3").minimum == 3


@pytest.mark.parametrize("name", ["full2", "golden_sft", "golden_beta"])
def test_decomposition_reconcatenates(name, request):
    shift = request.getfixturevalue(name)
    for n in range(0, 9):
        for w in enumerate_language(shift, n).words:
            p, g, s = decompose_word(shift, w)
            assert p + g + s == w
            assert shift.in_G(g)
            assert not p or shift.in_Cp(p)
            assert not s or shift.in_Cs(s)


@pytest.mark.parametrize("gaps", ["0,2+", "2", "1,3", "2,5+"])
def test_s_gap_gluing(gaps, rng):
    shift = build_s_gap(GapSet.parse(gaps))
    core = [w for n in range(1, 8) for w in enumerate_language(shift, n).words if shift.in_G(w)]
    for _ in range(60):
        u = core[rng.integers(len(core))]
        v = core[rng.integers(len(core))]
        j = gluing_word(shift, u, v)
        assert len(j) == shift.tau
        assert shift.admissible(u + j + v)


@pytest.mark.parametrize("name", ["golden_sft", "golden_beta"])
def test_gluing_is_least(name, request, rng):
    shift = request.getfixturevalue(name)
    core = [w for w in enumerate_language(shift, 5).words if shift.in_G(w)]
    for _ in range(30):
        u = core[rng.integers(len(core))]
        v = core[rng.integers(len(core))]
        j = gluing_word(shift, u, v)
        assert shift.admissible(u + j + v)
        for k in enumerate_language(shift, shift.tau).words:
            if k < j:
                assert not shift.admissible(u + k + v)


def test_gluing_rejects_noncore(golden_beta):
    with pytest.raises(SpecificationError):
        gluing_word(golden_beta, (1,), (0,))


def test_sft_tau_is_mixing_gap(golden_sft):
    assert golden_sft.tau == 1
    assert gluing_word(golden_sft, (1,), (1,)) == (0,)


def test_filtration(golden_beta):
    # 1010 is full; 101 and 01 end in a suffix of d* = (10)^inf
    assert in_filtration(golden_beta, (1, 0, 1, 0), 0)
    assert not in_filtration(golden_beta, (1, 0, 1), 0)
    assert in_filtration(golden_beta, (1, 0, 1), 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=40), st.integers(1, 6))
def test_complexity_function_matches_set_count(seq, n):
    if n > len(seq):
        return
    expected = len({tuple(seq[i:i + n]) for i in range(len(seq) - n + 1)})
    assert complexity_function(seq, n, m=3) == expected


def test_complexity_is_monotone_in_prefix(rng):
    seq = rng.integers(0, 2, size=200)
    for n in (3, 6, 9):
        vals = [complexity_function(seq[:L], n, 2) for L in range(n, 200, 17)]
        assert vals == sorted(vals)
