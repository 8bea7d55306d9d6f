import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symorbit import (
    BetaSpec,
    IndistinguishableError,
    Potential,
    birkhoff_sum,
    build_cover,
    d_phi,
    d_phi_rho,
    enumerate_language,
    is_full_word,
    recode,
    stratify,
    variation,
)
from symorbit.metric import cylinder_diameter, cylinder_diameter_exact, variation_sum

from conftest import random_admissible

LOG2 = math.log(2)


def test_constant_birkhoff():
    S, S_star = birkhoff_sum(Potential.constant(2, multiplier=2), (0, 1, 1))
    assert S == pytest.approx(3 * LOG2) and S_star == pytest.approx(3 * LOG2)


def test_depth_one_birkhoff():
    phi = Potential.from_multipliers(2, {(0,): 2, (1,): 3})
    assert birkhoff_sum(phi, (0, 1))[1] == pytest.approx(math.log(6))
    assert birkhoff_sum(phi, (1,))[1] == pytest.approx(math.log(3))


def test_variation_examples():
    assert variation(Potential.constant(2, multiplier=2), 3) == 0
    phi = Potential.from_values(2, {(0, 0): 1, (0, 1): 2, (1, 0): 3, (1, 1): 5})
    assert variation(phi, 2) == 0
    # exhaustive oracle: max over first symbols of (max - min) within [a]
    oracle = max(max(v for w, v in phi.table.items() if w[0] == a) - min(v for w, v in phi.table.items() if w[0] == a) for a in (0, 1))
    assert variation(phi, 1) == oracle == 2


def test_d_phi_examples():
    assert d_phi(Potential.constant(2, multiplier=2), (0, 1, 1, 0), (0, 1, 0, 0)) == pytest.approx(0.25)
    phi = Potential.from_multipliers(2, {(0,): 2, (1,): 3})
    assert d_phi(phi, (0, 1, 0), (0, 1, 1)) == pytest.approx(1 / 6)
    with pytest.raises(IndistinguishableError):
        d_phi(phi, (0,) * 10, (0,) * 10)


def test_diameter_examples():
    assert cylinder_diameter_exact(Potential.constant(2, multiplier=2), (0, 0, 0, 0)) == Fraction(1, 16)
    phi = Potential.from_multipliers(2, {(0,): 2, (1,): 3})
    assert cylinder_diameter_exact(phi, (0, 1)) == Fraction(1, 6)
    g = BetaSpec.golden()
    d = cylinder_diameter(Potential.constant(2, multiplier=g.value), (1, 0, 1))
    assert d == pytest.approx(float(g) ** -3)


def _random_depth2():
    rng = np.random.default_rng(7)
    return Potential.from_values(2, {w: float(rng.uniform(0.3, 2.0)) for w in product((0, 1), repeat=2)})


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=12).map(tuple))
def test_birkhoff_bracket(w):
    phi = _random_depth2()
    S, S_star = birkhoff_sum(phi, w)
    assert S_star <= S <= S_star + variation_sum(phi, len(w)) + 1e-12


@pytest.mark.parametrize("name", ["full2", "golden_sft", "golden_beta"])
def test_diameter_monotone(name, request):
    shift = request.getfixturevalue(name)
    phi = Potential.constant(2, multiplier=2)
    c_low = float(phi.c_lower)
    for w in enumerate_language(shift, 6).words:
        for a in range(shift.m):
            if shift.admissible(w + (a,)):
                assert cylinder_diameter(phi, w) >= c_low * cylinder_diameter(phi, w + (a,)) * (1 - 1e-12)


def test_cover_examples(full2, golden_sft):
    phi = Potential.constant(2, multiplier=2)
    assert build_cover(full2, phi, Fraction(1, 5)).members == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert build_cover(full2, phi, Fraction(1, 4)).members == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert build_cover(golden_sft, phi, Fraction(1, 5)).members == [(0, 0), (0, 1), (1, 0)]


@pytest.mark.parametrize("name", ["full2", "golden_sft", "golden_beta"])
@pytest.mark.parametrize("rho", [Fraction(3, 10), Fraction(1, 10)])
def test_cover_partition(name, rho, request, rng):
    shift = request.getfixturevalue(name)
    cover = build_cover(shift, Potential.constant(2, multiplier=2), rho)
    cover.check()
    for _ in range(100):
        x = random_admissible(shift, 30, rng)
        hits = [w for w in cover.members if x[: len(w)] == w]
        assert len(hits) == 1


def test_cover_with_depth_two_potential(full2, rng):
    phi = _random_depth2()
    cover = build_cover(full2, phi, 0.05)
    cover.check()
    for _ in range(100):
        x = random_admissible(full2, 30, rng)
        assert sum(x[: len(w)] == w for w in cover.members) == 1


def test_strata_examples(full2, golden_beta):
    phi = Potential.constant(2, multiplier=2)
    strata = stratify(full2, lambda w: True, phi, 3 * LOG2, radius=Fraction(1, 8))
    assert len(strata) == 2
    assert strata[0] == [w for w in product((0, 1), repeat=3)]
    g = BetaSpec.golden()
    psi = Potential.constant(2, multiplier=g.value)
    strata = stratify(golden_beta, lambda w: is_full_word(g, w), psi, 4 * math.log(float(g)), radius=g.value ** -4)
    expected = [w for w in enumerate_language(golden_beta, 4).words if is_full_word(g, w)]
    assert strata[0] == expected and len(expected) == 5
    assert all(not level for level in stratify(full2, lambda w: False, phi, 3 * LOG2))


def test_recode_example(full2):
    phi = Potential.constant(2, multiplier=2)
    cover = build_cover(full2, phi, Fraction(1, 5))
    r = recode(full2, cover, (0, 1, 1, 0, 1, 0))
    assert r.members == ((0, 1), (1, 0), (1, 0))
    s = recode(full2, cover, (0, 1, 0, 0, 1, 0))
    assert d_phi_rho(phi, r, s) == pytest.approx(0.25)
    with pytest.raises(IndistinguishableError):
        d_phi_rho(phi, r, r)


@pytest.mark.parametrize("name", ["full2", "golden_sft", "golden_beta"])
def test_lipschitz_sandwich(name, request, rng):
    shift = request.getfixturevalue(name)
    phi = Potential.constant(2, multiplier=2)
    cover = build_cover(shift, phi, Fraction(1, 10))
    c = cover.c_rho
    slack = math.exp(variation_sum(phi))
    checked = 0
    while checked < 100:
        x = random_admissible(shift, 30, rng)
        k = int(rng.integers(0, 25))
        tail = random_admissible(shift, 30, rng)
        y = x[:k] + tail[: 30 - k]
        if not shift.admissible(y) or y == x:
            continue
        try:
            dr = d_phi_rho(phi, recode(shift, cover, x), recode(shift, cover, y), shift)
        except IndistinguishableError:
            continue
        d = d_phi(phi, x, y, shift)
        assert dr / c <= d * (1 + 1e-12)
        assert d <= c * slack * dr * (1 + 1e-12)
        checked += 1
