import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symorbit import (
    BetaSpec,
    InfeasibleError,
    Potential,
    build_full_shift,
    complexity_function,
    complexity_upper_bound,
    construct_dense_point,
    construct_subsystem_step1,
    enumerate_language,
    generate_prefix,
    plan_intermediate_entropy,
)
from symorbit.forge import _unrank, subsystem_word
from symorbit.metric import cylinder_diameter

LOG2 = math.log(2)


@pytest.mark.parametrize("name", ["full2", "golden_sft", "golden_beta"])
def test_dense_point_sees_every_word(name, request):
    shift = request.getfixturevalue(name)
    w = construct_dense_point(shift, 4000)
    assert shift.admissible(w)
    for n in range(1, 7):
        assert complexity_function(w, n, shift.m) == enumerate_language(shift, n).count


@settings(max_examples=50)
@given(st.integers(1, 7), st.data())
def test_unrank_is_a_bijection(n, data):
    rank = data.draw(st.integers(0, math.factorial(n) - 1))
    perm = _unrank(rank, n)
    assert sorted(perm) == list(range(n))
    if n <= 5:
        assert len({tuple(_unrank(r, n)) for r in range(math.factorial(n))}) == math.factorial(n)


def test_plan_examples(full2):
    plan = plan_intermediate_entropy(full2, LOG2 / 2, 10)
    assert plan.n1 == 237 and plan.l2 == 2370
    zero = plan_intermediate_entropy(full2, 0.0, 10)
    assert 2 <= math.log(zero.n1) < 3 and zero.n1 == 8


@pytest.mark.parametrize("frac", [0.0, 0.25, 0.5, 0.75])
def test_plan_invariants(full2, frac):
    h = frac * LOG2
    plan = plan_intermediate_entropy(full2, h)
    first, second = plan.level(1), plan.level(2)
    assert first.n * (math.log(first.n) - 1) > second.l * h + 2
    assert second.log_n <= mpmath.loggamma(first.n + 1)
    lo, hi = plan.bracket()
    assert lo <= h <= hi


def test_prefix_is_deterministic(full2):
    plan = plan_intermediate_entropy(full2, 0.25 * LOG2, seed=7)
    a = generate_prefix(plan, full2, 3000)
    b = generate_prefix(plan_intermediate_entropy(full2, 0.25 * LOG2, seed=7), full2, 3000)
    assert a == b
    c = generate_prefix(plan_intermediate_entropy(full2, 0.25 * LOG2, seed=8), full2, 3000)
    assert a != c


@pytest.mark.parametrize("seed", [0, 3])
def test_prefix_brick_complexity(golden_sft, seed):
    plan = plan_intermediate_entropy(golden_sft, 0.2, seed=seed)
    w = generate_prefix(plan, golden_sft, plan.l2)
    assert golden_sft.admissible(w)
    assert complexity_function(w, plan.l1, 2) >= plan.n1


def test_top_entropy_is_refused(full2):
    with pytest.raises(InfeasibleError, match="construct_dense_point"):
        plan_intermediate_entropy(full2, LOG2)


def test_upper_bound_needs_schedule(full2):
    plan = plan_intermediate_entropy(full2, 0.5 * LOG2, 10)
    assert complexity_upper_bound(plan, 1) == pytest.approx(0.5501, abs=1e-4)
    with pytest.raises(InfeasibleError):
        complexity_upper_bound(plan, 10)


@pytest.mark.parametrize("alpha,count", [(0.25, 7), (0.5, 39), (0.75, 216)])
def test_subsystem_counts(full2, alpha, count):
    plan = construct_subsystem_step1(full2, Potential.constant(2, multiplier=2), alpha, 0.05, 10 * LOG2)
    assert plan.count == count
    assert plan.C == 0 and plan.C_prime == 0
    assert plan.lower == pytest.approx(plan.upper)
    assert alpha + 0.025 < plan.rate < alpha + 0.05


def test_subsystem_window_example(full2):
    plan = construct_subsystem_step1(full2, Potential.constant(2, multiplier=2), 0.5, 0.1, 10 * LOG2)
    assert 46 <= plan.count <= 63


def test_subsystem_empty_window(full2):
    # alpha = 0 at this scale: the only candidate count sits on the open right end
    with pytest.raises(InfeasibleError):
        construct_subsystem_step1(full2, Potential.constant(2, multiplier=2), 0.0, 0.1, 10 * LOG2)


def test_subsystem_alpha_too_large(full2):
    with pytest.raises(InfeasibleError):
        construct_subsystem_step1(full2, Potential.constant(2, multiplier=2), 1.2, 0.05, 10 * LOG2)


@pytest.mark.parametrize("name,phi_kind", [("golden_sft", "log2"), ("golden_beta", "logbeta"), ("full2", "mixed")])
def test_subsystem_sandwich(name, phi_kind, request, rng):
    shift = request.getfixturevalue(name)
    phi = {
        "log2": Potential.constant(2, multiplier=2),
        "logbeta": Potential.constant(2, multiplier=BetaSpec.golden().value),
        "mixed": Potential.from_multipliers(2, {(0,): 2, (1,): 3}),
    }[phi_kind]
    plan = construct_subsystem_step1(shift, phi, 0.2, 0.05, 12.0)
    for _ in range(100):
        n = int(rng.integers(1, 6))
        idx = [int(i) for i in rng.integers(0, plan.count, size=n)]
        u = subsystem_word(shift, plan, idx)
        assert shift.admissible(u + u)
        d = cylinder_diameter(phi, u, shift)
        assert math.exp(-n * (plan.n1 + plan.C)) <= d * (1 + 1e-9)
        assert d <= math.exp(-n * (plan.n1 - plan.C_prime)) * (1 + 1e-9)
    assert plan.lower <= plan.upper


def test_deep_levels_do_not_overflow_float():
    # level 3 has a length far beyond float range once n_2 is large
    full2 = build_full_shift(2)
    plan = plan_intermediate_entropy(full2, 0.5 * math.log(2), 10, seed=7)
    assert plan.level(3).l > 10**300
    w = generate_prefix(plan, full2, 5000)
    assert len(w) == 5000
