import math
from itertools import product

import mpmath
import numpy as np
import pytest

from symorbit import (
    BetaSpec,
    InfeasibleError,
    MarkovMeasureSpec,
    Potential,
    SftSpec,
    build_full_shift,
    build_sft,
    entropy_estimate,
    log_z_n,
    measure_dimension,
    pressure_gap_check,
    solve_dimension_gamma,
)
from symorbit.metric import birkhoff_sum
from symorbit.thermo import growth_rate, uniform_counting_check

from conftest import GOLDEN_RATIO, brute_language

LOG_GOLDEN = math.log(GOLDEN_RATIO)


def spectral_entropy(forbid):
    """log of the spectral radius of the 2-block transition matrix (independent oracle)."""
    words = [w for w in product((0, 1), repeat=2) if w not in forbid]
    A = np.zeros((2, 2))
    for a, b in words:
        A[a, b] = 1
    return math.log(max(abs(np.linalg.eigvals(A))))


def brute_log_z(shift, phi, weight, n):
    total = 0.0
    for w in brute_language(shift, n):
        S, S_star = birkhoff_sum(phi, w, shift)
        total += math.exp(weight * (S if weight >= 0 else S_star))
    return math.log(total)


def test_entropy_bracket_golden_sft(golden_sft):
    est = entropy_estimate(golden_sft, 20)
    assert est.contains(spectral_entropy({(1, 1)}))
    assert est.width < 0.05


def test_entropy_full_shift_exact():
    est = entropy_estimate(build_full_shift(3), 8)
    assert est.lower == pytest.approx(math.log(3)) and est.upper == pytest.approx(math.log(3))


def test_entropy_lower_with_c0(golden_sft):
    est = entropy_estimate(golden_sft, 20, c0=GOLDEN_RATIO**2)
    assert est.lower <= LOG_GOLDEN <= est.upper


@pytest.mark.parametrize("n", [3, 7, 12])
def test_walk_kernel_matches_enumeration(golden_sft, n):
    phi = Potential.from_multipliers(2, {(0,): 2, (1,): 3})
    for weight in (-1.0, -0.5, 0.7):
        assert log_z_n(golden_sft, None, phi, weight, n) == pytest.approx(brute_log_z(golden_sft, phi, weight, n))


def test_depth_two_z_matches_enumeration(golden_sft):
    phi = Potential.from_values(2, {(0, 0): 0.5, (0, 1): 1.0, (1, 0): 1.5, (1, 1): 2.0})
    for weight in (-1.0, 0.5):
        assert log_z_n(golden_sft, None, phi, weight, 6) == pytest.approx(brute_log_z(golden_sft, phi, weight, 6))


def test_log_z_subadditive(golden_sft):
    phi = Potential.from_multipliers(2, {(0,): 2, (1,): 3})
    z = {n: log_z_n(golden_sft, None, phi, -0.8, n) for n in range(1, 17)}
    for a in range(1, 9):
        for b in range(1, 9):
            assert z[a + b] <= z[a] + z[b] + 1e-9


@pytest.mark.parametrize("m", [2, 3, 5])
def test_dimension_full_shift(m):
    root = solve_dimension_gamma(build_full_shift(m), Potential.constant(m, multiplier=m), 20, 1e-6)
    assert root.gamma == pytest.approx(1.0, abs=1e-6)


def test_dimension_golden_sft(golden_sft):
    root = solve_dimension_gamma(golden_sft, Potential.constant(2, multiplier=2), 20)
    oracle = spectral_entropy({(1, 1)}) / math.log(2)
    assert abs(root.gamma - oracle) < 0.01
    assert root.lower <= oracle <= root.upper


def test_dimension_nonconstant_potential(full2):
    # Moran oracle: 2^-g + 3^-g = 1
    oracle = float(mpmath.findroot(lambda g: 2**-g + 3**-g - 1, 0.8))
    root = solve_dimension_gamma(full2, Potential.from_multipliers(2, {(0,): 2, (1,): 3}), 16)
    assert root.gamma == pytest.approx(oracle, abs=1e-3)
    assert root.lower - 1e-9 <= oracle <= root.upper + 1e-9


def test_dimension_starved_run(golden_sft):
    with pytest.raises(InfeasibleError):
        solve_dimension_gamma(golden_sft, Potential.constant(2, multiplier=2), 2)


def test_measure_dimensions(golden_sft):
    phi = Potential.constant(2, multiplier=2)
    assert measure_dimension(MarkovMeasureSpec.bernoulli([0.5, 0.5]), phi) == pytest.approx(1.0, abs=1e-12)
    h = -(0.25 * math.log(0.25) + 0.75 * math.log(0.75))
    assert measure_dimension(MarkovMeasureSpec.bernoulli([0.25, 0.75]), phi) == pytest.approx(h / math.log(2), abs=1e-12)
    parry = MarkovMeasureSpec.parry([[1, 1], [1, 0]])
    assert measure_dimension(parry, phi, golden_sft) == pytest.approx(LOG_GOLDEN / math.log(2), abs=1e-10)


def test_measure_support_is_checked(golden_sft):
    with pytest.raises(ValueError):
        measure_dimension(MarkovMeasureSpec.bernoulli([0.5, 0.5]), Potential.constant(2, multiplier=2), golden_sft)


def test_ledrappier_young_sandwich(golden_sft):
    # measure dimension never exceeds the dimension root
    phi = Potential.from_multipliers(2, {(0,): 2, (1,): 3})
    root = solve_dimension_gamma(golden_sft, phi, 16)
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = rng.uniform(0.05, 0.95)
        mu = MarkovMeasureSpec.from_matrix([[p, 1 - p], [1.0, 0.0]])
        assert measure_dimension(mu, phi, golden_sft) <= root.upper + 1e-9


def test_pressure_gap_golden_beta(golden_beta):
    b = float(BetaSpec.golden())
    rep = pressure_gap_check(golden_beta, Potential.constant(2, multiplier=BetaSpec.golden().value), 1.0, 30)
    assert rep.verdict == "converging"
    assert rep.ratios[-1] == pytest.approx(1 / b, abs=1e-3)
    assert rep.total == pytest.approx(1 / (b - 1), abs=1e-3)


def test_pressure_gap_full_shift_is_empty(full2):
    assert pressure_gap_check(full2, Potential.constant(2, multiplier=2), 1.0, 10).verdict == "empty"


@pytest.mark.parametrize("m", [2, 3])
def test_uniform_counting_full_shift(m):
    uc = uniform_counting_check(build_full_shift(m), Potential.constant(m, multiplier=m), 1.0, 15)
    assert uc.low == pytest.approx(1.0) and uc.high == pytest.approx(1.0)


def test_growth_rate_of_full_words(golden_beta):
    est = growth_rate(golden_beta, "G", 16)
    assert est.rate == pytest.approx(LOG_GOLDEN, abs=1e-3)
