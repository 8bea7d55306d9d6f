"""Constructive orbits: dense points, the intermediate-entropy tower and subsystem step one.

Tower layout. ``E_1`` holds ``n_1`` brick words of length ``l_1`` taken from
the core ``G``. An element of ``E_k`` (``k >= 2``) is a permutation of the
``n_{k-1}`` elements of ``E_{k-1}``; its symbols are the bricks it expands to,
glued with connector words of length ``tau``. The point is
``w = u_1 u_2 u_3 ...`` where ``u_1`` is a permutation word over ``E_1`` and
``u_{k+1}`` is an element of ``E_{k+1}``. Only the path needed for the
requested prefix is ever materialised.

Randomness comes from ``numpy.random.PCG64`` seeded with the run seed; seed 0
is reserved for the identity choices (identity permutations, first elements).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import mpmath
import numpy as np

from .errors import CapExceededError, InfeasibleError, SpecificationError
from .metric import Potential, cylinder_diameter, stratify, variation_sum
from .shifts import SubshiftSpec, core_mask, gluing_word
from .thermo import entropy_estimate, family_counts, solve_dimension_gamma
from .words import Word, enumerate_language, word_cap

DEFAULT_MAX_L1 = 40
SCHEDULE_DEPTH = 3
FACTORIAL_LIMIT = 5000  # largest n_k whose permutations are ranked by Lehmer codes
INT_LOG_LIMIT = 50_000  # n_k is kept as an integer while log n_k stays below this


def _require_structure(shift: SubshiftSpec) -> None:
    if not shift.has_structure:
        raise SpecificationError(f"{shift!r} lacks core/gap data; constructions need specification of G")


def _core_words(shift: SubshiftSpec, n: int) -> np.ndarray:
    arr = enumerate_language(shift, n).array
    return arr[core_mask(shift, arr)]


# --- dense point -----------------------------------------------------------------------------


def _glued_stream(shift: SubshiftSpec, blocks: Iterator[Word]) -> Iterator[int]:
    prev = None
    for b in blocks:
        if prev is not None:
            yield from gluing_word(shift, prev, b)
        yield from b
        prev = b


def construct_dense_point(shift: SubshiftSpec, target_length: int) -> Word:
    """Prefix of ``u_1 v_1 u_2 v_2 ...`` running through ``G`` by length, then lexicographically."""
    _require_structure(shift)

    def blocks():
        n = 1
        while True:
            for row in _core_words(shift, n):
                yield tuple(int(c) for c in row)
            n += 1

    out = []
    for c in _glued_stream(shift, blocks()):
        if len(out) >= target_length:
            break
        out.append(c)
    return tuple(out)


# --- intermediate-entropy tower ---------------------------------------------------------------


def _n_from_log_floor(x) -> tuple[Optional[int], mpmath.mpf]:
    """Smallest integer ``n`` with ``log n >= x``, returned with ``log n``."""
    x = mpmath.mpf(x)
    if x > INT_LOG_LIMIT:
        return None, x
    with mpmath.workdps(int(x / 2.3) + 30):
        n = int(mpmath.ceil(mpmath.exp(x)))
        return n, mpmath.log(n)


@dataclass
class Level:
    l: int
    n: Optional[int]  # None when astronomically large
    log_n: mpmath.mpf


@dataclass
class ConstructionPlan:
    h: float
    tau: int
    m: int
    l1: int
    n1: int
    bricks: list
    seed: int = 0
    schedule: list = field(default_factory=list)  # Level objects, schedule[0] is level 1

    def level(self, k: int) -> Level:
        """Level ``k`` (1-based), extending the schedule on demand."""
        while len(self.schedule) < k:
            prev = self.schedule[-1]
            if prev.n is None:
                raise InfeasibleError(f"level {len(self.schedule) + 1} is beyond representable size")
            l_next = prev.l * prev.n + (prev.n - 1) * self.tau
            n_next, log_n = _n_from_log_floor(mpmath.mpf(l_next + self.tau) * self.h + 2)
            self.schedule.append(Level(l_next, n_next, log_n))
        return self.schedule[k - 1]

    @property
    def l2(self) -> int:
        return self.level(2).l

    def lower_bracket(self) -> float:
        """``log n_1/(l_1+tau) - 3/(l_1+tau)``: at most ``h`` by the brick-count window."""
        return (math.log(self.n1) - 3) / (self.l1 + self.tau)

    def bracket(self) -> tuple[float, float]:
        return self.lower_bracket(), complexity_upper_bound(self, 1)


def _feasible_step(prev: Level, nxt: Level, h: float) -> bool:
    """``n_{k+1} <= n_k!`` together with ``n_k (log n_k - 1) > l_{k+1} h + 2``."""
    if prev.n is None:
        return True
    fact = mpmath.loggamma(prev.n + 1)
    stirling = prev.n * (mpmath.log(prev.n) - 1)
    return nxt.log_n <= fact and stirling > nxt.l * h + 2


def plan_intermediate_entropy(
    shift: SubshiftSpec,
    h: float,
    l1_hint: Optional[int] = None,
    seed: int = 0,
    max_l1: int = DEFAULT_MAX_L1,
    n_max_entropy: int = 16,
) -> ConstructionPlan:
    """Smallest feasible ``l_1 >= hint`` with ``n_1 = ceil(exp((l_1+tau)h + 2)) <= #G_{l_1}``."""
    _require_structure(shift)
    if h < 0:
        raise InfeasibleError("target entropy must be non-negative")
    ent = entropy_estimate(shift, n_max_entropy)
    if h > ent.upper + 1e-12:
        raise InfeasibleError(f"target h={h:.6g} exceeds the entropy upper bound {ent.upper:.6g}")
    tau, m = shift.tau, shift.m
    start = max(1, l1_hint or 1)
    reasons = []
    for l1 in range(start, max_l1 + 1):
        lo = (l1 + tau) * h + 2
        if lo > l1 * math.log(m):
            reasons.append(f"l_1={l1}: log n_1 >= {lo:.4f} exceeds log #Lambda^l_1 = {l1 * math.log(m):.4f}")
            continue
        n1, log_n1 = _n_from_log_floor(lo)
        available = family_counts(shift, "G", l1)[-1]
        if n1 > available:
            reasons.append(f"l_1={l1}: n_1={n1} > #G_l_1={available}")
            continue
        first = Level(l1, n1, log_n1)
        plan = ConstructionPlan(h, tau, m, l1, n1, [], seed, [first])
        second = plan.level(2)
        if not _feasible_step(first, second, h):
            reasons.append(f"l_1={l1}: n_1={n1} too small for level 2 (n_1(log n_1 - 1) <= l_2 h + 2)")
            continue
        for k in range(3, SCHEDULE_DEPTH + 1):
            if plan.schedule[-1].n is None or plan.schedule[-1].n > FACTORIAL_LIMIT * 100:
                break
            plan.level(k)
        plan.bricks = [tuple(int(c) for c in row) for row in _core_words(shift, l1)[:n1]]
        return plan
    tail = "; ".join(reasons[-3:])
    raise InfeasibleError(
        f"no feasible l_1 in [{start}, {max_l1}] for h={h:.6g} ({tail}); "
        "for h equal to the top entropy use construct_dense_point"
    )


def _draw_below(rng: np.random.Generator, n: int) -> int:
    words = max(1, (n.bit_length() + 63) // 64 + 1)
    big = 0
    for w in rng.integers(0, 2**63, size=words, dtype=np.int64):
        big = (big << 63) | int(w)
    return big % n


def _unrank(rank: int, n: int) -> list[int]:
    """Permutation of ``range(n)`` with the given Lehmer rank."""
    digits = []
    for base in range(1, n + 1):
        rank, d = divmod(rank, base)
        digits.append(d)
    pool = list(range(n))
    return [pool.pop(d) for d in reversed(digits)]


class TowerCursor:
    """Lazy walk through the brick indices of ``u_1 u_2 ...`` for one plan and seed."""

    def __init__(self, plan: ConstructionPlan):
        self.plan = plan
        self.rng = np.random.Generator(np.random.PCG64(plan.seed)) if plan.seed else None
        self._offsets: dict = {}
        self._perm_cache: dict = {}

    def _offset(self, k: int, modulus: int) -> int:
        if k not in self._offsets:
            self._offsets[k] = 0 if self.rng is None else _draw_below(self.rng, modulus)
        return self._offsets[k]

    def _perm(self, k: int, j: int):
        """Permutation of ``E_{k-1}`` indices forming element ``j`` of ``E_k``."""
        key = (k, j)
        if key not in self._perm_cache:
            size = self.plan.level(k - 1).n
            if size <= FACTORIAL_LIMIT:
                total = math.factorial(size)
                rank = (j + self._offset(k, total)) % total
                perm = _unrank(rank, size)
                self._perm_cache[key] = perm.__getitem__
            else:
                shift = (j + self._offset(k, size)) % size
                self._perm_cache[key] = lambda i, s=shift, n=size: (i + s) % n
        return self._perm_cache[key]

    def element(self, k: int, j: int) -> Iterator[int]:
        if k == 1:
            yield j
            return
        perm = self._perm(k, j)
        for i in range(self.plan.level(k - 1).n):
            yield from self.element(k - 1, perm(i))

    def bricks(self) -> Iterator[int]:
        n1 = self.plan.n1
        first = list(range(n1)) if self.rng is None else [int(i) for i in self.rng.permutation(n1)]
        for i in first:
            yield i
        k = 2
        while True:
            level = self.plan.level(k)
            size = self.plan.level(k - 1).n
            if level.n is not None:
                modulus = level.n
            else:
                # n_k is astronomical; only the index modulo the permutation count matters
                modulus = math.factorial(size) if size <= FACTORIAL_LIMIT else size
            j = 0 if self.rng is None else _draw_below(self.rng, modulus)
            yield from self.element(k, j)
            k += 1


def generate_prefix(plan: ConstructionPlan, shift: SubshiftSpec, length: int, cap: Optional[int] = None) -> Word:
    """First ``length`` symbols of the tower point; bricks glued by least connectors."""
    cap = word_cap() if cap is None else cap
    if length > cap:
        raise CapExceededError(f"prefix length {length} exceeds the generation cap {cap}")
    cursor = TowerCursor(plan)
    glue: dict = {}
    out: list[int] = []
    prev = None
    for idx in cursor.bricks():
        if len(out) >= length:
            break
        if prev is not None:
            key = (prev, idx)
            if key not in glue:
                glue[key] = gluing_word(shift, plan.bricks[prev], plan.bricks[idx])
            out.extend(glue[key])
        out.extend(plan.bricks[idx])
        prev = idx
    return tuple(out[:length])


def complexity_upper_bound(plan: ConstructionPlan, k: int) -> float:
    """``(1/l_{k+1}) log[(l_k + 2 tau) n_k^(n_k+1) m^(tau (sum_{j<k} n_1...n_j + n_k))]``."""
    if k < 1:
        raise ValueError("k must be positive")
    if k + 1 > len(plan.schedule):
        raise InfeasibleError(f"schedule holds {len(plan.schedule)} levels; bound for k={k} needs level {k + 1}")
    lev = plan.schedule[k - 1]
    if lev.n is None:
        raise InfeasibleError(f"n_{k} is too large for the closed-form bound")
    l_next = plan.schedule[k].l
    partial, prod = 0, 1
    for j in range(1, k):
        prod *= plan.schedule[j - 1].n
        partial += prod
    total = (
        mpmath.log(lev.l + 2 * plan.tau)
        + (lev.n + 1) * lev.log_n
        + plan.tau * (partial + lev.n) * mpmath.log(plan.m)
    )
    return float(total / l_next)


# --- subsystem, step one -------------------------------------------------------------------------


@dataclass
class SubsystemPlan:
    alpha: float
    epsilon: float
    n1: float
    stratum: int
    A1: list
    lower: float
    upper: float
    C: float
    C_prime: float
    tau: int
    gamma: float

    @property
    def count(self) -> int:
        return len(self.A1)

    @property
    def rate(self) -> float:
        return math.log(len(self.A1)) / self.n1


def _clean(x: float) -> float:
    return 0.0 if abs(x) < 1e-9 else x


def construct_subsystem_step1(
    shift: SubshiftSpec,
    phi: Potential,
    alpha: float,
    epsilon: float,
    n1: float,
    radius=None,
    gamma: Optional[float] = None,
) -> SubsystemPlan:
    """Collection ``A_1`` of core words at diameter scale ``e^{-n_1}`` with ``log #A_1 / n_1`` in ``(alpha + eps/2, alpha + eps)``.

    The dimension of ``(A_1 Lambda^tau)^N`` is bracketed by
    ``log #A_1 / (n_1 + C)`` and ``(log #A_1 + tau log m) / (n_1 - C')``.
    """
    _require_structure(shift)
    if gamma is None:
        gamma = solve_dimension_gamma(shift, phi).gamma
    if not 0 <= alpha < gamma:
        raise InfeasibleError(f"alpha={alpha} must lie in [0, gamma={gamma:.6g})")
    if not 0 < epsilon < (gamma - alpha) / 2:
        raise InfeasibleError(f"epsilon={epsilon} must lie in (0, {(gamma - alpha) / 2:.6g})")
    strata = stratify(shift, "G", phi, n1, radius=radius)
    l = max(range(len(strata)), key=lambda i: (len(strata[i]), -i))
    pool = strata[l]
    need = math.floor(math.exp(n1 * (alpha + epsilon / 2))) + 1
    # the window is open: a count landing on its right end (up to rounding) is rejected
    if not math.log(need) < n1 * (alpha + epsilon) - 1e-12 or need > len(pool):
        raise InfeasibleError(
            f"count window (exp({n1 * (alpha + epsilon / 2):.4f}), exp({n1 * (alpha + epsilon):.4f})) "
            f"holds no admissible size at n_1={n1:.4f} (largest stratum has {len(pool)} words); retry with a larger n_1"
        )
    A1 = pool[:need]
    diams = [cylinder_diameter(phi, w, shift) for w in A1]
    tau, b = shift.tau, variation_sum(phi)
    C = _clean(max(0.0, tau * phi.max_value + b - math.log(min(diams)) - n1))
    C_prime = _clean(max(0.0, n1 + math.log(max(diams)) - tau * phi.min_value))
    if C_prime >= n1:
        raise InfeasibleError("n_1 too small relative to the gap correction C'")
    log_n = math.log(need)
    lower = log_n / (n1 + C)
    upper = (log_n + tau * math.log(shift.m)) / (n1 - C_prime)
    return SubsystemPlan(alpha, epsilon, n1, l, A1, lower, upper, C, C_prime, tau, gamma)


def subsystem_word(shift: SubshiftSpec, plan: SubsystemPlan, indices) -> Word:
    """``a_{i_1} j_1 a_{i_2} j_2 ... a_{i_n} j_n`` with least connectors; the last connector
    joins back to ``a_{i_1}`` so the block is repeatable."""
    out: list[int] = []
    words = [plan.A1[i] for i in indices]
    for pos, w in enumerate(words):
        nxt = words[(pos + 1) % len(words)]
        out.extend(w)
        out.extend(gluing_word(shift, w, nxt))
    return tuple(out)
