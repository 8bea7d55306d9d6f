"""Counting functionals, entropy and pressure brackets, and the dimension root.

Pressure-type quantities are limits; everything here is computed at finite
``n`` and reported together with a bracket that is valid at that ``n``:

* the upper side uses subadditivity (Fekete): ``P <= (1/n) log Z_n`` for all ``n``;
* the lower side uses the specification of ``G``: gluing ``k`` core words of
  length ``n`` with connectors of length ``tau`` gives distinct words, so
  ``P >= (log Z_n^G - gamma tau max phi) / (n + tau)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import kernels
from .errors import InfeasibleError, SpecificationError
from .metric import Potential, variation_sum
from .shifts import SubshiftSpec, core_mask
from .words import enumerate_language, language_counts

WordSet = Union[None, str, Callable]

DEFAULT_TOL = 1e-4
DEFAULT_NMAX = 20
MIN_NMAX = 4


# --- word families --------------------------------------------------------------------------


def family_mask(shift: SubshiftSpec, D: WordSet, words: np.ndarray) -> np.ndarray:
    """Membership of each row in ``D``.

    ``D`` is ``None`` (the whole language), ``"G"``, ``"noise"`` (``C^p`` or
    ``C^s``, nonempty words), or a predicate on word tuples.
    """
    if D is None or D == "L":
        return np.ones(words.shape[0], dtype=bool)
    if D == "G":
        return core_mask(shift, words)
    if D == "noise":
        if shift.in_Cp is None or shift.in_Cs is None:
            raise SpecificationError(f"{shift!r} has no decomposition metadata")
        rows = (tuple(int(c) for c in r) for r in words)
        return np.fromiter((shift.in_Cp(w) or shift.in_Cs(w) for w in rows), dtype=bool, count=words.shape[0])
    if callable(D):
        return np.fromiter((bool(D(tuple(int(c) for c in r))) for r in words), dtype=bool, count=words.shape[0])
    raise ValueError(f"unknown word family {D!r}")


def family_words(shift: SubshiftSpec, D: WordSet, n: int) -> np.ndarray:
    """Rows of ``D_n``; the noise family of shifts that list it directly skips enumeration."""
    if D == "noise" and "noise_words" in shift.params:
        rows = shift.params["noise_words"](n)
        return np.asarray(rows, dtype=np.int64).reshape(len(rows), n)
    arr = enumerate_language(shift, n).array
    return arr[family_mask(shift, D, arr)]


def family_counts(shift: SubshiftSpec, D: WordSet, n_max: int) -> list[int]:
    """``[#D_1, ..., #D_{n_max}]``."""
    if D is None or D == "L" or (D == "G" and shift.params.get("core_is_language")):
        return language_counts(shift, n_max)[1:]
    return [int(family_words(shift, D, n).shape[0]) for n in range(1, n_max + 1)]


# --- Z_n -------------------------------------------------------------------------------------


def _group_extreme(phi: Potential, shift: SubshiftSpec, n: int, words: np.ndarray, take_max: bool) -> np.ndarray:
    """``S_n`` of each row, optimised over admissible completions (max or min)."""
    k = phi.depth
    if k == 1:
        return phi.window_sums(words, n)
    long = enumerate_language(shift, n + k - 1).array
    sums = phi.window_sums(long, n)
    powers = shift.m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    long_codes = long[:, :n] @ powers
    want = words @ powers
    order = np.argsort(long_codes, kind="stable")
    codes_sorted = long_codes[order]
    sums_sorted = sums[order]
    uniq, start = np.unique(codes_sorted, return_index=True)
    red = np.maximum.reduceat(sums_sorted, start) if take_max else np.minimum.reduceat(sums_sorted, start)
    pos = np.searchsorted(uniq, want)
    if np.any(pos >= uniq.shape[0]) or np.any(uniq[np.minimum(pos, uniq.shape[0] - 1)] != want):
        raise SpecificationError("a word has no admissible completion (dead end)")
    return red[pos]


def log_z_n(shift: SubshiftSpec, D: WordSet, phi: Potential, weight: float, n: int, sup: bool = True) -> float:
    """``log Z_n`` for the potential ``weight * phi``; ``-inf`` when ``D_n`` is empty.

    ``sup=True`` takes the supremum of ``exp(weight S_n phi)`` over each
    cylinder; ``sup=False`` the infimum (used by the lower bracket).
    """
    if n < 1:
        raise ValueError("n must be positive")
    use_all = D is None or D == "L" or (D == "G" and shift.params.get("core_is_language"))
    if use_all and phi.is_constant:
        count = language_counts(shift, n)[n]
        return math.log(count) + weight * n * phi.min_value if count else -math.inf
    if use_all and phi.depth == 1 and shift.automaton is not None and n >= shift.automaton.s:
        return _walk_log_z(shift, phi, weight, n, n)[-1]
    words = family_words(shift, D, n)
    if words.shape[0] == 0:
        return -math.inf
    take_max = (weight >= 0) == sup
    vals = weight * _group_extreme(phi, shift, n, words, take_max)
    top = vals.max()
    return float(top + math.log(np.exp(vals - top).sum()))


def _walk_log_z(shift: SubshiftSpec, phi: Potential, weight: float, n_lo: int, n_hi: int) -> np.ndarray:
    aut = shift.automaton
    states = np.asarray(aut.states, dtype=np.int64).reshape(aut.nstates, aut.s)
    init = np.exp(weight * phi.window_sums(states, aut.s))
    lookup = phi.lookup_array()
    factor = np.exp(weight * lookup[aut.sym])
    out = kernels.walk_log_sums(init, aut.src, aut.dst, factor, np.ones(aut.nstates), n_hi - aut.s)
    return out[n_lo - aut.s:]


def z_n(shift: SubshiftSpec, D: WordSet, phi: Potential, weight: float, n: int) -> float:
    """``Z_n(sigma, D, weight * phi)``."""
    return math.exp(log_z_n(shift, D, phi, weight, n))


def log_z_table(shift, D, phi, weight, n_max, sup=True) -> np.ndarray:
    """``log Z_n`` for ``n = 1..n_max``."""
    use_all = D is None or D == "L" or (D == "G" and shift.params.get("core_is_language"))
    if use_all and phi.is_constant:
        counts = language_counts(shift, n_max)[1:]
        return np.array([math.log(c) + weight * (i + 1) * phi.min_value if c else -math.inf for i, c in enumerate(counts)])
    if use_all and phi.depth == 1 and shift.automaton is not None and n_max >= shift.automaton.s:
        s = shift.automaton.s
        head = [log_z_n(shift, D, phi, weight, n, sup) for n in range(1, s)]
        return np.concatenate([head, _walk_log_z(shift, phi, weight, s, n_max)])
    return np.array([log_z_n(shift, D, phi, weight, n, sup) for n in range(1, n_max + 1)])


# --- growth estimates ---------------------------------------------------------------------------


@dataclass
class GrowthEstimate:
    table: list  # rows (n, count, log(count)/n)
    rate: float
    lower: float
    upper: float
    method: str

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _rate_rows(counts: list[int]) -> list:
    return [(n, c, math.log(c) / n if c else -math.inf) for n, c in enumerate(counts, start=1)]


def entropy_estimate(shift: SubshiftSpec, n_max: int = DEFAULT_NMAX, c0: Optional[float] = None) -> GrowthEstimate:
    """``(1/n) log #L_n`` with a bracket valid at finite ``n``.

    Upper: ``min_n (1/n) log #L_n`` (submultiplicativity). Lower:
    ``max_n (log #L_n - log c0)/n`` when a constant ``c0`` with
    ``#L_n <= c0 exp(n h)`` is supplied, otherwise ``max_n log #G_n / (n + tau)``
    from specification of ``G``.
    """
    if n_max < MIN_NMAX:
        raise ValueError(f"n_max must be at least {MIN_NMAX}")
    counts = language_counts(shift, n_max)[1:]
    rows = _rate_rows(counts)
    upper = min(r[2] for r in rows)
    if c0 is not None:
        lower = max((math.log(c) - math.log(c0)) / n for n, c, _ in rows)
        method = "subadditive-bracket[c0]"
    elif shift.has_structure:
        g = counts if shift.params.get("core_is_language") else family_counts(shift, "G", n_max)
        lower = max(math.log(c) / (n + shift.tau) for n, c in enumerate(g, start=1) if c)
        method = "subadditive-bracket[G]"
    else:
        lower = -math.inf
        method = "plain-limsup"
    return GrowthEstimate(rows, rows[-1][2], lower, upper, method)


def growth_rate(shift: SubshiftSpec, D: WordSet, n_max: int = DEFAULT_NMAX) -> GrowthEstimate:
    """Growth of ``#D_n``: ratio estimate ``log(#D_n / #D_{n-1})`` with its spread over the tail."""
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    counts = family_counts(shift, D, n_max)
    rows = _rate_rows(counts)
    ratios = [math.log(counts[i] / counts[i - 1]) for i in range(1, n_max) if counts[i] and counts[i - 1]]
    if not ratios:
        return GrowthEstimate(rows, -math.inf, -math.inf, -math.inf, "plain-limsup")
    tail = ratios[len(ratios) // 2:]
    return GrowthEstimate(rows, ratios[-1], min(tail), max(tail), "plain-limsup")


# --- dimension root ---------------------------------------------------------------------------


@dataclass
class DimensionRoot:
    gamma: float
    lower: float
    upper: float
    correction: float  # largest distance from gamma to a bracket end
    n_max: int
    iterations: int
    search: tuple = field(default=(0.0, 0.0))


def _bisect(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, int]:
    """Root of a nonincreasing function on ``[lo, hi]`` (clamped to the ends)."""
    flo, fhi = f(lo), f(hi)
    if flo <= 0:
        return lo, 0
    if fhi >= 0:
        return hi, 0
    it = 0
    while hi - lo > tol and it < 200:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi), it


def solve_dimension_gamma(
    shift: SubshiftSpec,
    phi: Potential,
    n_max: int = DEFAULT_NMAX,
    tol: float = DEFAULT_TOL,
) -> DimensionRoot:
    """Root ``gamma`` of ``P(sigma, -gamma phi) = 0``.

    The point estimate bisects the ratio estimator
    ``log Z_n - log Z_{n-1}`` at ``n = n_max`` over the sandwich
    ``[h_lo / max phi, h_hi / min phi]``. The bracket combines the roots of the
    Fekete upper bound and, when ``G`` has specification, the gluing lower bound.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if n_max < MIN_NMAX:
        raise InfeasibleError(
            f"bracket endpoints not separated: n_max={n_max} is below {MIN_NMAX}, increase n_max"
        )
    ent = entropy_estimate(shift, n_max)
    h_lo = max(ent.lower, 0.0)
    a_max, a_min = phi.max_value, phi.min_value
    lo, hi = h_lo / a_max, ent.upper / a_min

    def ratio(g):
        t = log_z_table(shift, None, phi, -g, n_max)
        return t[-1] - t[-2]

    def fekete(g):
        t = log_z_table(shift, None, phi, -g, n_max)
        return float(np.min(t / np.arange(1, n_max + 1)))

    f_lo, f_hi = ratio(lo), ratio(hi)
    slack = 1e-9
    if f_lo < -slack or f_hi > slack:
        raise InfeasibleError(
            f"bracket endpoints same sign: P({lo:.6g})={f_lo:.3g}, P({hi:.6g})={f_hi:.3g}; increase n_max"
        )
    if phi.is_constant:
        # P(-gamma c) is affine in gamma: every estimator has a closed-form root
        counts = language_counts(shift, n_max)
        gamma = math.log(counts[-1] / counts[-2]) / a_min
        upper = ent.upper / a_min
        lower = h_lo / a_min if math.isfinite(ent.lower) else lo
        iters = 0
    else:
        btol = tol * 1e-2
        gamma, iters = _bisect(ratio, lo, hi, btol)
        # bisection midpoints sit within btol of the roots, so widen outward
        upper = _bisect(fekete, lo, hi, btol)[0] + btol
        if shift.has_structure:
            tau = shift.tau

            def glued(g):
                t = log_z_table(shift, "G", phi, -g, n_max, sup=False)
                ns = np.arange(1, n_max + 1)
                return float(np.max((t - g * tau * a_max) / (ns + tau)))

            lower = _bisect(glued, lo, hi, btol)[0] - btol
        else:
            lower = lo
    lower, upper = min(lower, gamma), max(upper, gamma)
    corr = max(upper - gamma, gamma - lower)
    return DimensionRoot(float(gamma), float(lower), float(upper), float(corr), n_max, iters, (lo, hi))


# --- measures ------------------------------------------------------------------------------------


@dataclass
class MarkovMeasureSpec:
    """A one-step Markov measure on symbols; Bernoulli when all rows coincide."""

    P: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        self.pi = np.asarray(self.pi, dtype=float)
        m = self.P.shape[0]
        if self.P.shape != (m, m) or self.pi.shape != (m,):
            raise ValueError("transition matrix and stationary vector have mismatched shapes")
        if np.any(self.P < 0) or not np.allclose(self.P.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("rows of the transition matrix must be probability vectors")
        if not np.allclose(self.pi @ self.P, self.pi, atol=1e-10) or not math.isclose(self.pi.sum(), 1.0, abs_tol=1e-12):
            raise ValueError("pi is not a stationary probability vector")

    @property
    def m(self) -> int:
        return self.P.shape[0]

    @classmethod
    def bernoulli(cls, weights) -> "MarkovMeasureSpec":
        p = np.asarray(weights, dtype=float)
        if np.any(p < 0) or not math.isclose(p.sum(), 1.0, abs_tol=1e-12):
            raise ValueError("Bernoulli weights must be a probability vector")
        return cls(np.tile(p, (p.shape[0], 1)), p)

    @classmethod
    def from_matrix(cls, P) -> "MarkovMeasureSpec":
        P = np.asarray(P, dtype=float)
        vals, vecs = np.linalg.eig(P.T)
        v = np.real(vecs[:, np.argmin(np.abs(vals - 1.0))])
        return cls(P, v / v.sum())

    @classmethod
    def parry(cls, adjacency) -> "MarkovMeasureSpec":
        """Maximal-entropy Markov measure of a one-step SFT: ``P_ij = A_ij r_j / (lambda r_i)``."""
        A = np.asarray(adjacency, dtype=float)
        vals, right = np.linalg.eig(A)
        k = np.argmax(np.real(vals))
        lam = float(np.real(vals[k]))
        r = np.abs(np.real(right[:, k]))
        P = A * r[None, :] / (lam * r[:, None])
        vals_l, left = np.linalg.eig(A.T)
        l = np.abs(np.real(left[:, np.argmax(np.real(vals_l))]))
        pi = l * r / (l * r).sum()
        return cls(P, pi)

    def entropy(self) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(self.P > 0, self.P * np.log(self.P), 0.0)
        return float(-(self.pi[:, None] * terms).sum())

    def cylinder_mass(self, w) -> float:
        mass = self.pi[w[0]]
        for a, b in zip(w, w[1:]):
            mass *= self.P[a, b]
        return float(mass)

    def check_support(self, shift: SubshiftSpec) -> None:
        if shift.m != self.m:
            raise ValueError("measure and shift use different alphabets")
        for a in range(self.m):
            if self.pi[a] > 0 and not shift.admissible((a,)):
                raise ValueError(f"measure charges the forbidden symbol {a}")
            for b in range(self.m):
                if self.pi[a] > 0 and self.P[a, b] > 0 and not shift.admissible((a, b)):
                    raise ValueError(f"measure charges the forbidden transition {a}{b}")


def measure_dimension(measure: MarkovMeasureSpec, phi: Potential, shift: Optional[SubshiftSpec] = None) -> float:
    """``h(mu) / integral(phi dmu)`` with both terms in closed form."""
    if shift is not None:
        measure.check_support(shift)
    if phi.m != measure.m:
        raise ValueError("measure and potential use different alphabets")
    integral = 0.0
    for w, v in phi.table.items():
        integral += measure.cylinder_mass(w) * v
    total = sum(measure.cylinder_mass(w) for w in phi.table)
    if not math.isclose(total, 1.0, abs_tol=1e-9):
        raise ValueError("potential table does not cover the support of the measure")
    return measure.entropy() / integral


# --- diagnostics -----------------------------------------------------------------------------


@dataclass
class GapReport:
    values: list  # Z_n for n = 1..n_max
    partial_sums: list
    ratios: list  # Z_{n+1}/Z_n where both are positive
    verdict: str

    @property
    def total(self) -> float:
        return self.partial_sums[-1] if self.partial_sums else 0.0


def pressure_gap_check(shift: SubshiftSpec, phi: Potential, gamma: float, n_max: int = 30) -> GapReport:
    """Partial sums of ``Z_n(sigma, C^p u C^s, -gamma phi)`` with a tail-ratio diagnostic.

    The verdict is ``converging`` when the ratio stays below one over the
    second half of the table, ``empty`` when no noise words exist, and
    ``inconclusive`` otherwise. It is a diagnostic, not a proof.
    """
    if shift.decomposition is None:
        raise SpecificationError(f"{shift!r} has no decomposition metadata")
    vals = [math.exp(log_z_n(shift, "noise", phi, -gamma, n)) for n in range(1, n_max + 1)]
    sums = list(np.cumsum(vals))
    ratios = [vals[i + 1] / vals[i] for i in range(n_max - 1) if vals[i] > 0 and vals[i + 1] > 0]
    if not any(vals):
        verdict = "empty"
    elif ratios and all(r < 1 for r in ratios[len(ratios) // 2:]):
        verdict = "converging"
    else:
        verdict = "inconclusive"
    return GapReport(vals, [float(s) for s in sums], ratios, verdict)


@dataclass
class UniformCount:
    values: list
    low: float
    high: float


def uniform_counting_check(shift: SubshiftSpec, phi: Potential, gamma: float, n_max: int = DEFAULT_NMAX) -> UniformCount:
    """``Z_n(sigma, L, -gamma phi)`` for ``n <= n_max`` and its observed band."""
    vals = [float(v) for v in np.exp(log_z_table(shift, None, phi, -gamma, n_max))]
    return UniformCount(vals, min(vals), max(vals))


def variation_bound(phi: Potential) -> float:
    """``b = sum_i Var_i phi`` (finite for locally constant potentials)."""
    return variation_sum(phi)
