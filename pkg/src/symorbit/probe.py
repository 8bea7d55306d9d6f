"""Orbit complexity of concrete points under x -> p x (mod 1).

Rationals are expanded exactly and their eventual period is found by
remainder cycling; their orbit closures are finite, so every dimension
reported for them is exactly 0. Other points enter as digit streams in a
declared base, and their dimensions are block-counting estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .errors import ConfigError
from .words import Word, complexity_table

PERIOD_SEARCH_CAP = 10**6


@dataclass(frozen=True)
class DigitStream:
    """A point given only by its digits in one base, trusted to ``len(digits)``."""

    base: int
    digits: tuple
    label: str = "stream"

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be at least 2")
        if any(not 0 <= d < self.base for d in self.digits):
            raise ValueError(f"stream digits must lie in [0, {self.base})")


RealPoint = Union[Fraction, DigitStream]


def as_point(x) -> RealPoint:
    if isinstance(x, DigitStream):
        return x
    x = Fraction(x)
    if not 0 <= x < 1:
        raise ValueError("x must lie in [0, 1)")
    return x


@dataclass(frozen=True)
class Expansion:
    digits: Word
    preperiod: Optional[int] = None
    period: Optional[int] = None

    @property
    def periodic(self) -> bool:
        return self.period is not None


def _rational_cycle(x: Fraction, p: int) -> tuple[int, int]:
    """``(preperiod, period)`` of the base-``p`` expansion of a rational."""
    num, den = x.numerator, x.denominator
    seen: dict = {}
    k = 0
    while num not in seen:
        if k > PERIOD_SEARCH_CAP:
            raise ValueError("period search exceeded its budget")
        seen[num] = k
        num = (num * p) % den
        k += 1
    return seen[num], k - seen[num]


def digits_of_real(x: RealPoint, p: int, n: int) -> Expansion:
    """First ``n`` base-``p`` digits; rationals also report their eventual period."""
    if p < 2:
        raise ValueError("base must be at least 2")
    x = as_point(x)
    if isinstance(x, DigitStream):
        if x.base != p:
            raise ConfigError(f"stream is in base {x.base}, not {p}", field="base")
        if n > len(x.digits):
            raise ConfigError(f"requested {n} digits but the stream is trusted to {len(x.digits)}", field="nmax")
        return Expansion(tuple(x.digits[:n]))
    num, den = x.numerator, x.denominator
    out = []
    for _ in range(n):
        num *= p
        out.append(num // den)
        num %= den
    pre, per = _rational_cycle(x, p)
    return Expansion(tuple(out), pre, per)


def orbit_set(x: Fraction, p: int) -> frozenset:
    """The (finite) forward orbit of a rational under ``T_p``."""
    x = Fraction(x)
    seen = set()
    while x not in seen:
        seen.add(x)
        x = (x * p) % 1
    return frozenset(seen)


@dataclass
class OrbitProfile:
    base: int
    table: list  # rows (n, p_x(n), log p_x(n) / (n log base))
    periodic: bool
    preperiod: Optional[int]
    period: Optional[int]
    dim: float
    exact: bool  # True when dim is exact (finite orbit closure)
    bracket: tuple
    note: str = ""

    def csv_rows(self):
        return [(n, c, d) for n, c, d in self.table]


def orbit_closure_profile(x: RealPoint, p: int, n_max: int, prefix_length: Optional[int] = None) -> OrbitProfile:
    """Block complexity ``p_x(n)`` for ``n <= n_max`` and the induced dimension estimate.

    For rationals the prefix is long enough to contain every factor of the
    infinite word, so the table is exact and the dimension is exactly 0.
    """
    if n_max < 1:
        raise ValueError("n_max must be positive")
    x = as_point(x)
    length = prefix_length or max(n_max * n_max, n_max + 1)
    if isinstance(x, DigitStream):
        # streams are read to their full trusted depth unless told otherwise
        length = len(x.digits) if prefix_length is None else prefix_length
        exp = digits_of_real(x, p, length)
    else:
        pre, per = _rational_cycle(x, p)
        exp = digits_of_real(x, p, max(length, pre + per + n_max))
    counts = complexity_table(exp.digits, n_max, m=p)
    rows = [(n, c, math.log(c) / (n * math.log(p))) for n, c in enumerate(counts, start=1)]
    if exp.periodic:
        return OrbitProfile(p, rows, True, exp.preperiod, exp.period, 0.0, True, (0.0, 0.0), "finite orbit closure")
    tail = [r[2] for r in rows[len(rows) // 2:]]
    return OrbitProfile(p, rows, False, None, None, rows[-1][2], False, (min(tail), max(tail)), "block-counting estimate")


# --- multiplicative dependence -------------------------------------------------------------------


def factorize(n: int) -> dict:
    out: dict = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class Dependence:
    dependent: bool
    a: Optional[int] = None  # p**a == q**b
    b: Optional[int] = None
    value: Optional[int] = None
    root: Optional[int] = None  # common base m with p = m**s, q = m**t

    def __str__(self):
        if self.dependent:
            return f"dependent a={self.a} b={self.b} value={self.value} root={self.root}"
        return "independent"


def multiplicative_dependence(p: int, q: int) -> Dependence:
    """Decide whether ``p**a == q**b`` for some positive ``a, b`` from prime exponents."""
    if p < 2 or q < 2:
        raise ValueError("p and q must be at least 2")
    fp, fq = factorize(p), factorize(q)
    if set(fp) != set(fq):
        return Dependence(False)
    gp = math.gcd(*fp.values())
    gq = math.gcd(*fq.values())
    prim_p = {r: e // gp for r, e in fp.items()}
    prim_q = {r: e // gq for r, e in fq.items()}
    if prim_p != prim_q:
        return Dependence(False)
    root = math.prod(r**e for r, e in prim_p.items())
    g = math.gcd(gp, gq)
    a, b = gq // g, gp // g
    return Dependence(True, a, b, p**a, root)


# --- Furstenberg experiments ----------------------------------------------------------------------


@dataclass
class FurstenbergReport:
    profile_p: OrbitProfile
    profile_q: Optional[OrbitProfile]
    dependence: Dependence
    s: Optional[float]
    profile_root: Optional[OrbitProfile] = None
    identity: Optional[bool] = None  # exact orbit-inclusion check for dependent pairs
    notes: list = field(default_factory=list)


def furstenberg_profile(x: RealPoint, p: int, q: int, n_max: int) -> FurstenbergReport:
    """Profiles of ``x`` in bases ``p`` and ``q`` and the empirical sum of dimensions."""
    x = as_point(x)
    dep = multiplicative_dependence(p, q)
    prof_p = orbit_closure_profile(x, p, n_max)
    notes = []
    prof_q = None
    if isinstance(x, DigitStream) and x.base != q:
        notes.append("q-profile requires exact-rational or base-q stream input")
    else:
        prof_q = orbit_closure_profile(x, q, n_max)
    s = prof_p.dim + prof_q.dim if prof_q is not None else None
    report = FurstenbergReport(prof_p, prof_q, dep, s, notes=notes)
    if dep.dependent and not isinstance(x, DigitStream):
        report.profile_root = orbit_closure_profile(x, dep.root, n_max)
        base_orbit = orbit_set(x, dep.root)
        inclusion = orbit_set(x, p) <= base_orbit and orbit_set(x, q) <= base_orbit
        dims = {prof_p.dim, prof_q.dim, report.profile_root.dim}
        exact = prof_p.exact and prof_q.exact and report.profile_root.exact
        report.identity = inclusion and exact and len(dims) == 1
    return report


def champernowne_stream(base: int, max_block: int) -> DigitStream:
    """All words of length ``1..max_block`` over ``base`` symbols, each length in lexicographic order."""
    parts = []
    for k in range(1, max_block + 1):
        grid = np.indices((base,) * k).reshape(k, -1).T
        parts.append(grid.ravel())
    digits = np.concatenate(parts)
    return DigitStream(base, tuple(int(d) for d in digits), f"champernowne-{base}")
