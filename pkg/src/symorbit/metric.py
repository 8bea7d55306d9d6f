"""Potentials, Birkhoff sums and the cylinder geometry they induce.

A potential is locally constant of depth ``k``: its value at a point depends
on the first ``k`` symbols only. When every value is the logarithm of an exact
number (``Fraction`` or :class:`~symorbit.exact.QuadNumber`) the potential
is *exact* and all cylinder diameters are exact numbers, so boundary
comparisons such as ``rho <= |[i]|`` are decided without rounding.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CapExceededError, IndistinguishableError, SpecificationError
from .shifts import SubshiftSpec, core_mask
from .words import Word, as_word, word_cap


def exact_scalar(x):
    """Floats become the decimal rational they print as; exact values pass through."""
    if isinstance(x, float):
        return Fraction(repr(x))
    return x


@dataclass(frozen=True, eq=False)
class Potential:
    m: int
    depth: int
    table: dict  # word of length depth -> float value
    multipliers: Optional[dict] = None  # word -> exact number r with value log(r)
    label: str = ""

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be positive")
        if not self.table:
            raise ValueError("empty potential table")
        for w, v in self.table.items():
            if len(w) != self.depth:
                raise ValueError(f"table key {w} has the wrong length")
            if not v > 0:
                raise ValueError("potential values must be strictly positive")

    # constructors -------------------------------------------------------------
    @classmethod
    def constant(cls, m: int, value: float | None = None, *, multiplier=None, label: str = ""):
        """Constant potential; pass ``multiplier=r`` for the exact value ``log r``."""
        if multiplier is not None:
            return cls.from_multipliers(m, {(a,): multiplier for a in range(m)}, label=label or f"log({multiplier})")
        return cls(m, 1, {(a,): float(value) for a in range(m)}, None, label or f"{value}")

    @classmethod
    def from_multipliers(cls, m: int, mults: dict, label: str = ""):
        mults = {as_word(w): exact_scalar(r) for w, r in mults.items()}
        depth = len(next(iter(mults)))
        table = {w: math.log(float(r)) for w, r in mults.items()}
        return cls(m, depth, table, mults, label)

    @classmethod
    def from_values(cls, m: int, values: dict, label: str = ""):
        values = {as_word(w): float(v) for w, v in values.items()}
        depth = len(next(iter(values)))
        return cls(m, depth, values, None, label)

    # basic data ---------------------------------------------------------------
    @property
    def exact(self) -> bool:
        return self.multipliers is not None

    @property
    def is_constant(self) -> bool:
        return len(set(self.table.values())) == 1

    @property
    def max_value(self) -> float:
        return max(self.table.values())

    @property
    def min_value(self) -> float:
        return min(self.table.values())

    @property
    def c_upper(self):
        """``c* = exp(max phi)``, exact when possible."""
        if self.exact:
            return max(self.multipliers.values())
        return math.exp(self.max_value)

    @property
    def c_lower(self):
        """``c_* = exp(min phi)``."""
        if self.exact:
            return min(self.multipliers.values())
        return math.exp(self.min_value)

    def value(self, window: Sequence[int]) -> float:
        return self.table[tuple(window)]

    def lookup_array(self) -> np.ndarray:
        """Values indexed by the base-``m`` code of a window; NaN where undefined."""
        arr = np.full(self.m ** self.depth, np.nan)
        for w, v in self.table.items():
            arr[_code(w, self.m)] = v
        return arr

    def window_sums(self, words: np.ndarray, n: int) -> np.ndarray:
        """``S_n`` of every row of ``words`` (rows must have ``n + depth - 1`` symbols)."""
        words = np.asarray(words, dtype=np.int64)
        k = self.depth
        arr = self.lookup_array()
        powers = self.m ** np.arange(k - 1, -1, -1, dtype=np.int64)
        total = np.zeros(words.shape[0])
        for i in range(n):
            total += arr[words[:, i:i + k] @ powers]
        return total


def _code(w, m) -> int:
    c = 0
    for a in w:
        c = c * m + a
    return c


def _completions(shift: Optional[SubshiftSpec], phi: Potential, w: tuple):
    k = phi.depth
    if k == 1:
        return [()]
    m = phi.m
    out = []
    for c in itertools.product(range(m), repeat=k - 1):
        full = w + c
        if shift is not None and not shift.admissible(full):
            continue
        if all(full[i:i + k] in phi.table for i in range(len(w))):
            out.append(c)
    if not out:
        raise SpecificationError(f"{w} has no admissible completion (dead-end word)")
    return out


def birkhoff_sum(phi: Potential, w, shift: Optional[SubshiftSpec] = None) -> tuple[float, float]:
    """``(S, S_star)``: the largest and smallest ``S_n phi`` over the cylinder ``[w]``.

    For depth ``k > 1`` the last ``k - 1`` terms read past the word, so they
    are optimised over admissible completions. ``S_star <= S <= S_star + sum Var_i``.
    """
    w = as_word(w)
    if not w:
        raise ValueError("birkhoff_sum needs a nonempty word")
    if shift is not None and not shift.admissible(w):
        raise ValueError(f"{w} is not admissible")
    n, k = len(w), phi.depth
    sums = []
    for c in _completions(shift, phi, w):
        full = w + c
        sums.append(sum(phi.table[full[i:i + k]] for i in range(n)))
    return max(sums), min(sums)


def _exact_min_product(phi: Potential, w: tuple, shift):
    """The product of multipliers realising ``S_star`` (smallest product), exactly."""
    n, k = len(w), phi.depth
    best = None
    for c in _completions(shift, phi, w):
        full = w + c
        prod = Fraction(1)
        for i in range(n):
            prod = phi.multipliers[full[i:i + k]] * prod
        if best is None or prod < best:
            best = prod
    return best


def cylinder_diameter(phi: Potential, w, shift: Optional[SubshiftSpec] = None) -> float:
    """``|[w]|_phi = exp(-S_star(w))``."""
    w = as_word(w)
    if not w:
        return 1.0
    if phi.exact:
        return float(1 / _exact_min_product(phi, w, shift))
    return math.exp(-birkhoff_sum(phi, w, shift)[1])


def cylinder_diameter_exact(phi: Potential, w, shift: Optional[SubshiftSpec] = None):
    """Exact diameter for exact potentials, float otherwise."""
    w = as_word(w)
    if not w:
        return Fraction(1)
    if phi.exact:
        return 1 / _exact_min_product(phi, w, shift)
    return math.exp(-birkhoff_sum(phi, w, shift)[1])


def variation(phi: Potential, n: int) -> float:
    """``Var_n``: largest oscillation of ``phi`` among points sharing their first ``n`` symbols."""
    if n < 1:
        raise ValueError("n must be positive")
    if n >= phi.depth:
        return 0.0
    groups: dict = {}
    for w, v in phi.table.items():
        groups.setdefault(w[:n], []).append(v)
    return max(max(vs) - min(vs) for vs in groups.values())


def variation_sum(phi: Potential, n: int | None = None) -> float:
    """``sum_{i=1}^{n} Var_i``; all terms from ``depth`` on vanish."""
    top = phi.depth - 1 if n is None else min(n, phi.depth - 1)
    return sum(variation(phi, i) for i in range(1, top + 1))


def common_prefix_length(w: Sequence[int], v: Sequence[int]) -> int:
    n = 0
    for a, b in zip(w, v):
        if a != b:
            break
        n += 1
    return n


def d_phi(phi: Potential, w, v, shift: Optional[SubshiftSpec] = None) -> float:
    """``exp(-S_n* phi(w))`` where ``n`` is the first index at which ``w`` and ``v`` differ."""
    w, v = as_word(w), as_word(v)
    n = common_prefix_length(w, v)
    if n == min(len(w), len(v)):
        raise IndistinguishableError(f"points agree on all {n} compared symbols")
    return cylinder_diameter(phi, w[:n], shift)


# --- covers ------------------------------------------------------------------------------


def _ge(a, b) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return float(a) >= float(b) * (1 - 1e-12)
    return a >= b


def _lt(a, b) -> bool:
    return not _ge(a, b)


class _DiameterCache:
    def __init__(self, shift, phi):
        self.shift, self.phi = shift, phi
        self.cache = {(): Fraction(1) if phi.exact else 1.0}
        # multiplying by stored inverses is much cheaper than exact division
        self.inv = {w: 1 / r for w, r in phi.multipliers.items()} if phi.exact else None
        self.by_length = None
        if phi.depth == 1 and phi.is_constant:
            self.step = next(iter(self.inv.values())) if phi.exact else math.exp(-phi.min_value)
            self.by_length = [self.cache[()]]

    def __call__(self, w):
        if self.by_length is not None:
            # constant potentials: the diameter depends on the length only
            n = len(w)
            while len(self.by_length) <= n:
                self.by_length.append(self.by_length[-1] * self.step)
            return self.by_length[n]
        d = self.cache.get(w)
        if d is None:
            if self.phi.depth == 1 and w[:-1] in self.cache:
                parent = self.cache[w[:-1]]
                if self.phi.exact:
                    d = parent * self.inv[w[-1:]]
                else:
                    d = parent * math.exp(-self.phi.table[w[-1:]])
            else:
                d = cylinder_diameter_exact(self.phi, w, self.shift)
            self.cache[w] = d
        return d


def _children(shift, w):
    if shift.extension_filter is not None:
        cand = np.empty((shift.m, len(w) + 1), dtype=np.int64)
        cand[:, :-1] = w
        cand[:, -1] = np.arange(shift.m)
        keep = shift.extension_filter(cand)
        return [w + (a,) for a in range(shift.m) if keep[a]]
    return [w + (a,) for a in range(shift.m) if shift.admissible(w + (a,))]


@dataclass
class CoverCollection:
    rho: object
    members: list
    strata: list
    phi: Potential = field(repr=False)
    shift: SubshiftSpec = field(repr=False)
    diameters: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._set = set(self.members)
        self.max_len = max((len(w) for w in self.members), default=0)

    def __len__(self):
        return len(self.members)

    def member_of(self, x) -> Optional[Word]:
        """The unique member that is a prefix of ``x`` (None if ``x`` is too short)."""
        x = as_word(x)
        for k in range(1, min(len(x), self.max_len) + 1):
            if x[:k] in self._set:
                return x[:k]
        return None

    @property
    def min_diameter(self) -> float:
        return min(float(d) for d in self.diameters.values())

    @property
    def c_rho(self) -> float:
        """Comparison constant between ``d_phi`` and the recoded metric."""
        return math.exp(variation_sum(self.phi)) / self.min_diameter

    def upper_factor(self) -> float:
        """Members satisfy ``|[i]| < factor * rho``: ``c*`` for depth one, ``c* exp(sum Var)`` beyond."""
        return float(self.phi.c_upper) * math.exp(variation_sum(self.phi))

    def check(self) -> None:
        """Raise if members overlap or violate the diameter window."""
        for w in self.members:
            for k in range(1, len(w)):
                if w[:k] in self._set:
                    raise SpecificationError(f"cover members {w[:k]} and {w} overlap")
            d = self.diameters[w]
            if not _ge(d, self.rho) or not float(d) < self.upper_factor() * float(self.rho) * (1 + 1e-12):
                raise SpecificationError(f"member {w} has diameter {float(d)} outside the window")


def build_cover(shift: SubshiftSpec, phi: Potential, rho, cap: int | None = None) -> CoverCollection:
    """Pruned cover by cylinders of diameter in ``[rho, c* rho)``.

    For every point the longest prefix with diameter ``>= rho`` is collected;
    members having a proper prefix in the collection are then removed.
    """
    rho = exact_scalar(rho)
    if not 0 < float(rho) < 1:
        raise ValueError("rho must lie in (0, 1)")
    cap = word_cap() if cap is None else cap
    diam = _DiameterCache(shift, phi)
    found = []
    stack = [()]
    window: list = []
    visited = 0
    while stack:
        w = stack.pop()
        visited += 1
        if visited > cap:
            raise CapExceededError(f"cover search visited more than {cap} words")
        kids = _children(shift, w)
        if not kids:
            raise SpecificationError(f"{w} has no admissible extension")
        if any(_lt(diam(c), rho) for c in kids):
            found.append(w)
        stack.extend(c for c in kids if _ge(diam(c), rho))
    found_set = set(found)
    members = sorted(w for w in found_set if not any(w[:k] in found_set for k in range(1, len(w))))
    c_low = float(phi.c_lower)
    strata = [int(math.floor(math.log(float(diam(w)) / float(rho)) / math.log(c_low) + 1e-12)) for w in members]
    return CoverCollection(rho, members, strata, phi, shift, {w: diam(w) for w in members})


def stratify(
    shift: SubshiftSpec,
    D,
    phi: Potential,
    n: float,
    radius=None,
    cap: int | None = None,
) -> list[list]:
    """Strata ``C_D^n(l)``: ``D``-words with ``c_*^l e^{-n} <= |[i]| < c_*^{l+1} e^{-n}`` inside ``[e^{-n}, c* e^{-n})``.

    ``D`` is a word predicate, or ``"G"`` for the core family (filtered in bulk).
    ``radius`` overrides ``e^{-n}`` with an exact value.
    """
    r = exact_scalar(radius) if radius is not None else math.exp(-n)
    cap = word_cap() if cap is None else cap
    c_up, c_low = phi.c_upper, phi.c_lower
    top = int(math.floor(math.log(float(c_up)) / math.log(float(c_low)) + 1e-12))
    strata: list[list] = [[] for _ in range(top + 1)]
    diam = _DiameterCache(shift, phi)
    upper = c_up * r if not isinstance(r, float) else float(c_up) * r
    stack = [()]
    window: list = []
    visited = 0
    while stack:
        w = stack.pop()
        visited += 1
        if visited > cap:
            raise CapExceededError(f"stratification visited more than {cap} words")
        for c in _children(shift, w):
            d = diam(c)
            if not _ge(d, r):
                continue
            stack.append(c)
            if _lt(d, upper):
                bound = r
                for l in range(top + 1):
                    nxt = bound * c_low if not isinstance(bound, float) else bound * float(c_low)
                    if _ge(d, bound) and _lt(d, nxt):
                        window.append((l, c))
                        break
                    bound = nxt
    for l, c in _filter_family(shift, D, window):
        strata[l].append(c)
    for level in strata:
        level.sort()
        present = set(level)
        for w in level:
            if any(w[:k] in present for k in range(1, len(w))):
                raise SpecificationError("stratum cylinders overlap")
    return strata


def _filter_family(shift, D, items):
    """Keep ``(l, word)`` pairs whose word is in ``D``; ``D == "G"`` is vectorised per length."""
    if D != "G":
        return [(l, c) for l, c in items if D(c)]
    by_len: dict = {}
    for item in items:
        by_len.setdefault(len(item[1]), []).append(item)
    out = []
    for n, group in by_len.items():
        arr = np.array([c for _, c in group], dtype=np.int64).reshape(len(group), n)
        keep = core_mask(shift, arr)
        out.extend(item for item, k in zip(group, keep) if k)
    return out


# --- recoding ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Recoding:
    members: tuple
    remainder: int  # symbols left over after the last complete member


def recode(shift: SubshiftSpec, cover: CoverCollection, x) -> Recoding:
    """Greedy (and, by disjointness, unique) parse of ``x`` into cover members."""
    x = as_word(x)
    out, pos = [], 0
    while pos < len(x):
        w = cover.member_of(x[pos:])
        if w is None:
            break
        out.append(w)
        pos += len(w)
    if not out:
        raise ValueError("prefix too short to parse a single cover member")
    return Recoding(tuple(out), len(x) - pos)


def d_phi_rho(phi: Potential, u: Recoding, v: Recoding, shift: Optional[SubshiftSpec] = None) -> float:
    """Recoded metric: ``exp(-sum S*_{n_i}(member_i))`` over the shared leading members."""
    k = common_prefix_length(u.members, v.members)
    if k == min(len(u.members), len(v.members)):
        raise IndistinguishableError(f"recodings agree on all {k} compared members")
    total = 0.0
    for w in u.members[:k]:
        total += -math.log(cylinder_diameter(phi, w, shift))
    return math.exp(-total)
