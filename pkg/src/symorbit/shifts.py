"""Concrete subshifts and their structural oracles.

A :class:`SubshiftSpec` is an admissibility oracle plus optional structure:
the decomposition of every admissible word into a prefix part, a good core
and a suffix part, and the gap size ``tau`` with which core words can be glued.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import EmptyLanguageError, SpecificationError
from .words import Word, as_word, check_alphabet, enumerate_language

Decomposition = Callable[[Word], tuple]
Predicate = Callable[[Word], bool]

CONSISTENCY_DEPTH = 20


def _empty_only(w) -> bool:
    return len(w) == 0


@dataclass(frozen=True, eq=False)
class SubshiftSpec:
    m: int
    admissible: Predicate
    kind: str
    name: str = ""
    decomposition: Optional[Decomposition] = None
    tau: Optional[int] = None
    in_Cp: Optional[Predicate] = None
    in_G: Optional[Predicate] = None
    in_Cs: Optional[Predicate] = None
    # vectorised child filter used by prefix extension: rows are admissible
    # words with one symbol appended
    extension_filter: Optional[Callable[[np.ndarray], np.ndarray]] = None
    automaton: Optional["Automaton"] = None
    params: dict = field(default_factory=dict)
    _levels: list = field(default_factory=list, repr=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    @property
    def has_structure(self) -> bool:
        return self.decomposition is not None and self.tau is not None and self.in_G is not None

    def __repr__(self):
        return f"SubshiftSpec({self.name or self.kind}, m={self.m}, tau={self.tau})"


class Automaton:
    """Vertex presentation of an SFT whose states are admissible words of length ``s``.

    Appending a symbol moves from ``state`` to ``state[1:] + (a,)``.
    """

    def __init__(self, m: int, s: int, local_ok: Callable[[tuple], bool]):
        self.m = m
        self.s = s
        states = []

        def grow(prefix):
            if len(prefix) == s:
                states.append(prefix)
                return
            for a in range(m):
                w = prefix + (a,)
                if local_ok(w):
                    grow(w)

        grow(())
        self.states = states
        self.index = {st: i for i, st in enumerate(states)}
        src, dst, sym = [], [], []
        for i, st in enumerate(states):
            for a in range(m):
                w = st + (a,)
                if local_ok(w):
                    src.append(i)
                    dst.append(self.index[w[1:]])
                    sym.append(a)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.sym = np.asarray(sym, dtype=np.int64)
        self._local_ok = local_ok

    @property
    def nstates(self) -> int:
        return len(self.states)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.nstates, self.nstates), dtype=np.int64)
        np.add.at(a, (self.src, self.dst), 1)
        return a

    def counts(self, n_max: int) -> list[int]:
        """Exact ``#L_n`` for ``n = 0..n_max`` using Python integers."""
        out = []
        for n in range(min(n_max, self.s - 1) + 1):
            out.append(self._short_count(n))
        if n_max >= self.s:
            vec = [1] * self.nstates
            out.append(sum(vec))
            edges = list(zip(self.src.tolist(), self.dst.tolist()))
            for _ in range(self.s + 1, n_max + 1):
                new = [0] * self.nstates
                for i, j in edges:
                    new[j] += vec[i]
                vec = new
                out.append(sum(vec))
        return out

    def _short_count(self, n: int) -> int:
        total = 0

        def grow(prefix):
            nonlocal total
            if len(prefix) == n:
                total += 1
                return
            for a in range(self.m):
                w = prefix + (a,)
                if self._local_ok(w):
                    grow(w)

        grow(())
        return total

    def mixing_exponent(self) -> Optional[int]:
        """Smallest ``N`` with every entry of ``A**N`` positive, or ``None``."""
        k = self.nstates
        if k == 0:
            return None
        a = self.adjacency() > 0
        power = a.copy()
        wielandt = (k - 1) ** 2 + 1
        for n in range(1, wielandt + 1):
            if power.all():
                return n
            power = (power.astype(np.int64) @ a.astype(np.int64)) > 0
        return None


# --- full shift --------------------------------------------------------------------------


def build_full_shift(m: int) -> SubshiftSpec:
    if m < 1:
        raise ValueError("alphabet size must be at least 1")

    def admissible(w):
        return all(0 <= c < m for c in w)

    return SubshiftSpec(
        m=m,
        admissible=admissible,
        kind="full",
        name=f"full-{m}",
        decomposition=lambda w: ((), tuple(w), ()),
        tau=0,
        in_Cp=_empty_only,
        in_G=admissible,
        in_Cs=_empty_only,
        extension_filter=lambda cand: np.ones(cand.shape[0], dtype=bool),
        automaton=Automaton(m, 1, lambda w: True),
        params={"m": m, "core_is_language": True, "noise_words": lambda n: []},
    )


# --- shifts of finite type -----------------------------------------------------------------


@dataclass(frozen=True)
class SftSpec:
    """An SFT presented by a 0/1 transition matrix, a forbidden-word list, or both."""

    m: int
    matrix: Optional[tuple] = None
    forbidden: Optional[tuple] = None

    def forbidden_words(self) -> set:
        listed = set()
        if self.forbidden is not None:
            for f in self.forbidden:
                f = as_word(f)
                if not f:
                    raise ValueError("forbidden words must be nonempty")
                check_alphabet(f, self.m)
                listed.add(f)
        if self.matrix is None:
            return listed
        mat = np.asarray(self.matrix)
        if mat.shape != (self.m, self.m) or not np.isin(mat, (0, 1)).all():
            raise ValueError("transition matrix must be m x m with 0/1 entries")
        from_matrix = {(a, b) for a in range(self.m) for b in range(self.m) if mat[a, b] == 0}
        if self.forbidden is not None:
            depth = max([len(f) for f in listed] + [2]) + 1
            if not _same_language(self.m, listed, from_matrix, depth):
                raise ValueError("transition matrix and forbidden list describe different languages")
        return listed | from_matrix


def _avoids(w, forbidden) -> bool:
    return not any(w[i:i + len(f)] == f for f in forbidden for i in range(len(w) - len(f) + 1))


def _same_language(m, first, second, depth) -> bool:
    level = [()]
    for _ in range(depth):
        level = [w + (a,) for w in level for a in range(m)]
        if any(_avoids(w, first) != _avoids(w, second) for w in level):
            return False
    return True


def _contains_forbidden_suffix(w: tuple, by_len: dict) -> bool:
    for r, fs in by_len.items():
        if r <= len(w) and w[len(w) - r:] in fs:
            return True
    return False


def build_sft(spec: SftSpec) -> SubshiftSpec:
    """Words avoiding every forbidden factor; mixing SFTs get ``G = L`` and a gap ``tau``."""
    m = spec.m
    forbidden = spec.forbidden_words()
    by_len: dict[int, set] = {}
    for f in forbidden:
        by_len.setdefault(len(f), set()).add(f)
    r = max(by_len, default=1)
    s = max(r - 1, 1)

    def admissible(w):
        w = tuple(w)
        if any(not 0 <= c < m for c in w):
            return False
        for length, fs in by_len.items():
            for i in range(len(w) - length + 1):
                if w[i:i + length] in fs:
                    return False
        return True

    def local_ok(w):
        # w grows one symbol at a time from admissible prefixes
        return not _contains_forbidden_suffix(w, by_len)

    automaton = Automaton(m, s, local_ok)
    counts = automaton.counts(CONSISTENCY_DEPTH)
    for n, c in enumerate(counts):
        if c == 0:
            raise EmptyLanguageError(f"no admissible word of length {n}")

    codes = {}
    for length, fs in by_len.items():
        powers = m ** np.arange(length - 1, -1, -1)
        codes[length] = np.sort(np.asarray([int(np.dot(f, powers)) for f in fs], dtype=np.int64))

    def extension_filter(cand):
        return kernels.forbidden_suffix_mask(cand, codes, m)

    exponent = automaton.mixing_exponent()
    forbid_str = ",".join(sorted("".join(map(str, f)) for f in forbidden))
    common = dict(
        m=m,
        admissible=admissible,
        kind="sft",
        name=f"sft-{m}[{forbid_str}]",
        extension_filter=extension_filter,
        automaton=automaton,
        params={"m": m, "forbidden": sorted(forbidden), "mixing_exponent": exponent},
    )
    if exponent is None:
        return SubshiftSpec(**common)
    tau = max(exponent, s) - s
    common["params"]["core_is_language"] = True
    common["params"]["noise_words"] = lambda n: []
    return SubshiftSpec(
        decomposition=lambda w: ((), tuple(w), ()),
        tau=tau,
        in_Cp=_empty_only,
        in_G=admissible,
        in_Cs=_empty_only,
        **common,
    )


# --- S-gap shifts ----------------------------------------------------------------------------


@dataclass(frozen=True)
class GapSet:
    """A finite set of gap lengths, optionally together with every integer ``>= tail``."""

    finite: frozenset = frozenset()
    tail: Optional[int] = None

    def __post_init__(self):
        if not self.finite and self.tail is None:
            raise ValueError("S must be nonempty")
        if any(g < 0 for g in self.finite) or (self.tail is not None and self.tail < 0):
            raise ValueError("gap lengths must be non-negative")

    def __contains__(self, g: int) -> bool:
        return g in self.finite or (self.tail is not None and g >= self.tail)

    @property
    def minimum(self) -> int:
        cands = list(self.finite) + ([self.tail] if self.tail is not None else [])
        return min(cands)

    def describe(self) -> str:
        parts = [str(g) for g in sorted(self.finite)]
        if self.tail is not None:
            parts.append(f"{self.tail}+")
        return ",".join(parts)

    @classmethod
    def parse(cls, text: str) -> "GapSet":
        finite, tail = set(), None
        for tok in text.replace(" ", "").split(","):
            if not tok:
                continue
            if tok.endswith("+"):
                tail = int(tok[:-1]) if tail is None else min(tail, int(tok[:-1]))
            else:
                finite.add(int(tok))
        return cls(frozenset(finite), tail)


def _internal_gaps(w) -> list[int]:
    ones = [i for i, c in enumerate(w) if c == 1]
    return [b - a - 1 for a, b in zip(ones, ones[1:])]


def build_s_gap(S: GapSet) -> SubshiftSpec:
    """Binary shift whose runs of 0s between consecutive 1s have lengths in ``S``."""
    if not isinstance(S, GapSet):
        S = GapSet(frozenset(S))

    def admissible(w):
        if any(c not in (0, 1) for c in w):
            return False
        return all(g in S for g in _internal_gaps(w))

    def in_G(w):
        return len(w) == 0 or (w[0] == 1 and w[-1] == 1 and admissible(w))

    def zeros_only(w):
        return all(c == 0 for c in w)

    def decomposition(w):
        w = tuple(w)
        ones = [i for i, c in enumerate(w) if c == 1]
        if not ones:
            return (), (), w
        return w[: ones[0]], w[ones[0]: ones[-1] + 1], w[ones[-1] + 1:]

    finite = np.asarray(sorted(S.finite), dtype=np.int64)
    tail = -1 if S.tail is None else S.tail

    def extension_filter(cand):
        n = cand.shape[1]
        ok = np.ones(cand.shape[0], dtype=bool)
        if n < 2:
            return ok
        body = cand[:, :-1]
        has_one = (body == 1).any(axis=1)
        last_one = n - 2 - np.argmax(body[:, ::-1] == 1, axis=1)
        gap = (n - 1) - last_one - 1
        legal = np.isin(gap, finite) | ((tail >= 0) & (gap >= tail))
        closes = (cand[:, -1] == 1) & has_one
        return ok & ~(closes & ~legal)

    return SubshiftSpec(
        m=2,
        admissible=admissible,
        kind="sgap",
        name=f"sgap[{S.describe()}]",
        decomposition=decomposition,
        tau=S.minimum,
        in_Cp=zeros_only,
        in_G=in_G,
        in_Cs=zeros_only,
        extension_filter=extension_filter,
        params={
            "S": S.describe(),
            "core_mask": lambda arr: (arr[:, 0] == 1) & (arr[:, -1] == 1),
            "noise_words": lambda n: [(0,) * n],
        },
    )


# --- structural operations ------------------------------------------------------------------


def gluing_word(shift: SubshiftSpec, u, v) -> Word:
    """Lexicographically least ``j`` in ``L_tau`` with ``u j v`` admissible."""
    if shift.tau is None or shift.in_G is None:
        raise SpecificationError(f"{shift!r} carries no specification data")
    u, v = as_word(u), as_word(v)
    for part in (u, v):
        if not shift.in_G(part):
            raise SpecificationError(f"{part} is not a core word of {shift!r}")
    if shift.tau == 0:
        if shift.admissible(u + v):
            return ()
        raise SpecificationError(f"core words {u} and {v} do not concatenate in {shift!r}")
    for j in enumerate_language(shift, shift.tau).words:
        if shift.admissible(u + j + v):
            return j
    raise SpecificationError(f"no gluing word of length {shift.tau} joins {u} and {v} in {shift!r}")


def decompose_word(shift: SubshiftSpec, w) -> tuple[Word, Word, Word]:
    """Canonical split ``w = p g s`` with maximal core, then minimal prefix part."""
    if shift.decomposition is None:
        raise SpecificationError(f"{shift!r} has no decomposition metadata")
    w = as_word(w)
    p, g, s = (tuple(x) for x in shift.decomposition(w))
    if p + g + s != w:
        raise SpecificationError(f"decomposition of {w} does not re-concatenate")
    return p, g, s


def core_mask(shift: SubshiftSpec, words: np.ndarray) -> np.ndarray:
    """``in_G`` over the rows of an array of admissible words of one length."""
    if shift.in_G is None:
        raise SpecificationError(f"{shift!r} has no core predicate")
    words = np.asarray(words, dtype=np.int64)
    if shift.params.get("core_is_language") or words.shape[1] == 0:
        return np.ones(words.shape[0], dtype=bool)
    fast = shift.params.get("core_mask")
    if fast is not None:
        return np.asarray(fast(words), dtype=bool)
    return np.fromiter((shift.in_G(tuple(int(c) for c in row)) for row in words), dtype=bool, count=words.shape[0])


def in_filtration(shift: SubshiftSpec, w, M: int) -> bool:
    """Membership in ``G(M)``: admissible words whose noise parts have length at most ``M``."""
    p, _, s = decompose_word(shift, w)
    return len(p) <= M and len(s) <= M
