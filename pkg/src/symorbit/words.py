"""Finite words, lexicographic order, language enumeration and factor counting.

A word is a plain ``tuple`` of ints in ``range(m)``. Enumerated languages are
kept as 2-d ``int64`` arrays, one word per row, in lexicographic order.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from . import kernels
from .errors import AlphabetMismatchError, CapExceededError

if TYPE_CHECKING:
    from .shifts import SubshiftSpec

Word = tuple  # tuple[int, ...]

DEFAULT_WORD_CAP = 10**7
CAP_ENV = "SYMORBIT_WORD_CAP"


def word_cap():
    """The enumeration cap, honouring the ``SYMORBIT_WORD_CAP`` override."""
    raw = os.environ.get(CAP_ENV)
    return int(raw) if raw else DEFAULT_WORD_CAP


def as_word(w) -> Word:
    """Coerce a digit string, array or iterable of ints into a word."""
    if isinstance(w, tuple):
        return w
    if isinstance(w, str):
        return tuple(int(c) for c in w)
    return tuple(int(c) for c in w)


def word_str(w: Sequence[int]) -> str:
    return "".join(str(int(c)) for c in w)


def check_alphabet(w: Sequence[int], m: int) -> None:
    for c in w:
        if not 0 <= c < m:
            raise AlphabetMismatchError(f"symbol {c} outside alphabet of size {m}")


def lex_compare(u: Sequence[int], v: Sequence[int], m: int | None = None) -> int:
    """Three-way lexicographic comparison: -1, 0 or 1.

    A proper prefix compares less than its extensions.
    """
    if m is not None:
        check_alphabet(u, m)
        check_alphabet(v, m)
    for a, b in zip(u, v):
        if a != b:
            return -1 if a < b else 1
    if len(u) == len(v):
        return 0
    return -1 if len(u) < len(v) else 1


def is_prefix(u: Sequence[int], v: Sequence[int]) -> bool:
    return len(u) <= len(v) and tuple(v[: len(u)]) == tuple(u)


@dataclass(frozen=True)
class LanguageSlice:
    """The admissible words of one length, sorted ascending."""

    n: int
    array: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return int(self.array.shape[0])

    @property
    def words(self) -> list:
        return [tuple(int(c) for c in row) for row in self.array]

    def __len__(self):
        return self.count

    def __iter__(self):
        return iter(self.words)


def _extend(shift: SubshiftSpec, prev: np.ndarray, cap: int) -> np.ndarray:
    m = shift.m
    nprev, n = prev.shape
    if nprev * m > 8 * cap:
        raise CapExceededError(f"extension to length {n + 1} would examine {nprev * m} candidates (cap {cap})")
    cand = np.empty((nprev * m, n + 1), dtype=np.int64)
    cand[:, :n] = np.repeat(prev, m, axis=0)
    cand[:, n] = np.tile(np.arange(m, dtype=np.int64), nprev)
    if shift.extension_filter is not None:
        mask = shift.extension_filter(cand)
    else:
        mask = np.fromiter((shift.admissible(tuple(int(c) for c in row)) for row in cand), dtype=bool, count=cand.shape[0])
    out = cand[mask]
    if out.shape[0] > cap:
        raise CapExceededError(f"language slice of length {n + 1} has {out.shape[0]} words, above the cap {cap}")
    return out


def enumerate_language(shift: SubshiftSpec, n: int, cap: int | None = None) -> LanguageSlice:
    """All admissible words of length ``n``, grown by prefix extension.

    Slices are memoised on the shift, so repeated calls for increasing ``n``
    only pay for the new levels.
    """
    if n < 0:
        raise ValueError("length must be non-negative")
    cap = word_cap() if cap is None else cap
    levels = shift._levels
    with shift._lock:
        if not levels:
            levels.append(np.zeros((1, 0), dtype=np.int64))
        while len(levels) <= n:
            levels.append(_extend(shift, levels[-1], cap))
        arr = levels[n]
    if arr.shape[0] > cap:
        raise CapExceededError(f"language slice of length {n} has {arr.shape[0]} words, above the cap {cap}")
    arr.setflags(write=False)
    return LanguageSlice(n, arr)


def language_counts(shift: SubshiftSpec, n_max: int, cap: int | None = None) -> list[int]:
    """``[#L_0, #L_1, ..., #L_{n_max}]``; uses the shift's counting automaton when present."""
    if shift.automaton is not None:
        return shift.automaton.counts(n_max)
    return [enumerate_language(shift, n, cap).count for n in range(n_max + 1)]


def complexity_function(prefix: Sequence[int] | np.ndarray, n: int, m: int | None = None) -> int:
    """Distinct length-``n`` factors of a finite prefix.

    This is a lower bound for the complexity of any infinite word with this
    prefix; it can only grow as the prefix is lengthened.
    """
    seq = np.asarray(prefix, dtype=np.int64)
    if n > seq.shape[0]:
        raise ValueError(f"block length {n} exceeds prefix length {seq.shape[0]}")
    if m is None:
        m = int(seq.max()) + 1 if seq.size else 1
    return kernels.distinct_factor_count(seq, n, max(m, 2))


def complexity_table(prefix, n_max: int, m: int | None = None) -> list[int]:
    seq = np.asarray(prefix, dtype=np.int64)
    return [complexity_function(seq, n, m) for n in range(1, n_max + 1)]


def words_array(words: Iterable[Sequence[int]], n: int) -> np.ndarray:
    rows = [tuple(w) for w in words]
    if not rows:
        return np.zeros((0, n), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), n)
