"""Beta-expansions and the beta-shift.

Every floor taken here is certified: ``beta`` is an integer, a rational, an
exact quadratic irrational, or a rational interval whose floors are only
accepted when the whole interval agrees.
"""
from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import kernels
from .errors import PrecisionError, SpecificationError
from .exact import GOLDEN, QuadNumber, RationalInterval, certainly_equal, parse_decimal_interval, sign
from .shifts import SubshiftSpec, build_full_shift
from .words import Word, as_word

DEFAULT_FULL_DEPTH = 64
MAX_GREEDY_DEPTH = 4096


class DepthLimitedWarning(UserWarning):
    """A verdict relied on a finite prefix of a non-periodic expansion of 1."""


@dataclass(frozen=True)
class BetaDigits:
    digits: tuple
    finite: bool
    preperiod: Optional[int] = None
    period: Optional[int] = None

    @property
    def periodic(self) -> bool:
        return self.period is not None

    def __str__(self):
        body = "".join(map(str, self.digits))
        if self.period is not None and not self.finite:
            pre, per = self.preperiod or 0, self.period
            return "".join(map(str, self.digits[:pre])) + "(" + "".join(map(str, self.digits[pre:pre + per])) + ")^inf"
        return body


class BetaSpec:
    """A real ``beta > 1`` held in a form that supports certified floors.

    ``value`` is an ``int``, a ``Fraction``, a :class:`QuadNumber` or a
    :class:`RationalInterval`. ``label`` is the config-grammar spelling.
    """

    def __init__(self, value, label: str | None = None):
        if isinstance(value, float):
            raise TypeError("beta must be exact; use Fraction, QuadNumber or RationalInterval")
        if isinstance(value, Fraction) and value.denominator == 1:
            value = int(value)
        if isinstance(value, RationalInterval):
            if value.lo <= 1:
                raise ValueError("beta must exceed 1")
        elif not value > 1:
            raise ValueError("beta must exceed 1")
        self.value = value
        self.label = label or _default_label(value)
        self._digits: list[int] = []
        self._rems: list = [Fraction(1)]
        self._seen: dict = {}
        self._finite = False
        self._cycle: Optional[tuple[int, int]] = None
        self._lock = threading.Lock()
        self._m: Optional[int] = None
        self._dstar_cache = np.zeros(0, dtype=np.int64)

    # construction helpers
    @classmethod
    def golden(cls):
        return cls(GOLDEN, "golden")

    @classmethod
    def integer(cls, k: int):
        return cls(int(k), f"integer:{int(k)}")

    @classmethod
    def quadratic(cls, a: int, b: int, c: int, d: int):
        return cls(QuadNumber.from_parts(a, b, c, d), f"quadratic:{a},{b},{c},{d}")

    @classmethod
    def rational(cls, q):
        q = Fraction(q)
        return cls(q, f"rational:{q}")

    @classmethod
    def decimal(cls, text: str, digits: int):
        return cls(parse_decimal_interval(text, digits), f"decimal:{text}@{digits}")

    @classmethod
    def parse(cls, text: str) -> "BetaSpec":
        """``golden``, ``integer:K``, ``quadratic:a,b,c,d``, ``rational:p/q``, ``decimal:s@digits`` or a bare rational."""
        text = text.strip()
        if text == "golden":
            return cls.golden()
        kind, _, arg = text.partition(":")
        if kind == "integer":
            return cls.integer(int(arg))
        if kind == "quadratic":
            a, b, c, d = (int(t) for t in arg.split(","))
            if c == 0:
                raise ValueError("quadratic denominator must be nonzero")
            return cls.quadratic(a, b, c, d)
        if kind == "rational":
            return cls.rational(arg)
        if kind == "decimal":
            lit, _, prec = arg.partition("@")
            return cls.decimal(lit, int(prec) if prec else 30)
        if not arg:
            # a bare number is read as an exact rational
            try:
                q = Fraction(text)
            except ValueError:
                q = None
            if q is not None:
                return cls.integer(int(q)) if q.denominator == 1 and q > 1 else cls.rational(q)
        raise ValueError(f"unrecognised beta {text!r}")

    @property
    def is_integer(self) -> bool:
        return isinstance(self.value, int)

    @property
    def m(self) -> int:
        """Alphabet size ``ceil(beta)`` (``beta`` itself when integral)."""
        if self._m is None:
            if self.is_integer:
                self._m = self.value
            else:
                f = math.floor(self.value)
                exact_int = not isinstance(self.value, RationalInterval) and self.value == f
                self._m = f if exact_int else f + 1
        return self._m

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return f"BetaSpec({self.label})"

    # greedy recursion on 1 ----------------------------------------------------
    def _grow(self, depth: int) -> None:
        with self._lock:
            while len(self._digits) < depth and not self._finite and self._cycle is None:
                if len(self._digits) >= MAX_GREEDY_DEPTH:
                    raise PrecisionError("greedy expansion depth budget exhausted")
                y = self.value * self._rems[-1]
                d = math.floor(y)
                r = y - d
                self._digits.append(int(d))
                self._rems.append(r)
                if sign(r) == 0:
                    self._finite = True
                    break
                if not isinstance(r, RationalInterval):
                    k = len(self._digits)
                    prev = self._seen.get(r)
                    if prev is not None:
                        self._cycle = (prev, k - prev)
                        break
                    self._seen[r] = k

    def greedy_digit(self, n: int) -> int:
        """``n``-th greedy digit of 1 (1-based), extending periodic expansions."""
        self._grow(n)
        if n <= len(self._digits):
            return self._digits[n - 1]
        if self._finite:
            return 0
        pre, per = self._cycle
        return self._digits[pre + (n - 1 - pre) % per]

    def expansion_of_one(self, depth: int) -> BetaDigits:
        if depth < 1:
            raise ValueError("depth must be positive")
        if self.is_integer:
            return BetaDigits((self.value,), True, 0, None)
        self._grow(depth)
        if self._finite:
            return BetaDigits(tuple(self._digits), True)
        digits = tuple(self.greedy_digit(i) for i in range(1, depth + 1))
        if self._cycle is not None:
            return BetaDigits(digits, False, self._cycle[0], self._cycle[1])
        return BetaDigits(digits, False)

    def quasi_greedy_expansion(self, depth: int) -> BetaDigits:
        if depth < 1:
            raise ValueError("depth must be positive")
        if self.is_integer:
            return BetaDigits(tuple([self.value - 1] * depth), False, 0, 1)
        self._grow(depth)
        if self._finite:
            block = list(self._digits)
            block[-1] -= 1
            period = len(block)
            digits = tuple(block[i % period] for i in range(depth))
            return BetaDigits(digits, False, 0, period)
        return self.expansion_of_one(depth)

    def dstar(self, n: int) -> np.ndarray:
        """First ``n`` digits of the quasi-greedy expansion of 1 as an array."""
        if n == 0:
            return np.zeros(0, dtype=np.int64)
        cached = self._dstar_cache
        if cached.shape[0] < n:
            grow = max(n, 2 * cached.shape[0], 32)
            cached = np.asarray(self.quasi_greedy_expansion(grow).digits, dtype=np.int64)
            cached.setflags(write=False)
            self._dstar_cache = cached
        return cached[:n]

    def dstar_period(self) -> Optional[tuple[int, int]]:
        """``(preperiod, period)`` of the quasi-greedy expansion when known."""
        if self.is_integer:
            return 0, 1
        q = self.quasi_greedy_expansion(1)
        if q.period is None:
            # force a little more of the recursion before giving up
            q = self.quasi_greedy_expansion(DEFAULT_FULL_DEPTH)
        return (q.preperiod or 0, q.period) if q.period is not None else None


def _default_label(value) -> str:
    if isinstance(value, int):
        return f"integer:{value}"
    if isinstance(value, Fraction):
        return f"rational:{value}"
    return repr(value)


def expansion_of_one(beta: BetaSpec, depth: int) -> BetaDigits:
    return beta.expansion_of_one(depth)


def quasi_greedy_expansion(beta: BetaSpec, depth: int) -> BetaDigits:
    return beta.quasi_greedy_expansion(depth)


def is_admissible_beta(beta: BetaSpec, w) -> bool:
    """Parry's criterion: every suffix is lexicographically at most the matching prefix of ``d*``."""
    if not len(w):
        return True
    arr = np.asarray(w, dtype=np.int64)
    if arr.min() < 0 or arr.max() >= beta.m:
        return False
    if beta.is_integer:
        return True
    return bool(kernels.parry_admissible_mask(arr[None, :], beta.dstar(arr.shape[0]))[0])


def full_word_verdict(beta: BetaSpec, w, depth: int = DEFAULT_FULL_DEPTH) -> tuple[bool, bool]:
    """``(is_full, certain)`` for an admissible word.

    ``w`` is full iff ``w`` followed by the whole of ``d*`` stays admissible;
    with an eventually periodic ``d*`` that is decided on ``preperiod + period``
    extra symbols, otherwise on ``depth`` symbols and marked uncertain.
    """
    w = as_word(w)
    if not is_admissible_beta(beta, w):
        raise ValueError(f"{w} is not admissible for {beta!r}")
    if beta.is_integer or not w:
        return True, True
    per = beta.dstar_period()
    extra = per[0] + per[1] if per is not None else depth
    tail = tuple(int(c) for c in beta.dstar(extra))
    return is_admissible_beta(beta, w + tail), per is not None


def is_full_word(beta: BetaSpec, w, depth: int = DEFAULT_FULL_DEPTH) -> bool:
    full, certain = full_word_verdict(beta, w, depth)
    if not certain:
        warnings.warn(f"full-word verdict for {w} is depth-limited ({depth})", DepthLimitedWarning, stacklevel=2)
    return full


def is_dstar_prefix(beta: BetaSpec, w) -> bool:
    w = as_word(w)
    if not w:
        return True
    return tuple(int(c) for c in beta.dstar(len(w))) == w


def build_beta_shift(beta: BetaSpec) -> SubshiftSpec:
    """The beta-shift with core ``G`` = full words, suffix part = prefixes of ``d*``, ``tau = 0``."""
    if beta.is_integer:
        base = build_full_shift(beta.value)
        return SubshiftSpec(
            m=base.m,
            admissible=base.admissible,
            kind="beta",
            name=f"beta[{beta.label}]",
            decomposition=base.decomposition,
            tau=0,
            in_Cp=base.in_Cp,
            in_G=base.in_G,
            in_Cs=base.in_Cs,
            extension_filter=base.extension_filter,
            automaton=base.automaton,
            params={"beta": beta, "core_is_language": True, "noise_words": lambda n: []},
        )

    def admissible(w):
        return is_admissible_beta(beta, w)

    full_cache: dict = {}

    def in_G(w):
        w = tuple(w)
        if w not in full_cache:
            full_cache[w] = admissible(w) and full_word_verdict(beta, w)[0]
        return full_cache[w]

    def in_Cs(w):
        return is_dstar_prefix(beta, w)

    def decomposition(w):
        w = tuple(w)
        for k in range(len(w), -1, -1):
            if is_dstar_prefix(beta, w[k:]) and in_G(w[:k]):
                return (), w[:k], w[k:]
        raise SpecificationError(f"{w} admits no full-word / d*-prefix split")

    def extension_filter(cand):
        return kernels.parry_admissible_mask(cand, beta.dstar(cand.shape[1]))

    def fast_core(arr):
        per = beta.dstar_period()
        if per is None:
            return np.fromiter((in_G(tuple(int(c) for c in row)) for row in arr), dtype=bool, count=arr.shape[0])
        extra = per[0] + per[1]
        tail = np.broadcast_to(beta.dstar(extra), (arr.shape[0], extra))
        joined = np.concatenate([arr, tail], axis=1)
        return kernels.parry_admissible_mask(joined, beta.dstar(joined.shape[1]))

    return SubshiftSpec(
        m=beta.m,
        admissible=admissible,
        kind="beta",
        name=f"beta[{beta.label}]",
        decomposition=decomposition,
        tau=0,
        in_Cp=lambda w: len(w) == 0,
        in_G=in_G,
        in_Cs=in_Cs,
        extension_filter=extension_filter,
        params={
            "beta": beta,
            "core_mask": fast_core,
            "noise_words": lambda n: [tuple(int(c) for c in beta.dstar(n))],
        },
    )


def beta_digits_of_real(x, beta: BetaSpec, n: int) -> Word:
    """First ``n`` greedy digits of ``x`` in base ``beta``, ``d_k = floor(beta * T^{k-1} x)``."""
    x = Fraction(x)
    if not 0 <= x < 1:
        raise ValueError("x must lie in [0, 1)")
    out = []
    y = x
    for _ in range(n):
        z = beta.value * y
        d = int(math.floor(z))
        out.append(d)
        y = z - d
    return tuple(out)
