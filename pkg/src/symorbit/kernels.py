"""Hot numeric loops.

Every kernel has two implementations: an explicit-loop version compiled with
numba (``*_loop``) and a vectorised numpy version (``*_numpy``). The public
names dispatch to the loop version when numba is active and to the numpy
version otherwise, see :mod:`symorbit._accel`.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit

__all__ = [
    "parry_admissible_mask",
    "window_codes",
    "distinct_factor_count",
    "walk_log_sums",
    "forbidden_suffix_mask",
]


# --- Parry lexicographic admissibility -------------------------------------------


@njit
def _parry_mask_loop(words, dstar):
    nwords, n = words.shape
    out = np.ones(nwords, dtype=np.bool_)
    for r in range(nwords):
        ok = True
        for k in range(n):
            for j in range(n - k):
                a = words[r, k + j]
                b = dstar[j]
                if a < b:
                    break
                if a > b:
                    ok = False
                    break
            if not ok:
                break
        out[r] = ok
    return out


def _parry_mask_numpy(words, dstar):
    words = np.asarray(words)
    nwords, n = words.shape
    out = np.ones(nwords, dtype=bool)
    if n == 0 or nwords == 0:
        return out
    rows = np.arange(nwords)
    for k in range(n):
        block = words[:, k:]
        ref = dstar[: n - k]
        diff = block != ref
        has = diff.any(axis=1)
        first = diff.argmax(axis=1)
        greater = block[rows, first] > ref[first]
        out &= ~(has & greater)
    return out


def parry_admissible_mask(words, dstar):
    """Rows of ``words`` whose every suffix is lexicographically <= the same-length prefix of ``dstar``."""
    words = np.ascontiguousarray(words, dtype=np.int64)
    dstar = np.ascontiguousarray(dstar, dtype=np.int64)
    if words.ndim != 2:
        raise ValueError("words must be a 2-d array")
    if dstar.shape[0] < words.shape[1]:
        raise ValueError("dstar prefix shorter than the words being checked")
    if HAVE_NUMBA:
        return _parry_mask_loop(words, dstar)
    return _parry_mask_numpy(words, dstar)


# --- factor counting --------------------------------------------------------------


@njit
def _window_codes_loop(seq, n, m):
    count = seq.shape[0] - n + 1
    out = np.empty(max(count, 0), dtype=np.int64)
    if count <= 0:
        return out
    top = 1
    for _ in range(n - 1):
        top *= m
    code = 0
    for i in range(n):
        code = code * m + seq[i]
    out[0] = code
    for i in range(1, count):
        code = (code - seq[i - 1] * top) * m + seq[i + n - 1]
        out[i] = code
    return out


def _window_codes_numpy(seq, n, m):
    if seq.shape[0] < n:
        return np.empty(0, dtype=np.int64)
    if n == 0:
        return np.zeros(seq.shape[0] + 1, dtype=np.int64)
    windows = np.lib.stride_tricks.sliding_window_view(seq, n)
    powers = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return windows @ powers


def _fits_int64(n, m):
    return n * np.log2(max(m, 2)) < 62


def window_codes(seq, n, m):
    """Base-``m`` integer code of every length-``n`` window of ``seq``."""
    seq = np.ascontiguousarray(seq, dtype=np.int64)
    if not _fits_int64(n, m):
        raise OverflowError(f"windows of length {n} over {m} symbols do not fit in int64 codes")
    if HAVE_NUMBA:
        return _window_codes_loop(seq, n, m)
    return _window_codes_numpy(seq, n, m)


@njit
def _count_sorted_unique(codes):
    if codes.shape[0] == 0:
        return 0
    total = 1
    for i in range(1, codes.shape[0]):
        if codes[i] != codes[i - 1]:
            total += 1
    return total


def distinct_factor_count(seq, n, m):
    """Number of distinct length-``n`` factors of the finite sequence ``seq``."""
    seq = np.ascontiguousarray(seq, dtype=np.int64)
    if n > seq.shape[0]:
        raise ValueError(f"block length {n} exceeds sequence length {seq.shape[0]}")
    if n == 0:
        return 1
    if not _fits_int64(n, m):
        # long windows: hash the raw bytes instead of packing codes
        raw = seq.astype(np.uint8 if m <= 256 else np.int64).tobytes()
        width = 1 if m <= 256 else 8
        return len({raw[i * width:(i + n) * width] for i in range(seq.shape[0] - n + 1)})
    codes = window_codes(seq, n, m)
    if HAVE_NUMBA:
        return int(_count_sorted_unique(np.sort(codes)))
    return int(np.unique(codes).shape[0])


# --- weighted walks on a finite graph ----------------------------------------------


@njit
def _walk_log_sums_loop(init, src, dst, factor, final, steps):
    nstates = init.shape[0]
    out = np.empty(steps + 1, dtype=np.float64)
    vec = init.copy()
    logscale = 0.0
    for t in range(steps + 1):
        if t > 0:
            new = np.zeros(nstates, dtype=np.float64)
            for e in range(src.shape[0]):
                new[dst[e]] += vec[src[e]] * factor[e]
            peak = 0.0
            for s in range(nstates):
                if new[s] > peak:
                    peak = new[s]
            if peak > 0.0:
                for s in range(nstates):
                    new[s] /= peak
                logscale += np.log(peak)
            vec = new
        total = 0.0
        for s in range(nstates):
            total += vec[s] * final[s]
        if total > 0.0:
            out[t] = np.log(total) + logscale
        else:
            out[t] = -np.inf
    return out


def _walk_log_sums_numpy(init, src, dst, factor, final, steps):
    out = np.empty(steps + 1)
    vec = init.astype(float).copy()
    logscale = 0.0
    for t in range(steps + 1):
        if t > 0:
            new = np.zeros_like(vec)
            np.add.at(new, dst, vec[src] * factor)
            peak = new.max(initial=0.0)
            if peak > 0.0:
                new /= peak
                logscale += np.log(peak)
            vec = new
        total = float(vec @ final)
        out[t] = np.log(total) + logscale if total > 0.0 else -np.inf
    return out


def walk_log_sums(init, src, dst, factor, final, steps):
    """``log(init @ M**t @ final)`` for ``t = 0..steps`` with ``M`` given as weighted edges.

    Vectors are renormalised at every step so long walks do not overflow.
    """
    init = np.ascontiguousarray(init, dtype=np.float64)
    src = np.ascontiguousarray(src, dtype=np.int64)
    dst = np.ascontiguousarray(dst, dtype=np.int64)
    factor = np.ascontiguousarray(factor, dtype=np.float64)
    final = np.ascontiguousarray(final, dtype=np.float64)
    if HAVE_NUMBA:
        return _walk_log_sums_loop(init, src, dst, factor, final, int(steps))
    return _walk_log_sums_numpy(init, src, dst, factor, final, int(steps))


# --- SFT extension filter ------------------------------------------------------------


def forbidden_suffix_mask(words, forbidden_codes, m):
    """Rows of ``words`` none of whose suffixes is a forbidden word.

    ``forbidden_codes`` maps a length ``r`` to a sorted int64 array of codes.
    Used during prefix extension, where only the windows ending at the new
    symbol can introduce a forbidden factor.
    """
    words = np.asarray(words, dtype=np.int64)
    nwords, n = words.shape
    ok = np.ones(nwords, dtype=bool)
    for r, codes in forbidden_codes.items():
        if r > n or codes.shape[0] == 0:
            continue
        powers = m ** np.arange(r - 1, -1, -1, dtype=np.int64)
        tail = words[:, n - r:] @ powers
        ok &= ~np.isin(tail, codes)
    return ok
