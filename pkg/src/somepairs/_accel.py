"""Hot kernels: edge coverage by reducers, and max coverage over subset pairs.

Each kernel has a numba implementation and a pure-numpy one. The active
backend is picked once at import from ``SOMEPAIRS_BACKEND`` (``numba`` or
``numpy``); ``numba`` is the default when it imports cleanly. Every public
kernel also takes ``backend=`` so tests and the benchmark can run both.
"""

from __future__ import annotations

import itertools
import math
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

_PAIR_CHUNK = 1 << 22
_COMBO_CHUNK = 1 << 15


def _resolve_backend() -> str:
    want = os.environ.get("SOMEPAIRS_BACKEND", "").strip().lower()
    if want in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if want not in ("numba", "numpy"):
        raise ValueError(f"SOMEPAIRS_BACKEND must be 'numba' or 'numpy', got {want!r}")
    if want == "numba" and not HAVE_NUMBA:
        raise ImportError("SOMEPAIRS_BACKEND=numba but numba is not importable")
    return want


BACKEND = _resolve_backend()


def available_backends() -> list[str]:
    return ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]


def _pick(backend: str | None) -> str:
    backend = backend or BACKEND
    if backend == "numba" and not HAVE_NUMBA:
        raise ImportError("numba backend requested but numba is not importable")
    return backend


def binomial_table(n: int, k: int) -> np.ndarray:
    """``table[i, j] = C(i, j)`` for ``0 <= i <= n``, ``0 <= j <= k``."""
    table = np.zeros((n + 1, k + 1), dtype=np.int64)
    for i in range(n + 1):
        for j in range(min(i, k) + 1):
            table[i, j] = math.comb(i, j)
    return table


def unrank_combination(rank: int, n: int, k: int) -> list[int]:
    """The ``rank``-th k-subset of ``range(n)`` in lexicographic order."""
    out = []
    x = 0
    for i in range(k):
        while True:
            c = math.comb(n - x - 1, k - i - 1)
            if rank < c:
                break
            rank -= c
            x += 1
        out.append(x)
        x += 1
    return out


# --------------------------------------------------------------------------
# numpy implementations


def _segment_arange(lengths: np.ndarray) -> np.ndarray:
    # concat(arange(l) for l in lengths)
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.cumsum(lengths) - lengths
    return np.arange(total, dtype=np.int64) - np.repeat(starts, lengths)


def _cover_counts_numpy(x_ptr, x_idx, y_ptr, y_idx, edge_codes, n_y):
    counts = np.zeros(edge_codes.shape[0], dtype=np.int64)
    p = x_ptr.shape[0] - 1
    if p == 0 or edge_codes.shape[0] == 0:
        return counts
    a = np.diff(x_ptr)
    b = np.diff(y_ptr)
    pairs = a * b
    lo = 0
    while lo < p:
        # grow the reducer window until it holds ~_PAIR_CHUNK pairs
        acc = np.cumsum(pairs[lo:])
        hi = lo + max(1, int(np.searchsorted(acc, _PAIR_CHUNK, side="right")))
        r_of_x = np.repeat(np.arange(lo, hi), a[lo:hi])
        xs = x_idx[x_ptr[lo]:x_ptr[hi]]
        reps = b[r_of_x]
        x_rep = np.repeat(xs, reps)
        y_pos = np.repeat(y_ptr[r_of_x], reps) + _segment_arange(reps)
        codes = x_rep * n_y + y_idx[y_pos]
        pos = np.searchsorted(edge_codes, codes)
        pos_ok = pos < edge_codes.shape[0]
        hit = np.zeros(codes.shape[0], dtype=bool)
        hit[pos_ok] = edge_codes[pos[pos_ok]] == codes[pos_ok]
        counts += np.bincount(pos[hit], minlength=edge_codes.shape[0])
        lo = hi
    return counts


def _combo_chunks(n, k, start, count):
    it = itertools.islice(itertools.combinations(range(n), k), start, start + count)
    while True:
        block = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, _COMBO_CHUNK)),
                            dtype=np.int64)
        if block.size == 0:
            return
        yield block.reshape(-1, k)


def _max_cover_numpy(adj, s, t, start, count):
    n_x, n_y = adj.shape
    best, best_rank = -1, start
    offset = start
    adj = adj.astype(np.int64)
    for combos in _combo_chunks(n_x, s, start, count):
        cols = adj[combos].sum(axis=1)
        if t < n_y:
            top = np.partition(cols, n_y - t, axis=1)[:, n_y - t:]
        else:
            top = cols
        vals = top.sum(axis=1)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_rank = int(vals[i]), offset + i
        offset += combos.shape[0]
    return best, best_rank


# --------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _cover_counts_nb(x_ptr, x_idx, y_ptr, y_idx, edge_codes, n_y):
        m = edge_codes.shape[0]
        counts = np.zeros(m, dtype=np.int64)
        if m == 0:
            return counts
        p = x_ptr.shape[0] - 1
        for r in range(p):
            for i in range(x_ptr[r], x_ptr[r + 1]):
                base = x_idx[i] * n_y
                for j in range(y_ptr[r], y_ptr[r + 1]):
                    code = base + y_idx[j]
                    pos = np.searchsorted(edge_codes, code)
                    if pos < m and edge_codes[pos] == code:
                        counts[pos] += 1
        return counts

    @njit(cache=True, nogil=True)
    def _max_cover_nb(adj, s, t, start, count, binom):
        n_x = adj.shape[0]
        n_y = adj.shape[1]
        comb = np.empty(s, dtype=np.int64)
        # unrank start
        rank = start
        x = 0
        for i in range(s):
            while True:
                c = binom[n_x - x - 1, s - i - 1]
                if rank < c:
                    break
                rank -= c
                x += 1
            comb[i] = x
            x += 1
        col = np.zeros(n_y, dtype=np.int64)
        hist = np.zeros(s + 1, dtype=np.int64)
        best = -1
        best_rank = start
        for it in range(count):
            col[:] = 0
            for i in range(s):
                row = comb[i]
                for j in range(n_y):
                    col[j] += adj[row, j]
            # column sums are in [0, s]; counting sort gives the exact top-t sum
            hist[:] = 0
            for j in range(n_y):
                hist[col[j]] += 1
            need = t
            val = 0
            v = s
            while need > 0 and v > 0:
                take = hist[v] if hist[v] < need else need
                val += take * v
                need -= take
                v -= 1
            if val > best:
                best = val
                best_rank = start + it
            # next combination in lexicographic order
            i = s - 1
            while i >= 0 and comb[i] == n_x - s + i:
                i -= 1
            if i < 0:
                break
            comb[i] += 1
            for j in range(i + 1, s):
                comb[j] = comb[j - 1] + 1
        return best, best_rank


# --------------------------------------------------------------------------
# public dispatch


def cover_counts(x_ptr, x_idx, y_ptr, y_idx, edge_codes, n_y, backend=None) -> np.ndarray:
    """Number of reducers covering each edge.

    Reducers are given in CSR form (``x_ptr``/``x_idx`` and ``y_ptr``/``y_idx``).
    ``edge_codes`` holds ``x * n_y + y`` for every edge, sorted ascending.
    """
    args = (
        np.ascontiguousarray(x_ptr, dtype=np.int64),
        np.ascontiguousarray(x_idx, dtype=np.int64),
        np.ascontiguousarray(y_ptr, dtype=np.int64),
        np.ascontiguousarray(y_idx, dtype=np.int64),
        np.ascontiguousarray(edge_codes, dtype=np.int64),
        int(n_y),
    )
    if _pick(backend) == "numba":
        return _cover_counts_nb(*args)
    return _cover_counts_numpy(*args)


def max_cover(adj, s: int, t: int, start: int, count: int, backend=None) -> tuple[int, int]:
    """Max over S (lexicographic ranks ``start .. start+count-1`` of s-subsets
    of rows) of the sum of the t largest column sums of ``adj[S]``.

    Returns ``(best, rank of the first S reaching it)``.
    """
    adj = np.ascontiguousarray(adj, dtype=np.int64)
    if count <= 0:
        return -1, start
    if s == 0:
        return 0, start
    if _pick(backend) == "numba":
        binom = binomial_table(adj.shape[0], s)
        best, rank = _max_cover_nb(adj, int(s), int(t), int(start), int(count), binom)
        return int(best), int(rank)
    return _max_cover_numpy(adj, int(s), int(t), int(start), int(count))

