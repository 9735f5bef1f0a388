import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from somepairs import _accel


def _brute_max_cover(adj, s, t, start, count):
    best, rank = -1, start
    for r, S in enumerate(combinations(range(adj.shape[0]), s)):
        if not start <= r < start + count:
            continue
        col = adj[list(S)].sum(axis=0)
        val = int(np.sort(col)[::-1][:t].sum())
        if val > best:
            best, rank = val, r
    return best, rank


@pytest.mark.parametrize("n,k", [(5, 2), (6, 3), (7, 1), (4, 4)])
def test_unrank_matches_itertools(n, k):
    combos = list(combinations(range(n), k))
    for r, c in enumerate(combos):
        assert tuple(_accel.unrank_combination(r, n, k)) == c


def test_binomial_table():
    t = _accel.binomial_table(10, 4)
    assert t[10, 4] == 210 and t[3, 4] == 0 and t[0, 0] == 1


@settings(max_examples=40, deadline=None)
@given(
    n_x=st.integers(1, 7),
    n_y=st.integers(1, 7),
    data=st.data(),
)
def test_max_cover_backends_agree_with_brute_force(n_x, n_y, data):
    adj = np.array(
        data.draw(st.lists(st.lists(st.integers(0, 1), min_size=n_y, max_size=n_y),
                           min_size=n_x, max_size=n_x)),
        dtype=np.int64,
    )
    s = data.draw(st.integers(1, n_x))
    t = data.draw(st.integers(1, n_y))
    total = math.comb(n_x, s)
    start = data.draw(st.integers(0, total - 1))
    count = data.draw(st.integers(1, total - start))
    expected = _brute_max_cover(adj, s, t, start, count)
    for backend in _accel.available_backends():
        assert _accel.max_cover(adj, s, t, start, count, backend=backend) == expected


def _csr(sets):
    ptr = np.zeros(len(sets) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(s) for s in sets])
    idx = np.array([i for s in sets for i in s], dtype=np.int64)
    return ptr, idx


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_cover_counts_backends_agree(data):
    n_x = data.draw(st.integers(1, 6))
    n_y = data.draw(st.integers(1, 6))
    edges = sorted(data.draw(st.sets(st.tuples(st.integers(0, n_x - 1), st.integers(0, n_y - 1)))))
    reducers = data.draw(st.lists(
        st.tuples(st.sets(st.integers(0, n_x - 1)), st.sets(st.integers(0, n_y - 1))),
        max_size=6,
    ))
    expected = [sum(1 for xs, ys in reducers if u in xs and v in ys) for u, v in edges]
    x_ptr, x_idx = _csr([sorted(r[0]) for r in reducers])
    y_ptr, y_idx = _csr([sorted(r[1]) for r in reducers])
    codes = np.array([u * n_y + v for u, v in edges], dtype=np.int64)
    for backend in _accel.available_backends():
        got = _accel.cover_counts(x_ptr, x_idx, y_ptr, y_idx, codes, n_y, backend=backend)
        assert got.tolist() == expected


def test_cover_counts_numpy_chunking(monkeypatch):
    # force many small windows through the numpy path
    monkeypatch.setattr(_accel, "_PAIR_CHUNK", 3)
    x_ptr, x_idx = _csr([[0, 1], [1, 2], [0], [2]])
    y_ptr, y_idx = _csr([[0, 1], [2], [0, 1, 2], [1]])
    codes = np.array([0 * 3 + 0, 1 * 3 + 2, 2 * 3 + 1], dtype=np.int64)
    assert _accel.cover_counts(x_ptr, x_idx, y_ptr, y_idx, codes, 3, backend="numpy").tolist() == [2, 1, 1]


def test_backend_env_flag(monkeypatch):
    monkeypatch.setenv("SOMEPAIRS_BACKEND", "numpy")
    assert _accel._resolve_backend() == "numpy"
    monkeypatch.setenv("SOMEPAIRS_BACKEND", "fortran")
    with pytest.raises(ValueError):
        _accel._resolve_backend()
