"""Independent reference implementations used to freeze expected values.

Everything here works on plain Python strings, tuples and sets so it shares
no code path with the numpy/numba implementations under test.
"""

from itertools import combinations, product


def cube(b):
    return ["".join(bits) for bits in product("01", repeat=b)]


def hd1_pairs(b):
    out = set()
    for x in cube(b):
        for y in cube(b):
            if sum(c1 != c2 for c1, c2 in zip(x, y)) == 1:
                out.add((int(x, 2), int(y, 2)))
    return out


def hd1_up_pairs(b):
    out = set()
    for x in cube(b):
        for i, c in enumerate(x):
            if c == "0":
                y = x[:i] + "1" + x[i + 1:]
                out.add((int(x, 2), int(y, 2)))
    return out


def covered(edges, S, T):
    S, T = set(S), set(T)
    return sum(1 for u, v in edges if u in S and v in T)


def phi_exhaustive(edges, n_x, n_y, q):
    best = 0
    for S in combinations(range(n_x), min(q, n_x)):
        for T in combinations(range(n_y), min(q, n_y)):
            best = max(best, covered(edges, S, T))
    return best


def uncovered(edges, reducers):
    """Edges no reducer holds both ends of; reducers are (xs, ys) pairs."""
    return {
        (u, v) for u, v in edges
        if not any(u in xs and v in ys for xs, ys in reducers)
    }
