"""Schema planners: grid (A), per-edge (B), recursive four-way split (C)
with pluggable partition strategies, and the first-bit Hamming construction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IncompatibleError, NonProgressError
from .graph import ConnectionGraph
from .schema import MappingSchema, Reducer

MAX_DEPTH = 64

# split(graph, xs, ys, depth) -> ((x1, x2), (y1, y2)); all sorted int64 arrays
SplitFn = Callable[[ConnectionGraph, np.ndarray, np.ndarray, int], tuple]


@dataclass(frozen=True)
class PartitionStrategy:
    name: str
    split: SplitFn
    needs_labels: bool = False


@dataclass(frozen=True)
class SplitRecord:
    """One internal node of an Algorithm C recursion."""

    depth: int
    n_x: int
    n_y: int
    m: int
    child_edges: tuple[int, int, int, int]  # (1,1), (1,2), (2,1), (2,2)

    @property
    def nonempty_children(self) -> int:
        return sum(1 for c in self.child_edges if c)


def plan_a(graph: ConnectionGraph, q: int) -> MappingSchema:
    """One reducer per (X group, Y group) pair of contiguous q-blocks."""
    if q < 1:
        raise ValueError("q must be positive")
    gx = [tuple(range(i, min(i + q, graph.n_x))) for i in range(0, graph.n_x, q)]
    gy = [tuple(range(j, min(j + q, graph.n_y))) for j in range(0, graph.n_y, q)]
    return MappingSchema(q, tuple(Reducer(x, y) for x in gx for y in gy), "a")


def plan_b(graph: ConnectionGraph) -> MappingSchema:
    return MappingSchema(
        1, tuple(Reducer((x,), (y,)) for x, y in graph.edges.tolist()), "b"
    )


# --------------------------------------------------------------------------
# partition strategies


def _halves(side: np.ndarray):
    mid = (side.shape[0] + 1) // 2
    return side[:mid], side[mid:]


def _split_halve(graph, xs, ys, depth):
    return _halves(xs), _halves(ys)


def strategy_halve() -> PartitionStrategy:
    """Lower/upper half of each side's index order; odd extra goes low."""
    return PartitionStrategy("halve", _split_halve)


def _split_weight(graph, xs, ys, depth):
    w = graph.label_weights
    if depth < 63:
        low_x = ((w[xs] >> depth) & 1) == 0
        low_y = ((w[ys] >> depth) & 1) == 0
        if not (low_x.all() and low_y.all()):
            return (xs[low_x], xs[~low_x]), (ys[low_y], ys[~low_y])
    # weight classes exhausted on both sides: fall back to halving
    return _split_halve(graph, xs, ys, depth)


def strategy_weight_bit() -> PartitionStrategy:
    """Split by bit ``depth`` of the label weight (parity first, then mod 4, ...).

    Once every weight in the subproblem agrees on that bit for both sides,
    the split falls back to halving so deeper levels still make progress.
    """
    return PartitionStrategy("weight", _split_weight, needs_labels=True)


STRATEGIES = {"halve": strategy_halve, "weight": strategy_weight_bit}


def is_hd1_up(graph: ConnectionGraph) -> bool:
    if graph.labels is None:
        return False
    vals = graph.label_values
    xv, yv = vals[graph.edges[:, 0]], vals[graph.edges[:, 1]]
    diff = xv ^ yv
    up = ((xv & yv) == xv) & (diff != 0) & ((diff & (diff - 1)) == 0)
    b = graph.bits
    return bool(up.all()) and graph.m == b * 2 ** (b - 1)


# --------------------------------------------------------------------------
# Algorithm C


def plan_c(
    graph: ConnectionGraph,
    q: int,
    strategy: PartitionStrategy | None = None,
    trace: list | None = None,
) -> MappingSchema:
    """Recursive four-way decomposition.

    A subproblem with at most ``q`` edges becomes one reducer holding just
    the edge endpoints; otherwise one with at most ``q`` inputs per side
    becomes one reducer holding everything; otherwise it is split by the
    strategy and the four children are solved in (1,1), (1,2), (2,1), (2,2)
    order. Children without edges are dropped. Pass a list as ``trace`` to
    collect a :class:`SplitRecord` per split.
    """
    if q < 1:
        raise ValueError("q must be positive")
    strategy = strategy or strategy_halve()
    if strategy.needs_labels and graph.labels is None:
        raise IncompatibleError(f"strategy {strategy.name!r} needs labelled inputs")
    out: list[Reducer] = []
    xs = np.arange(graph.n_x, dtype=np.int64)
    ys = np.arange(graph.n_y, dtype=np.int64)
    in_x = np.zeros(graph.n_x, dtype=bool)
    in_y = np.zeros(graph.n_y, dtype=bool)
    # explicit stack; children pushed in reverse to keep the output order
    stack = [(xs, ys, graph.edges, 0)]
    while stack:
        xs, ys, edges, depth = stack.pop()
        m = edges.shape[0]
        if m == 0:
            continue
        if m <= q:
            out.append(Reducer(tuple(np.unique(edges[:, 0]).tolist()),
                               tuple(np.unique(edges[:, 1]).tolist())))
            continue
        if xs.shape[0] <= q and ys.shape[0] <= q:
            out.append(Reducer(tuple(xs.tolist()), tuple(ys.tolist())))
            continue
        if depth >= MAX_DEPTH:
            raise NonProgressError(f"recursion passed depth {MAX_DEPTH}")
        (x1, x2), (y1, y2) = strategy.split(graph, xs, ys, depth)
        x1, x2, y1, y2 = (np.sort(np.asarray(a, dtype=np.int64)) for a in (x1, x2, y1, y2))
        _check_partition(xs, x1, x2, "X")
        _check_partition(ys, y1, y2, "Y")
        if (x1.size == 0 or x2.size == 0) and (y1.size == 0 or y2.size == 0):
            raise NonProgressError(
                f"strategy {strategy.name!r} did not split either side at depth {depth}"
            )
        in_x[x1] = True
        in_y[y1] = True
        ex = in_x[edges[:, 0]]
        ey = in_y[edges[:, 1]]
        in_x[x1] = False
        in_y[y1] = False
        children = [
            (x1, y1, edges[ex & ey]),
            (x1, y2, edges[ex & ~ey]),
            (x2, y1, edges[~ex & ey]),
            (x2, y2, edges[~ex & ~ey]),
        ]
        if trace is not None:
            trace.append(SplitRecord(depth, xs.shape[0], ys.shape[0], m,
                                     tuple(c[2].shape[0] for c in children)))
        for cx, cy, ce in reversed(children):
            stack.append((cx, cy, ce, depth + 1))
    return MappingSchema(q, tuple(out), f"c:{strategy.name}")


def _check_partition(side, a, b, name):
    if a.shape[0] + b.shape[0] != side.shape[0] or not np.array_equal(
        np.sort(np.concatenate([a, b])), side
    ):
        raise ValueError(f"strategy returned parts that do not partition {name}")


# --------------------------------------------------------------------------
# first-bit construction for the up-only Hamming problem


def plan_prefix(graph: ConnectionGraph, q: int) -> MappingSchema:
    """First-bit decomposition of the up-only Hamming-distance-1 problem.

    On strings sharing a prefix, those continuing with 1 and those
    continuing with 0 form two smaller copies of the problem; the cross
    edges ``0w -> 1w`` get one reducer each. When the remaining length is
    ``log2 q`` a single reducer takes every string with that prefix.
    """
    if not is_hd1_up(graph):
        raise IncompatibleError("prefix planner needs the up-only Hamming graph")
    b = graph.bits
    k = q.bit_length() - 1
    if q < 1 or q & (q - 1) or k > b:
        raise IncompatibleError(f"q must be a power of two at most 2^{b}, got {q}")
    index = {int(s, 2): i for i, s in enumerate(graph.labels)}
    out: list[Reducer] = []

    def solve(prefix: int, ell: int) -> None:
        base = prefix << ell
        if ell == k:
            block = tuple(index[base + s] for s in range(1 << ell))
            out.append(Reducer(block, block))
            return
        top = 1 << (ell - 1)
        solve((prefix << 1) | 1, ell - 1)
        out.extend(Reducer((index[base + w],), (index[base + top + w],)) for w in range(top))
        solve(prefix << 1, ell - 1)

    solve(0, b)
    return MappingSchema(q, tuple(out), "prefix")
