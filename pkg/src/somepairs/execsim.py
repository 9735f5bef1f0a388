"""Simulated single-round execution of a mapping schema over present inputs."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _accel
from .errors import IncompatibleError, InvalidSchemaError, PreconditionError, RangeError
from .graph import ConnectionGraph
from .schema import MappingSchema, fraction_str, validate


@dataclass(frozen=True)
class PresenceSet:
    present_x: frozenset[int]
    present_y: frozenset[int]

    @classmethod
    def everything(cls, graph: ConnectionGraph) -> "PresenceSet":
        return cls(frozenset(range(graph.n_x)), frozenset(range(graph.n_y)))

    @classmethod
    def nothing(cls) -> "PresenceSet":
        return cls(frozenset(), frozenset())

    @classmethod
    def random(cls, graph: ConnectionGraph, prob: float, seed: int = 0) -> "PresenceSet":
        rng = np.random.default_rng(seed)
        px = np.flatnonzero(rng.random(graph.n_x) < prob)
        py = np.flatnonzero(rng.random(graph.n_y) < prob)
        return cls(frozenset(px.tolist()), frozenset(py.tolist()))

    def masks(self, graph: ConnectionGraph) -> tuple[np.ndarray, np.ndarray]:
        mx = np.zeros(graph.n_x, dtype=bool)
        my = np.zeros(graph.n_y, dtype=bool)
        px = np.fromiter(self.present_x, dtype=np.int64)
        py = np.fromiter(self.present_y, dtype=np.int64)
        if (px.size and (px.min() < 0 or px.max() >= graph.n_x)) or (
            py.size and (py.min() < 0 or py.max() >= graph.n_y)
        ):
            raise RangeError("presence set references an input outside the graph")
        mx[px] = True
        my[py] = True
        return mx, my


@dataclass(frozen=True)
class ExecutionTrace:
    assignments: int
    per_reducer_load: tuple[tuple[int, int], ...]
    emitted: frozenset[tuple[int, int]]
    realized_rate: Fraction

    def to_dict(self) -> dict:
        return {
            "assignments": self.assignments,
            "emitted": len(self.emitted),
            "realized_rate": fraction_str(self.realized_rate),
            "realized_rate_decimal": float(self.realized_rate),
            "max_load": max((a + b for a, b in self.per_reducer_load), default=0),
            "per_reducer_load": [list(l) for l in self.per_reducer_load],
        }

    def emitted_tsv(self) -> str:
        return "".join(f"{x}\t{y}\n" for x, y in sorted(self.emitted))


def _hd1(xv, yv):
    d = xv ^ yv
    return (d != 0) & ((d & (d - 1)) == 0)


def _hd1_up(xv, yv):
    return _hd1(xv, yv) & ((xv & yv) == xv)


PREDICATES = {"hd1": _hd1, "hd1_up": _hd1_up}


def run(
    graph: ConnectionGraph,
    schema: MappingSchema,
    presence: PresenceSet,
    mode: str = "edges",
    backend=None,
) -> ExecutionTrace:
    """Map present inputs to their reducers, reduce, and union the outputs.

    ``mode="edges"`` has reducers look candidate pairs up in the edge set;
    ``mode="predicate"`` evaluates the Hamming predicate on labels instead.
    """
    report = validate(graph, schema, backend=backend)
    if not report.ok:
        raise InvalidSchemaError(report)
    mx, my = presence.masks(graph)
    x_ptr, x_idx, y_ptr, y_idx = schema.csr(mx, my)
    loads = tuple(zip(np.diff(x_ptr).tolist(), np.diff(y_ptr).tolist()))
    assignments = int(x_idx.shape[0] + y_idx.shape[0])

    if mode == "edges":
        counts = _accel.cover_counts(x_ptr, x_idx, y_ptr, y_idx, graph.edge_codes, graph.n_y,
                                     backend=backend)
        emitted = frozenset(map(tuple, graph.edges[counts > 0].tolist()))
    elif mode == "predicate":
        pred = PREDICATES.get(graph.family)
        if pred is None or graph.labels is None:
            raise IncompatibleError("predicate mode needs a labelled Hamming graph")
        vals = graph.label_values
        found: set[tuple[int, int]] = set()
        for r in range(len(loads)):
            xs = x_idx[x_ptr[r]:x_ptr[r + 1]]
            ys = y_idx[y_ptr[r]:y_ptr[r + 1]]
            if xs.size == 0 or ys.size == 0:
                continue
            hit = pred(vals[xs][:, None], vals[ys][None, :])
            ii, jj = np.nonzero(hit)
            found.update(zip(xs[ii].tolist(), ys[jj].tolist()))
        emitted = frozenset(found)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    present = len(presence.present_x) + len(presence.present_y)
    rate = Fraction(assignments, present) if present else Fraction(0)
    return ExecutionTrace(assignments, loads, emitted, rate)


@dataclass(frozen=True)
class LoadProfile:
    presence_prob: float
    trials: int
    mean_load: float
    max_load: int
    declared_max: int
    histogram: dict[int, int]

    def to_dict(self) -> dict:
        return {
            "presence_prob": self.presence_prob,
            "trials": self.trials,
            "mean_load": self.mean_load,
            "max_load": self.max_load,
            "declared_max": self.declared_max,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


def load_profile(
    schema: MappingSchema,
    presence_prob: float,
    trials: int,
    seed: int = 0,
    n_x: int | None = None,
    n_y: int | None = None,
) -> LoadProfile:
    """Monte Carlo per-reducer (x + y) load under independent input presence.

    The input universe defaults to one past the largest index in the schema.
    """
    if not 0.0 <= presence_prob <= 1.0:
        raise PreconditionError("presence_prob must lie in [0, 1]")
    x_ptr, x_idx, y_ptr, y_idx = schema.csr()
    n_x = n_x or (int(x_idx.max()) + 1 if x_idx.size else 0)
    n_y = n_y or (int(y_idx.max()) + 1 if y_idx.size else 0)
    p = schema.p
    declared = np.diff(x_ptr) + np.diff(y_ptr)
    rx = np.repeat(np.arange(p), np.diff(x_ptr))
    ry = np.repeat(np.arange(p), np.diff(y_ptr))
    rng = np.random.default_rng(seed)
    hist: dict[int, int] = {}
    total = 0
    max_load = 0
    for _ in range(trials):
        px = rng.random(n_x) < presence_prob
        py = rng.random(n_y) < presence_prob
        load = np.bincount(rx[px[x_idx]], minlength=p) + np.bincount(ry[py[y_idx]], minlength=p)
        total += int(load.sum())
        if p:
            max_load = max(max_load, int(load.max()))
        vals, cnt = np.unique(load, return_counts=True)
        for v, c in zip(vals.tolist(), cnt.tolist()):
            hist[v] = hist.get(v, 0) + c
    denom = trials * p
    return LoadProfile(
        presence_prob,
        trials,
        total / denom if denom else 0.0,
        max_load,
        int(declared.max()) if p else 0,
        hist,
    )
