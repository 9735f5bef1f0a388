"""Mapping schemas: reducers, validation, replication metrics and completion."""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _accel
from .errors import PreconditionError, RangeError
from .graph import ConnectionGraph, InputId, Side


@dataclass(frozen=True)
class Reducer:
    """Inputs sent to one reducer. Index tuples are kept sorted and unique."""

    x: tuple[int, ...]
    y: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(sorted(set(int(i) for i in self.x))))
        object.__setattr__(self, "y", tuple(sorted(set(int(i) for i in self.y))))

    @property
    def size(self) -> int:
        return len(self.x) + len(self.y)


@dataclass(frozen=True)
class MappingSchema:
    q: int
    reducers: tuple[Reducer, ...]
    provenance: str = ""

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be positive")
        object.__setattr__(self, "reducers", tuple(self.reducers))

    @property
    def p(self) -> int:
        return len(self.reducers)

    @property
    def total_assignments(self) -> int:
        return sum(r.size for r in self.reducers)

    def csr(self, present_x=None, present_y=None):
        """Reducer memberships as ``(x_ptr, x_idx, y_ptr, y_idx)``.

        With presence masks, absent inputs are dropped from every reducer.
        """
        xs = [np.asarray(r.x, dtype=np.int64) for r in self.reducers]
        ys = [np.asarray(r.y, dtype=np.int64) for r in self.reducers]
        if present_x is not None:
            xs = [a[present_x[a]] for a in xs]
        if present_y is not None:
            ys = [a[present_y[a]] for a in ys]
        return _pack(xs) + _pack(ys)

    def to_json(self) -> str:
        body = {
            "q": self.q,
            "provenance": self.provenance,
            "reducers": [{"x": list(r.x), "y": list(r.y)} for r in self.reducers],
        }
        return json.dumps(body, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MappingSchema":
        body = json.loads(text)
        try:
            reducers = [Reducer(tuple(r["x"]), tuple(r["y"])) for r in body["reducers"]]
            return cls(int(body["q"]), tuple(reducers), str(body.get("provenance", "")))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed schema JSON: {exc}") from None

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="ascii", newline="\n")

    @classmethod
    def load(cls, path) -> "MappingSchema":
        return cls.from_json(Path(path).read_text(encoding="ascii"))

    def deduplicated(self) -> "MappingSchema":
        seen = dict.fromkeys(self.reducers)
        return MappingSchema(self.q, tuple(seen), self.provenance + "+dedupe")


def _pack(arrays):
    lengths = np.fromiter((a.shape[0] for a in arrays), dtype=np.int64, count=len(arrays))
    ptr = np.zeros(len(arrays) + 1, dtype=np.int64)
    np.cumsum(lengths, out=ptr[1:])
    idx = np.concatenate(arrays) if arrays else np.zeros(0, dtype=np.int64)
    return ptr, idx.astype(np.int64, copy=False)


def _check_range(graph: ConnectionGraph, schema: MappingSchema) -> None:
    for i, r in enumerate(schema.reducers):
        if (r.x and (r.x[0] < 0 or r.x[-1] >= graph.n_x)) or (
            r.y and (r.y[0] < 0 or r.y[-1] >= graph.n_y)
        ):
            raise RangeError(f"reducer {i} references an input outside the graph")


def edge_cover_counts(graph: ConnectionGraph, schema: MappingSchema, backend=None) -> np.ndarray:
    """How many reducers hold both endpoints of each edge (in ``graph.edges`` order)."""
    _check_range(graph, schema)
    return _accel.cover_counts(*schema.csr(), graph.edge_codes, graph.n_y, backend=backend)


@dataclass(frozen=True)
class ValidationReport:
    covered: bool
    uncovered_edges: list[tuple[int, int]]
    capacity_ok: bool
    offending_reducers: list[int]

    @property
    def ok(self) -> bool:
        return self.covered and self.capacity_ok

    def to_dict(self) -> dict:
        return {
            "covered": self.covered,
            "capacity_ok": self.capacity_ok,
            "uncovered_edges": [list(e) for e in self.uncovered_edges],
            "offending_reducers": self.offending_reducers,
        }


def validate(graph: ConnectionGraph, schema: MappingSchema, backend=None) -> ValidationReport:
    counts = edge_cover_counts(graph, schema, backend=backend)
    uncovered = [tuple(e) for e in graph.edges[counts == 0].tolist()]
    q = schema.q
    offending = [i for i, r in enumerate(schema.reducers) if len(r.x) > q or len(r.y) > q]
    return ValidationReport(not uncovered, uncovered, not offending, offending)


@dataclass(frozen=True)
class ReplicationReport:
    """Per-input reducer counts and the exact replication rate.

    ``rate`` averages over every declared input (zero-degree ones included);
    ``participating_rate`` averages over inputs with at least one edge.
    """

    x_counts: tuple[int, ...]
    y_counts: tuple[int, ...]
    total_assignments: int
    rate: Fraction
    participating_rate: Fraction
    p: int

    @property
    def per_input_count(self) -> dict[InputId, int]:
        out = {InputId(Side.X, i): c for i, c in enumerate(self.x_counts)}
        out.update({InputId(Side.Y, i): c for i, c in enumerate(self.y_counts)})
        return out

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "total_assignments": self.total_assignments,
            "rate": fraction_str(self.rate),
            "rate_decimal": float(self.rate),
            "participating_rate": fraction_str(self.participating_rate),
            "participating_rate_decimal": float(self.participating_rate),
        }


def fraction_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def replication_report(graph: ConnectionGraph, schema: MappingSchema) -> ReplicationReport:
    _check_range(graph, schema)
    x_ptr, x_idx, y_ptr, y_idx = schema.csr()
    xc = np.bincount(x_idx, minlength=graph.n_x)
    yc = np.bincount(y_idx, minlength=graph.n_y)
    total = int(xc.sum() + yc.sum())
    dx, dy = graph.degrees()
    part = int(np.count_nonzero(dx) + np.count_nonzero(dy))
    part_total = int(xc[dx > 0].sum() + yc[dy > 0].sum())
    return ReplicationReport(
        x_counts=tuple(xc.tolist()),
        y_counts=tuple(yc.tolist()),
        total_assignments=total,
        rate=Fraction(total, graph.n_x + graph.n_y),
        participating_rate=Fraction(part_total, part) if part else Fraction(0),
        p=schema.p,
    )


def is_complete(schema: MappingSchema) -> bool:
    q = schema.q
    return all(len(r.x) == q and len(r.y) == q for r in schema.reducers)


def rp_identity_check(schema: MappingSchema, n: int) -> bool:
    """Check ``r * n == p * q`` for a complete schema over ``n`` inputs per side."""
    if not is_complete(schema):
        raise PreconditionError("r*n = p*q only holds for complete schemas")
    rate = Fraction(schema.total_assignments, 2 * n)
    return rate * n == schema.p * schema.q


def merge_small_reducers(schema: MappingSchema) -> MappingSchema:
    """Merge phase of completion.

    Repeatedly unions the two smallest reducers that each hold at most
    ``q // 2`` inputs per side, until at most one such reducer remains.
    Survivors keep the position of their earliest constituent.
    """
    half = schema.q // 2
    slots: list[tuple[set, set, int] | None] = [
        (set(r.x), set(r.y), i) for i, r in enumerate(schema.reducers)
    ]
    heap = [
        (r.size, i, i)
        for i, r in enumerate(schema.reducers)
        if len(r.x) <= half and len(r.y) <= half
    ]
    heapq.heapify(heap)
    while len(heap) >= 2:
        _, _, a = heapq.heappop(heap)
        _, _, b = heapq.heappop(heap)
        xa, ya, pa = slots[a]
        xb, yb, pb = slots[b]
        merged = (xa | xb, ya | yb, min(pa, pb))
        slots[a] = merged
        slots[b] = None
        if len(merged[0]) <= half and len(merged[1]) <= half:
            heapq.heappush(heap, (len(merged[0]) + len(merged[1]), merged[2], a))
    survivors = sorted((s for s in slots if s is not None), key=lambda s: s[2])
    return MappingSchema(
        schema.q, tuple(Reducer(tuple(x), tuple(y)) for x, y, _ in survivors), schema.provenance
    )


def make_complete(graph: ConnectionGraph, schema: MappingSchema) -> MappingSchema:
    """Turn a valid schema into a complete one.

    Small reducers are merged (:func:`merge_small_reducers`), then each
    reducer is padded with the lowest-index inputs it lacks until it holds
    exactly ``q`` per side.
    """
    q = schema.q
    if not 2 * q < graph.n:
        raise PreconditionError(f"completion needs q < n/2 (q={q}, n={graph.n})")
    if q > min(graph.n_x, graph.n_y):
        raise PreconditionError("cannot pad reducers to q inputs on the smaller side")
    if not validate(graph, schema).ok:
        raise PreconditionError("completion needs a schema that validates")
    if is_complete(schema):
        return schema
    merged = merge_small_reducers(schema)
    reducers = tuple(Reducer(tuple(_pad(r.x, q)), tuple(_pad(r.y, q))) for r in merged.reducers)
    return MappingSchema(q, reducers, schema.provenance + "+complete")


def _pad(members, q: int) -> list[int]:
    out = set(members)
    i = 0
    while len(out) < q:
        out.add(i)
        i += 1
    return sorted(out)


def from_sets(q: int, pairs: Sequence[tuple[Sequence[int], Sequence[int]]], provenance="") -> MappingSchema:
    return MappingSchema(q, tuple(Reducer(tuple(x), tuple(y)) for x, y in pairs), provenance)
