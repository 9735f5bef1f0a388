"""Connection graphs for some-pairs problems, generators and TSV ingestion."""

from __future__ import annotations

import enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import InfeasibleError, ParseError, RangeError, SizeLimitError

MAX_BITS = 20


class Side(enum.Enum):
    X = "X"
    Y = "Y"


class InputId(NamedTuple):
    side: Side
    index: int


class ConnectionGraph:
    """Bipartite graph with sides X (``n_x`` nodes) and Y (``n_y`` nodes).

    Edges are stored once as a sorted ``(m, 2)`` int64 array, read-only.
    ``labels`` (bit strings, shared by both sides) exist only for the
    Hamming families; ``family`` names the generator that produced them.
    """

    def __init__(self, n_x: int, n_y: int, edges, labels=None, family=None, draws=None):
        if n_x < 1 or n_y < 1:
            raise ValueError("both sides need at least one node")
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2) if len(edges) else np.zeros((0, 2), np.int64)
        if arr.size:
            if arr.min() < 0 or arr[:, 0].max() >= n_x or arr[:, 1].max() >= n_y:
                raise RangeError("edge endpoint out of range")
            codes = np.unique(arr[:, 0] * n_y + arr[:, 1])
            arr = np.stack([codes // n_y, codes % n_y], axis=1)
        arr.setflags(write=False)
        self.n_x = int(n_x)
        self.n_y = int(n_y)
        self._edges = arr
        if labels is not None:
            labels = tuple(labels)
            b = len(labels[0]) if labels else 0
            if n_x != n_y or len(labels) != n_x or n_x != 2 ** b:
                raise ValueError("labels require n_x = n_y = 2^b")
            if len(set(labels)) != len(labels) or any(
                len(s) != b or set(s) - {"0", "1"} for s in labels
            ):
                raise ValueError("labels must be distinct bit strings of equal length")
        self.labels = labels
        self.family = family
        self.draws = draws

    @property
    def edges(self) -> np.ndarray:
        return self._edges

    @property
    def m(self) -> int:
        return int(self._edges.shape[0])

    @property
    def n(self) -> int:
        return max(self.n_x, self.n_y)

    @property
    def bits(self) -> int | None:
        return len(self.labels[0]) if self.labels else None

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(map(tuple, self._edges.tolist()))

    @cached_property
    def edge_codes(self) -> np.ndarray:
        codes = self._edges[:, 0] * self.n_y + self._edges[:, 1]
        codes.setflags(write=False)
        return codes

    @cached_property
    def label_values(self) -> np.ndarray | None:
        """Integer value of each node's label."""
        if self.labels is None:
            return None
        vals = np.array([int(s, 2) if s else 0 for s in self.labels], dtype=np.int64)
        vals.setflags(write=False)
        return vals

    @cached_property
    def label_weights(self) -> np.ndarray | None:
        """Number of 1 bits in each node's label."""
        if self.labels is None:
            return None
        w = np.array([s.count("1") for s in self.labels], dtype=np.int64)
        w.setflags(write=False)
        return w

    @cached_property
    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n_x, self.n_y), dtype=np.uint8)
        adj[self._edges[:, 0], self._edges[:, 1]] = 1
        adj.setflags(write=False)
        return adj

    def degrees(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.bincount(self._edges[:, 0], minlength=self.n_x),
            np.bincount(self._edges[:, 1], minlength=self.n_y),
        )

    def is_symmetric(self) -> bool:
        return self.n_x == self.n_y

    def __eq__(self, other):
        if not isinstance(other, ConnectionGraph):
            return NotImplemented
        return (
            self.n_x == other.n_x
            and self.n_y == other.n_y
            and self.labels == other.labels
            and np.array_equal(self._edges, other._edges)
        )

    def __hash__(self):
        return hash((self.n_x, self.n_y, self.labels, self.edge_codes.tobytes()))

    def __repr__(self):
        fam = f", family={self.family!r}" if self.family else ""
        return f"ConnectionGraph(n_x={self.n_x}, n_y={self.n_y}, m={self.m}{fam})"


def _check_bits(b: int) -> None:
    if not 1 <= b <= MAX_BITS:
        raise SizeLimitError(f"b must be in [1, {MAX_BITS}], got {b}")


def cube_labels(b: int) -> tuple[str, ...]:
    return tuple(format(i, f"0{b}b") for i in range(2 ** b))


def gen_hd1(b: int) -> ConnectionGraph:
    """Pairs of b-bit strings at Hamming distance exactly one, both orders."""
    _check_bits(b)
    n = 2 ** b
    x = np.repeat(np.arange(n, dtype=np.int64), b)
    y = x ^ np.tile(1 << np.arange(b, dtype=np.int64), n)
    return ConnectionGraph(n, n, np.stack([x, y], axis=1), labels=cube_labels(b), family="hd1")


def gen_hd1_up(b: int) -> ConnectionGraph:
    """Pairs (x, y) where y is x with a single 0 turned into a 1."""
    _check_bits(b)
    n = 2 ** b
    x = np.repeat(np.arange(n, dtype=np.int64), b)
    bit = np.tile(1 << np.arange(b, dtype=np.int64), n)
    keep = (x & bit) == 0
    edges = np.stack([x[keep], (x | bit)[keep]], axis=1)
    return ConnectionGraph(n, n, edges, labels=cube_labels(b), family="hd1_up")


def gen_random(n: int, m: int, mode: str = "with_replacement", seed: int = 0) -> ConnectionGraph:
    """Random n x n connection graph from ``m`` uniform edge draws.

    ``with_replacement`` keeps the raw independent draws (duplicates collapse,
    so ``graph.m <= m``); ``distinct`` rejection-samples until ``m`` distinct
    edges exist.
    """
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    if mode not in ("with_replacement", "distinct"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed & 0xFFFF_FFFF_FFFF_FFFF)
    total = n * n
    if mode == "with_replacement":
        codes = rng.integers(0, total, size=m)
    else:
        if m > total:
            raise InfeasibleError(f"cannot place {m} distinct edges in a {n}x{n} graph")
        seen: dict[int, None] = {}
        while len(seen) < m:
            batch = rng.integers(0, total, size=max(16, 2 * (m - len(seen))))
            for c in batch.tolist():
                if c not in seen:
                    seen[c] = None
                    if len(seen) == m:
                        break
        codes = np.fromiter(seen, dtype=np.int64, count=len(seen))
    edges = np.stack([codes // n, codes % n], axis=1) if m else np.zeros((0, 2), np.int64)
    draws = m if mode == "with_replacement" else None
    return ConnectionGraph(n, n, edges, family="random", draws=draws)


def complete_graph(n_x: int, n_y: int | None = None) -> ConnectionGraph:
    n_y = n_x if n_y is None else n_y
    xs, ys = np.meshgrid(np.arange(n_x), np.arange(n_y), indexing="ij")
    return ConnectionGraph(n_x, n_y, np.stack([xs.ravel(), ys.ravel()], axis=1))


def induced_edge_count(graph: ConnectionGraph, S: Iterable[int], T: Iterable[int]) -> int:
    """|C(S, T)|: edges with the X end in S and the Y end in T."""
    S = np.fromiter(S, dtype=np.int64)
    T = np.fromiter(T, dtype=np.int64)
    if S.size and (S.min() < 0 or S.max() >= graph.n_x):
        raise RangeError("S has an index outside X")
    if T.size and (T.min() < 0 or T.max() >= graph.n_y):
        raise RangeError("T has an index outside Y")
    if S.size == 0 or T.size == 0:
        return 0
    in_s = np.zeros(graph.n_x, dtype=bool)
    in_t = np.zeros(graph.n_y, dtype=bool)
    in_s[S] = True
    in_t[T] = True
    e = graph.edges
    return int(np.count_nonzero(in_s[e[:, 0]] & in_t[e[:, 1]]))


# --------------------------------------------------------------------------
# TSV edge lists


def format_edge_list(graph: ConnectionGraph) -> str:
    lines = [f"{graph.n_x}\t{graph.n_y}"]
    if graph.labels is not None:
        lines.append(f"#labels b={graph.bits}")
        lines.extend(graph.labels)
    if graph.family:
        lines.append(f"#family {graph.family}")
    if graph.draws is not None:
        lines.append(f"#draws {graph.draws} mode=with_replacement")
    lines.extend(f"{x}\t{y}" for x, y in graph.edges.tolist())
    return "\n".join(lines) + "\n"


def save_edge_list(graph: ConnectionGraph, path) -> None:
    Path(path).write_text(format_edge_list(graph), encoding="ascii", newline="\n")


def load_edge_list(path) -> ConnectionGraph:
    """Parse the TSV edge-list format written by :func:`save_edge_list`.

    A file is treated as distinct-declared (duplicate edge lines are an error)
    unless it carries a ``#draws ... mode=with_replacement`` comment.
    """
    text = Path(path).read_text(encoding="ascii")
    rows = text.split("\n")
    header = None
    labels = None
    family = None
    draws = None
    pending_labels = 0
    edges: list[tuple[int, int]] = []
    first_line: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(rows, start=1):
        line = raw.rstrip("\r")
        if pending_labels:
            s = line.strip()
            if not s or set(s) - {"0", "1"} or len(s) != len(labels_b_str):
                raise ParseError(f"bad label {line!r}", lineno)
            labels.append(s)
            pending_labels -= 1
            continue
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.startswith("labels"):
                if header is None or edges or labels is not None:
                    raise ParseError("#labels must follow the header, before edges", lineno)
                try:
                    key, val = body.split(None, 1)[1].split("=")
                    b = int(val)
                    assert key.strip() == "b"
                except (IndexError, ValueError, AssertionError):
                    raise ParseError(f"malformed labels directive {stripped!r}", lineno) from None
                if not 0 < b <= MAX_BITS:
                    raise ParseError(f"label width {b} out of range", lineno)
                labels = []
                labels_b_str = "0" * b
                pending_labels = 2 ** b
            elif body.startswith("family"):
                parts = body.split()
                family = parts[1] if len(parts) > 1 else None
            elif body.startswith("draws"):
                parts = body.split()
                try:
                    draws = int(parts[1])
                except (IndexError, ValueError):
                    raise ParseError(f"malformed draws comment {stripped!r}", lineno) from None
            continue
        fields = stripped.split()
        if len(fields) != 2:
            raise ParseError(f"expected two integers, got {stripped!r}", lineno)
        try:
            a, b_ = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError(f"non-integer field in {stripped!r}", lineno) from None
        if header is None:
            if a < 1 or b_ < 1:
                raise ParseError("side sizes must be positive", lineno)
            header = (a, b_)
            continue
        if not (0 <= a < header[0] and 0 <= b_ < header[1]):
            raise ParseError(f"edge ({a}, {b_}) out of range for {header[0]}x{header[1]}", lineno)
        key = (a, b_)
        if key in first_line:
            if draws is None:
                raise ParseError(f"duplicate edge {key}, first seen on line {first_line[key]}", lineno)
            continue
        first_line[key] = lineno
        edges.append(key)
    if header is None:
        raise ParseError("missing header line", 1)
    if pending_labels:
        raise ParseError(f"file ended with {pending_labels} labels missing", len(rows))
    try:
        return ConnectionGraph(header[0], header[1], edges, labels=labels, family=family, draws=draws)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
