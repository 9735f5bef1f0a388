"""Closed-form replication bounds and exact (q, phi)-expansion by enumeration."""

from __future__ import annotations

import math
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _accel
from .errors import BudgetError, ContradictionError
from .graph import ConnectionGraph, gen_random, induced_edge_count
from .schema import fraction_str

DEFAULT_BUDGET = 10_000_000
TOL = 1e-9
# m >= KAPPA * n makes the first Chernoff form usable in the sparse case
KAPPA = 2 ** (3 * math.e) / math.e


def enumeration_budget() -> int:
    raw = os.environ.get("SOMEPAIRS_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass(frozen=True)
class BoundsReport:
    """Upper and lower replication bounds for an (n, m, q) instance.

    Real-valued lower bounds are ``None`` when their logarithm argument is
    at most 1. ``lower_any`` is the complete-schema bound divided by the
    completion factor 6; ``lower_any_printed`` evaluates the alternative
    expression with ``log2(e n / 6q)`` for comparison.
    """

    n: int
    m: int
    q: int
    upper_a: Fraction
    upper_b: Fraction
    alg_c: float
    lower_complete: float | None
    lower_any: float | None
    lower_any_printed: float | None
    mu: Fraction

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "q": self.q,
            "upper_a": fraction_str(self.upper_a),
            "upper_a_decimal": float(self.upper_a),
            "upper_b": fraction_str(self.upper_b),
            "upper_b_decimal": float(self.upper_b),
            "alg_c": self.alg_c,
            "alg_c_any_n": 2 * self.alg_c,
            "lower_complete": _na(self.lower_complete),
            "lower_any": _na(self.lower_any),
            "lower_any_printed": _na(self.lower_any_printed),
            "mu": fraction_str(self.mu),
            "mu_decimal": float(self.mu),
        }


def _na(v):
    return "not-applicable" if v is None else v


def bounds_report(n: int, m: int, q: int) -> BoundsReport:
    if n < 1 or q < 1 or m < 0:
        raise ValueError("need n, q >= 1 and m >= 0")
    upper_a = Fraction(n, q)
    upper_b = Fraction(m, n)
    arg = math.e * n / q
    lower_complete = None
    lower_any = None
    if arg > 1:
        sparse_term = (m / n) / (6 * math.log2(arg))
        lower_complete = min(n / (3 * q), sparse_term)
        lower_any = min(n / (18 * q), sparse_term / 6)
    arg6 = math.e * n / (6 * q)
    lower_any_printed = None
    if arg6 > 1:
        lower_any_printed = min(n / (18 * q), (m / n) / (6 * math.log2(arg6)))
    return BoundsReport(
        n=n,
        m=m,
        q=q,
        upper_a=upper_a,
        upper_b=upper_b,
        alg_c=math.sqrt(m / q),
        lower_complete=lower_complete,
        lower_any=lower_any,
        lower_any_printed=lower_any_printed,
        mu=Fraction(m * q * q, n * n),
    )


def hd1_phi_bound(q: int) -> float:
    """Most edges any q-by-q subset pair covers in the Hamming-distance-1 graph."""
    if q < 1:
        raise ValueError("q must be positive")
    return q * math.log2(2 * q)


def reducer_lower_bound(m: int, phi: int) -> Fraction:
    """Fewest reducers a complete schema can use when no reducer covers more than phi edges."""
    if m == 0:
        return Fraction(0)
    if phi <= 0:
        raise ContradictionError(f"{m} edges exist but phi = {phi}")
    return Fraction(m, phi)


def replication_lower_bound(n: int, m: int, q: int, phi: int) -> Fraction:
    return q * reducer_lower_bound(m, phi) / n


# --------------------------------------------------------------------------
# expansion


@dataclass(frozen=True)
class ExpansionResult:
    phi: int
    witness_S: tuple[int, ...]
    witness_T: tuple[int, ...]
    q: int
    exact: bool = True

    def to_dict(self) -> dict:
        return {
            "phi": self.phi,
            "q": self.q,
            "exact": self.exact,
            "witness_S": list(self.witness_S),
            "witness_T": list(self.witness_T),
        }


def _top_columns(col: np.ndarray, t: int) -> tuple[int, ...]:
    order = np.argsort(-col, kind="stable")[:t]
    return tuple(sorted(order.tolist()))


def brute_force_expansion(
    graph: ConnectionGraph, q: int, budget: int | None = None, jobs: int = 1, backend=None
) -> ExpansionResult:
    """Exact max of |C(S, T)| over |S|, |T| <= q.

    Every q-subset S of X is enumerated. For a fixed S the best T is the q
    Y-nodes with the most edges into S, since coverage adds up over T. The
    witness is the lexicographically first optimal S, so results do not
    depend on ``jobs``.
    """
    if q < 1:
        raise ValueError("q must be positive")
    s = min(q, graph.n_x)
    t = min(q, graph.n_y)
    total = math.comb(graph.n_x, s)
    budget = enumeration_budget() if budget is None else budget
    if total > budget:
        raise BudgetError(total, budget)
    adj = graph.adjacency
    if graph.m == 0:
        return ExpansionResult(0, tuple(range(s)), tuple(range(t)), q)
    jobs = max(1, min(jobs, total))
    bounds = np.linspace(0, total, jobs + 1).round().astype(np.int64).tolist()
    ranges = [(lo, hi - lo) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    if len(ranges) == 1:
        results = [_accel.max_cover(adj, s, t, *ranges[0], backend=backend)]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            results = list(pool.map(lambda r: _accel.max_cover(adj, s, t, *r, backend=backend), ranges))
    phi, rank = max(results, key=lambda br: (br[0], -br[1]))
    S = tuple(_accel.unrank_combination(rank, graph.n_x, s))
    col = adj[list(S)].sum(axis=0, dtype=np.int64)
    return ExpansionResult(int(phi), S, _top_columns(col, t), q)


def exhaustive_expansion(graph: ConnectionGraph, q: int) -> int:
    """Max |C(S, T)| by enumerating both S and T. Only for tiny graphs."""
    from itertools import combinations

    s = min(q, graph.n_x)
    t = min(q, graph.n_y)
    best = 0
    for S in combinations(range(graph.n_x), s):
        for T in combinations(range(graph.n_y), t):
            best = max(best, induced_edge_count(graph, S, T))
    return best


def estimate_expansion(graph: ConnectionGraph, q: int, samples: int, seed: int = 0) -> ExpansionResult:
    """Lower estimate of phi from random S (exact best T for each)."""
    rng = np.random.default_rng(seed)
    s = min(q, graph.n_x)
    t = min(q, graph.n_y)
    adj = graph.adjacency.astype(np.int64)
    best = (-1, (), ())
    for _ in range(samples):
        S = np.sort(rng.choice(graph.n_x, size=s, replace=False))
        col = adj[S].sum(axis=0)
        T = _top_columns(col, t)
        val = int(col[list(T)].sum())
        if val > best[0]:
            best = (val, tuple(S.tolist()), T)
    return ExpansionResult(max(best[0], 0), best[1], best[2], q, exact=False)


# --------------------------------------------------------------------------
# random-graph experiment


def case_label(n: int, m: int, q: int) -> str:
    if m == 0 or q <= n * n / m:
        return "case1"
    if q >= n * n * math.log(math.e * n / q) / m:
        return "case2"
    return "gap"


def case_phi_bound(n: int, m: int, q: int, case: str, constant: int = 6) -> float | None:
    """The phi a random instance should not exceed in the given case.

    Case 1 uses ``constant * q * log2(e n / q)``; the text states both 4
    and 6 for this constant. Case 2 uses ``3 m q^2 / n^2``.
    """
    if case == "case1":
        return constant * q * math.log2(math.e * n / q)
    if case == "case2":
        return 3 * m * q * q / (n * n)
    return None


@dataclass
class Trial:
    seed: int
    m: int
    phi: int
    within: bool | None
    within_4: bool | None
    r_lower: Fraction | None


@dataclass
class ExperimentSummary:
    n: int
    m: int
    q: int
    mode: str
    seed: int
    case: str
    phi_bound: float | None
    phi_bound_4: float | None
    kappa_ok: bool
    trials: list[Trial] = field(default_factory=list)

    @property
    def phis(self) -> list[int]:
        return [t.phi for t in self.trials]

    @property
    def fraction_within(self) -> float | None:
        flags = [t.within for t in self.trials if t.within is not None]
        return sum(flags) / len(flags) if flags else None

    def to_dict(self) -> dict:
        phis = self.phis
        return {
            "parameters": {"n": self.n, "m": self.m, "q": self.q, "trials": len(self.trials),
                           "mode": self.mode, "seed": self.seed},
            "case": self.case,
            "phi_bound": self.phi_bound,
            "phi_bound_4": self.phi_bound_4,
            "kappa_ok": self.kappa_ok,
            "phi_max": max(phis) if phis else None,
            "phi_median": statistics.median(phis) if phis else None,
            "fraction_within": self.fraction_within,
            "trials": [
                {
                    "seed": t.seed,
                    "m": t.m,
                    "phi": t.phi,
                    "within_bound": t.within,
                    "within_bound_4": t.within_4,
                    "r_lower": None if t.r_lower is None else fraction_str(t.r_lower),
                    "r_lower_decimal": None if t.r_lower is None else float(t.r_lower),
                }
                for t in self.trials
            ],
        }

    def to_tsv(self) -> str:
        rows = ["trial\tseed\tm\tphi\tcase\twithin_bound\tr_lower"]
        for i, t in enumerate(self.trials):
            r = "" if t.r_lower is None else f"{float(t.r_lower):.12g}"
            rows.append(f"{i}\t{t.seed}\t{t.m}\t{t.phi}\t{self.case}\t{t.within}\t{r}")
        return "\n".join(rows) + "\n"


def expansion_experiment(
    n: int,
    m: int,
    q: int,
    trials: int,
    seed: int = 0,
    mode: str = "with_replacement",
    budget: int | None = None,
    jobs: int = 1,
    backend=None,
) -> ExperimentSummary:
    """Exact phi on ``trials`` random graphs (trial i uses seed + i)."""
    budget = enumeration_budget() if budget is None else budget
    need = math.comb(n, min(q, n))
    if trials > 0 and need > budget:
        raise BudgetError(need, budget)
    case = case_label(n, m, q)
    summary = ExperimentSummary(
        n, m, q, mode, seed, case,
        case_phi_bound(n, m, q, case), case_phi_bound(n, m, q, case, constant=4),
        m >= KAPPA * n,
    )
    for i in range(trials):
        g = gen_random(n, m, mode, seed + i)
        res = brute_force_expansion(g, q, budget=budget, jobs=jobs, backend=backend)
        within = None if summary.phi_bound is None else res.phi <= summary.phi_bound + TOL
        within_4 = None if summary.phi_bound_4 is None else res.phi <= summary.phi_bound_4 + TOL
        r_lower = replication_lower_bound(n, g.m, q, res.phi) if res.phi else None
        summary.trials.append(Trial(seed + i, g.m, res.phi, within, within_4, r_lower))
    return summary
