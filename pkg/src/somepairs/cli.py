"""Command-line front end.

Exit codes: 0 success, 2 usage, 3 incompatibility, 4 enumeration budget,
5 validation failure (with ``--strict``).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import bounds, execsim, graph as gcore, planners
from .errors import (
    BudgetError,
    IncompatibleError,
    InfeasibleError,
    InvalidSchemaError,
    ParseError,
    PreconditionError,
    SizeLimitError,
)
from .schema import (
    MappingSchema,
    fraction_str,
    is_complete,
    make_complete,
    replication_report,
    validate,
)

EXIT_OK, EXIT_USAGE, EXIT_INCOMPATIBLE, EXIT_BUDGET, EXIT_INVALID = 0, 2, 3, 4, 5
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="ascii", newline="\n")
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _note(msg: str) -> None:
    print(f"note: {msg}", file=sys.stderr)


def parse_gen_spec(spec: str, seed: int = DEFAULT_SEED) -> gcore.ConnectionGraph:
    """``hd1:b=3``, ``hd1_up:b=4``, ``random:n=16,m=32,distinct,seed=1``, ``complete:n=4``."""
    name, _, rest = spec.partition(":")
    opts: dict[str, str] = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        opts[key.strip()] = val.strip() if eq else "1"
    try:
        if name == "hd1":
            return gcore.gen_hd1(int(opts["b"]))
        if name == "hd1_up":
            return gcore.gen_hd1_up(int(opts["b"]))
        if name == "random":
            mode = "distinct" if "distinct" in opts else "with_replacement"
            return gcore.gen_random(int(opts["n"]), int(opts["m"]), mode,
                                    int(opts.get("seed", seed)))
        if name == "complete":
            return gcore.complete_graph(int(opts["n"]))
    except KeyError as exc:
        raise UsageError(f"generator {name!r} needs parameter {exc.args[0]}") from None
    except (ValueError, SizeLimitError, InfeasibleError) as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown generator {name!r}")


def _graph(args) -> gcore.ConnectionGraph:
    if args.graph:
        g = gcore.load_edge_list(args.graph)
    else:
        g = parse_gen_spec(args.gen, args.seed)
    if g.n_x != g.n_y:
        _note(f"sides differ ({g.n_x} vs {g.n_y}); formulas use n = {g.n}")
    return g


def _add_graph_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="edge-list TSV file")
    src.add_argument("--gen", help="generator spec, e.g. hd1:b=3 or random:n=16,m=32,seed=1")


def _rate_note(g, schema, rate: Fraction) -> str:
    notes = []
    n = g.n
    if rate == Fraction(n, schema.q):
        notes.append("= n/q")
    if rate == Fraction(g.m, n):
        notes.append("= m/n")
    if schema.provenance.startswith("prefix") and g.bits:
        k = schema.q.bit_length() - 1
        if rate == 1 + Fraction(g.bits - k, 2):
            notes.append("= 1 + (b - log2 q)/2")
    return f" ({'; '.join(notes)})" if notes else ""


# --------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    if args.family in ("hd1", "hd1_up") and args.b is None:
        raise UsageError(f"{args.family} needs --b")
    if args.family == "hd1":
        spec = f"hd1:b={args.b}"
    elif args.family == "hd1_up":
        spec = f"hd1_up:b={args.b}"
    elif args.family == "complete":
        spec = f"complete:n={args.n}"
    else:
        if args.n is None or args.m is None:
            raise UsageError("random needs --n and --m")
        spec = f"random:n={args.n},m={args.m},seed={args.seed}" + (",distinct" if args.distinct else "")
    g = parse_gen_spec(spec, args.seed)
    if args.output:
        gcore.save_edge_list(g, args.output)
        print(f"n_x={g.n_x} n_y={g.n_y} m={g.m}")
    else:
        sys.stdout.write(gcore.format_edge_list(g))
        print(f"n_x={g.n_x} n_y={g.n_y} m={g.m}", file=sys.stderr)
    return EXIT_OK


def build_schema(g, planner: str, q: int | None, strategy: str = "halve") -> MappingSchema:
    if planner == "b":
        return planners.plan_b(g)
    if q is None:
        raise UsageError(f"planner {planner!r} needs --q")
    if planner == "a":
        return planners.plan_a(g, q)
    if planner == "c":
        strat = planners.STRATEGIES[strategy]()
        if strategy == "weight" and not planners.is_hd1_up(g):
            _note("the weight strategy only guarantees two edge-free children per split "
                  "on the up-only Hamming graph; running anyway")
        return planners.plan_c(g, q, strat)
    if planner == "prefix":
        return planners.plan_prefix(g, q)
    raise UsageError(f"unknown planner {planner!r}")


def cmd_plan(args) -> int:
    g = _graph(args)
    schema = build_schema(g, args.planner, args.q, args.strategy)
    if args.complete:
        schema = make_complete(g, schema)
    if args.dedupe:
        schema = schema.deduplicated()
    rep = replication_report(g, schema)
    if args.output:
        schema.save(args.output)
    else:
        sys.stdout.write(schema.to_json())
    out = sys.stderr if not args.output else sys.stdout
    print(f"p: {schema.p}", file=out)
    print(f"rate: {rep.rate}{_rate_note(g, schema, rep.rate)}", file=out)
    print(f"rate_exact: {fraction_str(rep.rate)}", file=out)
    print(f"rate_decimal: {float(rep.rate):.6f}", file=out)
    print(f"participating_rate: {fraction_str(rep.participating_rate)}", file=out)
    print(f"complete: {str(is_complete(schema)).lower()}", file=out)
    return EXIT_OK


def cmd_validate(args) -> int:
    g = _graph(args)
    schema = MappingSchema.load(args.schema)
    report = validate(g, schema)
    body = report.to_dict()
    body["ok"] = report.ok
    _emit(_dump(body), args.output)
    if args.strict and not report.ok:
        return EXIT_INVALID
    return EXIT_OK


def analyze(g, q: int, schema: MappingSchema | None = None, budget=None, jobs: int = 1) -> dict:
    n = g.n
    rep = bounds.bounds_report(n, g.m, q)
    out: dict = {"graph": {"n_x": g.n_x, "n_y": g.n_y, "m": g.m}, "bounds": rep.to_dict()}
    if schema is None:
        return out
    rr = replication_report(g, schema)
    vr = validate(g, schema)
    sq = schema.q
    sqrt_bound = math.sqrt(g.m / sq)
    info = {
        "provenance": schema.provenance,
        "q": sq,
        "p": schema.p,
        "complete": is_complete(schema),
        "valid": vr.ok,
        **rr.to_dict(),
        "rate_le_upper_a": rr.rate <= Fraction(n, sq),
        "rate_le_upper_b": rr.rate <= Fraction(g.m, n),
        "rate_le_sqrt_mq": float(rr.rate) <= sqrt_bound + bounds.TOL,
        "rate_le_2sqrt_mq": float(rr.rate) <= 2 * sqrt_bound + bounds.TOL,
    }
    try:
        ex = bounds.brute_force_expansion(g, sq, budget=budget, jobs=jobs)
        p_low = bounds.reducer_lower_bound(g.m, ex.phi)
        info["reducer_floor"] = {
            "phi": ex.phi,
            "p_lower": fraction_str(p_low),
            "applies": info["complete"],
            "holds": schema.p >= p_low,
        }
    except BudgetError as exc:
        info["reducer_floor"] = f"skipped (budget): needs {exc.required}"
    out["schema"] = info
    return out


def cmd_analyze(args) -> int:
    g = _graph(args)
    schema = MappingSchema.load(args.schema) if args.schema else None
    q = args.q if args.q is not None else (schema.q if schema else None)
    if q is None:
        raise UsageError("analyze needs --q or --schema")
    _emit(_dump(analyze(g, q, schema, jobs=args.jobs)), args.output)
    return EXIT_OK


def cmd_expansion(args) -> int:
    mode = "distinct" if args.distinct else "with_replacement"
    try:
        summary = bounds.expansion_experiment(args.n, args.m, args.q, args.trials, args.seed,
                                              mode=mode, jobs=args.jobs)
    except (ValueError, InfeasibleError) as exc:
        raise UsageError(str(exc)) from None
    _emit(_dump(summary.to_dict()), args.output)
    if args.tsv:
        Path(args.tsv).write_text(summary.to_tsv(), encoding="ascii", newline="\n")
    return EXIT_OK


def _presence(g, spec: str, seed: int) -> execsim.PresenceSet:
    if spec == "all":
        return execsim.PresenceSet.everything(g)
    if spec in ("none", "empty"):
        return execsim.PresenceSet.nothing()
    if spec == "half":
        return execsim.PresenceSet.random(g, 0.5, seed)
    try:
        prob = float(spec)
    except ValueError:
        raise UsageError(f"bad presence {spec!r}") from None
    if not 0 <= prob <= 1:
        raise UsageError("presence probability must be in [0, 1]")
    return execsim.PresenceSet.random(g, prob, seed)


def cmd_run(args) -> int:
    g = _graph(args)
    schema = MappingSchema.load(args.schema)
    presence = _presence(g, args.presence, args.seed)
    trace = execsim.run(g, schema, presence, mode=args.mode)
    body = trace.to_dict()
    mx, my = presence.masks(g)
    e = g.edges
    body["expected"] = int((mx[e[:, 0]] & my[e[:, 1]]).sum())
    body["correct"] = body["expected"] == body["emitted"]
    _emit(_dump(body), args.output)
    if args.emitted:
        Path(args.emitted).write_text(trace.emitted_tsv(), encoding="ascii", newline="\n")
    return EXIT_OK


BENCH_HEADER = [
    "planner", "q", "status", "p", "rate", "rate_decimal", "complete", "valid",
    "upper_a", "upper_b", "sqrt_mq", "le_sqrt_mq", "le_2sqrt_mq", "closed_form",
]


def bench_rows(g, qs) -> list[list[str]]:
    cands = [("a", "halve"), ("b", "halve"), ("c", "halve")]
    if g.labels is not None:
        cands.append(("c", "weight"))
    if planners.is_hd1_up(g):
        cands.append(("prefix", "halve"))
    n = g.n
    rows = []
    for planner, strategy in cands:
        for q in qs:
            name = f"c:{strategy}" if planner == "c" else planner
            base = [name, str(q)]
            try:
                if planner == "b":
                    schema = planners.plan_b(g)
                else:
                    schema = build_schema(g, planner, q, strategy)
            except (IncompatibleError, PreconditionError) as exc:
                rows.append(base + [f"error: {exc}"] + [""] * (len(BENCH_HEADER) - 3))
                continue
            rr = replication_report(g, schema)
            sq = math.sqrt(g.m / q)
            closed = ""
            if planner == "prefix":
                closed = fraction_str(1 + Fraction(g.bits - (q.bit_length() - 1), 2))
            rows.append(base + [
                "ok",
                str(schema.p),
                fraction_str(rr.rate),
                f"{float(rr.rate):.6f}",
                str(is_complete(schema)).lower(),
                str(validate(g, schema).ok).lower(),
                fraction_str(Fraction(n, q)),
                fraction_str(Fraction(g.m, n)),
                f"{sq:.6f}",
                str(float(rr.rate) <= sq + bounds.TOL).lower(),
                str(float(rr.rate) <= 2 * sq + bounds.TOL).lower(),
                closed,
            ])
    return rows


def cmd_bench(args) -> int:
    g = _graph(args)
    try:
        qs = [int(v) for v in args.qs.split(",") if v]
    except ValueError:
        raise UsageError(f"bad --qs {args.qs!r}") from None
    if not qs or min(qs) < 1:
        raise UsageError("--qs needs positive integers")
    rows = bench_rows(g, qs)
    text = "\t".join(BENCH_HEADER) + "\n" + "".join("\t".join(r) + "\n" for r in rows)
    _emit(text, args.output)
    if not any(r[2] == "ok" for r in rows):
        return EXIT_INCOMPATIBLE
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="somepairs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("-o", "--output")

    p = sub.add_parser("gen", help="generate a connection graph")
    p.add_argument("family", choices=["hd1", "hd1_up", "random", "complete"])
    p.add_argument("--b", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--distinct", action="store_true")
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("plan", help="build a mapping schema")
    p.add_argument("planner", choices=["a", "b", "c", "prefix"])
    _add_graph_source(p)
    p.add_argument("--q", type=int)
    p.add_argument("--strategy", choices=sorted(planners.STRATEGIES), default="halve")
    p.add_argument("--complete", action="store_true", help="apply the completion transform")
    p.add_argument("--dedupe", action="store_true", help="drop identical reducers")
    common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="check coverage and capacity")
    _add_graph_source(p)
    p.add_argument("--schema", required=True)
    p.add_argument("--strict", action="store_true", help="exit 5 when the schema is invalid")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="bounds report, optionally against a schema")
    _add_graph_source(p)
    p.add_argument("--q", type=int)
    p.add_argument("--schema")
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("expansion", help="exact phi over random graphs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--distinct", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tsv", help="also write per-trial TSV here")
    common(p)
    p.set_defaults(func=cmd_expansion)

    p = sub.add_parser("run", help="simulate one MapReduce round")
    _add_graph_source(p)
    p.add_argument("--schema", required=True)
    p.add_argument("--presence", default="all", help="all, none, half, or a probability")
    p.add_argument("--mode", choices=["edges", "predicate"], default="edges")
    p.add_argument("--emitted", help="write emitted pairs as TSV here")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="compare planners over a q grid")
    _add_graph_source(p)
    p.add_argument("--qs", default="2,4,8,16")
    common(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvalidSchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (IncompatibleError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE


if __name__ == "__main__":
    sys.exit(main())
