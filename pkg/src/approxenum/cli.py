"""Command-line interface: enumeration, membership, counting, testing, benches.

All randomized commands require --seed (or ``--seed auto``, which draws one
from system entropy and reports it on stderr); two runs with the same inputs
and seed produce byte-identical stdout.  Tuples stream to stdout one per
line, terminated by ``-- end --`` (or ``-- truncated --`` when --max-outputs
hits); run summaries go to stderr.

Exit codes: 0 success, 1 selftest failure, 2 bad inputs or parameters,
3 mode/query mismatch.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys

from . import figures
from .db import Database, Schema, load_database
from .engine import (
    enumerate_general,
    enumerate_general_strengthened,
    enumerate_hanf_testable,
    enumerate_local,
    enumerate_local_strengthened,
)
from .errors import ApproxEnumError, NotLocal, ParseError
from .exact import answer_set, local_member
from .neighborhoods import TypeRegistry
from .query import QueryNF, is_local, parse_query
from .services import approx_count, membership_answer, membership_preprocess
from .splits import unique_split_of
from .testers import compute_type_set, example_tester, make_tester_factory
from .typecache import TypeCache


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_inputs(args, registry: TypeRegistry) -> tuple[Schema, Database, QueryNF | None]:
    schema, db = load_database(_read(args.schema), _read(args.db), args.d)
    query = None
    if getattr(args, "query", None):
        query = parse_query(_read(args.query), schema, registry)
    return schema, db, query


def _resolve_seed(args) -> int:
    if args.seed == "auto":
        seed = secrets.randbits(48)
        print(f"seed: {seed}", file=sys.stderr)
        return seed
    try:
        return int(args.seed)
    except ValueError:
        raise ParseError(f"--seed must be an integer or 'auto', got {args.seed!r}") from None


def _parse_tuple(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.replace(",", " ").split())
    except ValueError:
        raise ParseError(f"bad tuple {text!r}") from None


def _emit_stream(out):
    def emit(tup):
        print(" ".join(str(e) for e in tup), file=out)

    return emit


def cmd_enumerate(args) -> int:
    registry = TypeRegistry()
    schema, db, q = _load_inputs(args, registry)
    if q is None:
        raise ParseError("enumerate requires --query")
    mode = args.mode
    if mode == "exact":
        answers = answer_set(db, q, registry)
        for tup in answers.tuples:
            print(" ".join(str(e) for e in tup))
        print("-- end --")
        print(f"outputs={len(answers.tuples)} mode=exact", file=sys.stderr)
        return 0
    if mode in ("local", "local-strengthened") and not is_local(q):
        print("error: local modes require a sentence-free query", file=sys.stderr)
        return 3
    seed = _resolve_seed(args)
    emit = _emit_stream(sys.stdout)
    common = dict(max_outputs=args.max_outputs, instrument=args.instrument)
    if mode == "local":
        summary = enumerate_local(db, q, args.gamma, seed, emit, registry=registry, **common)
    elif mode == "local-strengthened":
        summary = enumerate_local_strengthened(
            db, q, args.gamma, seed, emit, registry=registry,
            expansion_cap=args.expansion_cap, **common)
    elif mode == "general":
        summary = enumerate_general(db, q, args.gamma, args.epsilon, seed, emit,
                                    registry=registry, tester=args.tester, **common)
    elif mode == "general-strengthened":
        summary = enumerate_general_strengthened(
            db, q, args.gamma, args.epsilon, seed, emit, registry=registry,
            tester=args.tester, expansion_cap=args.expansion_cap, **common)
    elif mode == "hanf":
        factory = make_tester_factory(args.tester, q.k)
        plugins = [factory(c, len(q.clauses)) for c in q.clauses]
        summary = enumerate_hanf_testable(
            db, q, args.gamma, args.epsilon, seed, emit, plugins=plugins,
            registry=registry, expansion_cap=args.expansion_cap, **common)
    else:
        raise ParseError(f"unknown mode {mode!r}")
    print("-- truncated --" if summary.truncated else "-- end --")
    report = {
        "mode": summary.mode, "outputs": summary.outputs, "n": summary.n,
        "space": summary.space_size, "mu": summary.mu, "delta": summary.delta,
        "q": summary.q, "alpha": summary.alpha, "batch": summary.batch,
        "conn": summary.conn, "expansion_cap": summary.expansion_cap,
        "seed": seed, "samples": summary.samples_drawn,
        "seen": summary.seen_count, "truncated": summary.truncated,
    }
    if args.instrument:
        report.update(max_delay_ops=summary.max_delay_ops,
                      delay_bound=summary.delay_bound,
                      first_output_ops=summary.first_output_ops,
                      max_oracle_per_output=summary.max_oracle_per_output)
    if summary.preprocessing:
        report["preprocessing"] = summary.preprocessing
    print(json.dumps(report, sort_keys=True), file=sys.stderr)
    return 0


def cmd_member(args) -> int:
    registry = TypeRegistry()
    schema, db, q = _load_inputs(args, registry)
    if q is None:
        raise ParseError("member requires --query")
    abar = _parse_tuple(args.tuple)
    if len(abar) != q.k:
        raise ParseError(f"tuple arity {len(abar)} does not match query k={q.k}")
    if args.exact:
        cache = TypeCache(db, registry)
        if is_local(q):
            verdict = local_member(cache, abar, q)
        else:
            from .exact import eval_query

            verdict = eval_query(cache, abar, q)
        print("true" if verdict else "false")
        return 0
    seed = _resolve_seed(args)
    index = membership_preprocess(db, q, args.epsilon, seed, registry=registry,
                                  tester=args.tester)
    print("true" if membership_answer(index, abar) else "false")
    print(json.dumps({"type_set": sorted(index.type_set.members),
                      "exact_branch": index.type_set.exact, "seed": seed},
                     sort_keys=True), file=sys.stderr)
    return 0


def cmd_count(args) -> int:
    registry = TypeRegistry()
    schema, db, q = _load_inputs(args, registry)
    if q is None:
        raise ParseError("count requires --query")
    seed = _resolve_seed(args)
    est = approx_count(db, q, args.epsilon, args.lam, seed, registry=registry,
                       tester=args.tester)
    print(f"{est.estimate:.3f}")
    print(json.dumps({"half_width": est.half_width, "conn": est.conn,
                      "per_arity": {str(k): v for k, v in est.per_arity.items()},
                      "sample_sizes": {str(k): v for k, v in est.sample_sizes.items()},
                      "type_set": sorted(est.type_set.members), "seed": seed},
                     sort_keys=True), file=sys.stderr)
    return 0


def cmd_test(args) -> int:
    registry = TypeRegistry()
    schema, db, q = _load_inputs(args, registry)
    seed = _resolve_seed(args)
    if q is None:
        verdict = example_tester(db, args.epsilon, seed, registry)
        print("accept" if verdict.accept else "reject")
        print(json.dumps({"samples": verdict.samples_used, "seed": seed,
                          **{k: v for k, v in verdict.detail.items() if k != "votes"}},
                         sort_keys=True, default=str), file=sys.stderr)
        return 0
    cache = TypeCache(db, registry)
    factory = make_tester_factory(args.tester, q.k)
    tset = compute_type_set(cache, q, args.epsilon, seed, factory=factory)
    for i, clause in enumerate(q.clauses):
        accepted = clause.sphere.type.type_id in tset.members
        print(f"clause {i + 1}: {'accept' if accepted else 'reject'}")
    print(json.dumps({"type_set": sorted(tset.members), "exact_branch": tset.exact,
                      "seed": seed}, sort_keys=True), file=sys.stderr)
    return 0


def cmd_split(args) -> int:
    registry = TypeRegistry()
    schema, db, _ = _load_inputs(args, registry)
    btuple = _parse_tuple(args.tuple)
    cache = TypeCache(db, registry)
    split = unique_split_of(cache, btuple, args.r)
    for i, grp in enumerate(split.groups, start=1):
        t = registry.by_id(grp.anchor_type_id)
        print(f"group {i}: coords={list(grp.coords)} anchor_type={grp.anchor_type_id} "
              f"anchor_size={t.cardinality} binding={list(grp.binding.positions)}")
    return 0


def _bench_family(name: str, n: int, registry: TypeRegistry):
    if name == "iso-pairs":
        db = figures.isolated_db(n)
        q_local = figures.isolated_pair_query(registry, radius=2)
        types = figures.shape_types(registry)
        from .query import Clause, HanfSentence, QueryNF

        sphere = q_local.clauses[0].sphere
        q_general = QueryNF(k=2, radius=2, degree_bound=3, clauses=(
            Clause(sphere, (HanfSentence(True, 1, types["marker"], 2),)),))
        return db, q_local, q_general
    if name == "tree-copies":
        if n % figures.SHAPE_SIZE:
            raise ParseError(f"tree-copies sizes must be multiples of {figures.SHAPE_SIZE}")
        db = figures.pair_a_copies(n // figures.SHAPE_SIZE)
        q_local = figures.local_pair_a_query(registry)
        q_general = figures.demo_query(registry)
        return db, q_local, q_general
    raise ParseError(f"unknown family {name!r}")


def cmd_bench_delay(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s]
    except ValueError:
        raise ParseError(f"bad size list {args.sizes!r}") from None
    if not sizes:
        raise ParseError("empty size sweep")
    seed = _resolve_seed(args)
    registry = TypeRegistry()
    rows = []
    for n in sizes:
        db, q_local, q_general = _bench_family(args.family, n, registry)
        sink = lambda tup: None
        if args.mode == "local":
            summary = enumerate_local(db, q_local, args.gamma, seed, sink,
                                      registry=registry, instrument=True,
                                      max_outputs=args.max_outputs, keep_delays=True)
        else:
            summary = enumerate_general(db, q_general, args.gamma, args.epsilon, seed,
                                        sink, registry=registry, tester=args.tester,
                                        instrument=True, max_outputs=args.max_outputs,
                                        keep_delays=True)
        delays = sorted(summary.delays) or [0]
        p99 = delays[min(len(delays) - 1, int(0.99 * len(delays)))]
        rows.append((n, summary.outputs, summary.max_delay_ops, p99,
                     summary.delay_bound, summary.max_oracle_per_output))
    print(f"{'n':>10} {'outputs':>8} {'max_ops':>8} {'p99_ops':>8} {'bound':>8} {'max_oracle':>10}")
    for row in rows:
        print(f"{row[0]:>10} {row[1]:>8} {row[2]:>8} {row[3]:>8} {row[4]:>8} {row[5]:>10}")
    return 0


def cmd_selftest(args) -> int:
    from . import selfcheck

    if args.scale <= 0:
        print("warning: scale 0 requested; all suites vacuously pass", file=sys.stderr)
        print("selftest: vacuous pass (no trials)")
        return 0
    results = selfcheck.run_criteria(scale=args.scale, fault=args.inject_fault,
                                     only=args.only)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{res.name}] {status} - {res.detail}")
        failed += not res.passed
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="approxenum", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, query_required=True):
        p.add_argument("--schema", required=True, help="schema file")
        p.add_argument("--db", required=True, help="database file")
        p.add_argument("--d", type=int, required=True, help="degree bound")
        p.add_argument("--query", required=query_required, help="query file")

    p = sub.add_parser("enumerate", help="stream (approximate) query answers")
    add_io(p)
    p.add_argument("--mode", default="local",
                   choices=["exact", "local", "local-strengthened", "general",
                            "general-strengthened", "hanf"])
    p.add_argument("--gamma", type=float, default=0.1, help="answer density threshold")
    p.add_argument("--epsilon", type=float, default=0.1, help="closeness parameter")
    p.add_argument("--seed", default=None)
    p.add_argument("--max-outputs", type=int, default=None)
    p.add_argument("--tester", default="exact", choices=["exact", "sampling", "example22"])
    p.add_argument("--expansion-cap", type=int, default=1,
                   help="bound on found tuples per leader tuple (strengthened modes)")
    p.add_argument("--instrument", action="store_true", help="count per-output operations")
    p.set_defaults(func=cmd_enumerate, needs_seed=lambda a: a.mode != "exact")

    p = sub.add_parser("exact-enumerate", help="brute-force reference enumeration")
    add_io(p)
    p.set_defaults(func=cmd_enumerate, mode="exact", needs_seed=lambda a: False,
                   gamma=0.1, epsilon=0.1, seed="0", max_outputs=None,
                   tester="exact", expansion_cap=1, instrument=False)

    p = sub.add_parser("member", help="approximate membership for one tuple")
    add_io(p)
    p.add_argument("--tuple", required=True, help="comma separated elements")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--seed", default=None)
    p.add_argument("--exact", action="store_true", help="use the exact oracle")
    p.add_argument("--tester", default="exact", choices=["exact", "sampling", "example22"])
    p.set_defaults(func=cmd_member, needs_seed=lambda a: not a.exact)

    p = sub.add_parser("count", help="approximate answer count")
    add_io(p)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p.add_argument("--seed", default=None)
    p.add_argument("--tester", default="exact", choices=["exact", "sampling", "example22"])
    p.set_defaults(func=cmd_count, needs_seed=lambda a: True)

    p = sub.add_parser("test", help="run property testers")
    add_io(p, query_required=False)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--seed", default=None)
    p.add_argument("--tester", default="exact", choices=["exact", "sampling", "example22"])
    p.set_defaults(func=cmd_test, needs_seed=lambda a: True)

    p = sub.add_parser("split", help="print the unique split of a tuple")
    add_io(p, query_required=False)
    p.add_argument("--tuple", required=True)
    p.add_argument("--r", type=int, required=True)
    p.set_defaults(func=cmd_split, needs_seed=lambda a: False)

    p = sub.add_parser("bench-delay", help="instrumented delay sweep over sizes")
    p.add_argument("--family", default="iso-pairs", choices=["iso-pairs", "tree-copies"])
    p.add_argument("--sizes", required=True, help="comma separated domain sizes")
    p.add_argument("--mode", default="local", choices=["local", "general"])
    p.add_argument("--gamma", type=float, default=0.3)
    p.add_argument("--epsilon", type=float, default=0.3)
    p.add_argument("--tester", default="sampling", choices=["exact", "sampling", "example22"])
    p.add_argument("--seed", default=None)
    p.add_argument("--max-outputs", type=int, default=1000)
    p.set_defaults(func=cmd_bench_delay, needs_seed=lambda a: True)

    p = sub.add_parser("selftest", help="reduced-trial acceptance suites")
    p.add_argument("--scale", type=float, default=0.2,
                   help="trial-count scale; 1.0 reproduces the full suites")
    p.add_argument("--inject-fault", default=None, choices=["dedup"],
                   help="negative control: break an invariant on purpose")
    p.add_argument("--only", default=None, help="comma separated criterion names")
    p.set_defaults(func=cmd_selftest, needs_seed=lambda a: False)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "needs_seed", lambda a: False)(args) and args.seed is None:
            print("error: this command requires --seed (or --seed auto)", file=sys.stderr)
            return 2
        return args.func(args)
    except NotLocal as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ApproxEnumError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
