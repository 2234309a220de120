"""Query representation: disjunctions of sphere clauses with count sentences.

A query is a disjunction of clauses; each clause pairs one sphere atom (the
answer tuple has this exact radius-r type) with a conjunction of signed count
sentences (at least / fewer than m elements carry some 1-centre type).  A
query whose clauses carry no sentences is *local*: membership of a tuple
depends only on its own r-ball.

The text grammar is line oriented::

    QUERY k=2 r=2 d=3
    CLAUSE
    SPHERE
    DOMAIN 8
    CENTRES 1 4
    E 1 2
    ...
    HANF - >= 1
    DOMAIN 8
    CENTRES 1
    E 1 2
    ...
    END

``HANF + = m`` is sugar for the pair of sentences (>= m) and NOT(>= m+1).
Neighbourhood blocks are interpreted at the query radius; a block whose
fragment has an element beyond distance r of the centres is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

from .db import Fragment, Schema, gaifman_ball
from .errors import (
    CentreCountMismatch,
    DegreeExceeded,
    ParseError,
    RadiusMismatch,
)
from .neighborhoods import CanonicalType, Neighbourhood, TypeRegistry


@dataclass(frozen=True)
class SphereAtom:
    type: CanonicalType
    radius: int


@dataclass(frozen=True)
class HanfSentence:
    negated: bool
    threshold: int
    type: CanonicalType
    radius: int


@dataclass(frozen=True)
class Clause:
    sphere: SphereAtom
    sentences: tuple[HanfSentence, ...]


@dataclass(frozen=True)
class QueryNF:
    k: int
    radius: int
    degree_bound: int
    clauses: tuple[Clause, ...]

    def sphere_type_ids(self) -> frozenset[int]:
        return frozenset(c.sphere.type.type_id for c in self.clauses)


def is_local(q: QueryNF) -> bool:
    """True iff the query is a plain disjunction of sphere atoms."""
    return all(not c.sentences for c in q.clauses)


def compute_conn(q: QueryNF) -> int:
    """Max component count over clause sphere types (1 for empty queries)."""
    if not q.clauses:
        return 1
    return max(c.sphere.type.component_count for c in q.clauses)


# -- validation --------------------------------------------------------------


def _validate_block(frag: Fragment, centres: tuple[int, ...], radius: int,
                    degree_bound: int, what: str) -> None:
    db = frag.as_database(degree_bound=max(2, degree_bound))
    for e in range(1, frag.size + 1):
        if db.degrees[e] > degree_bound:
            raise DegreeExceeded(e, db.degrees[e], degree_bound)
    covered = gaifman_ball(db, centres, radius)
    if len(covered) != frag.size:
        raise RadiusMismatch(
            f"{what}: {frag.size - len(covered)} element(s) beyond distance {radius} of the centres"
        )


def intern_block(frag: Fragment, centres: tuple[int, ...], radius: int,
                 degree_bound: int, registry: TypeRegistry, what: str) -> CanonicalType:
    _validate_block(frag, centres, radius, degree_bound, what)
    return registry.canonicalize(Neighbourhood(frag, centres, radius))


# -- text format -------------------------------------------------------------


def _parse_neighbourhood_lines(lines: list[tuple[int, str]], schema: Schema,
                               what: str) -> tuple[Fragment, tuple[int, ...]]:
    if not lines or not lines[0][1].startswith("DOMAIN"):
        raise ParseError(f"{what}: expected DOMAIN line")
    lineno, dom = lines[0]
    parts = dom.split()
    if len(parts) != 2:
        raise ParseError(f"line {lineno}: expected 'DOMAIN <m>'")
    try:
        m = int(parts[1])
    except ValueError:
        raise ParseError(f"line {lineno}: bad domain size") from None
    if len(lines) < 2 or not lines[1][1].startswith("CENTRES"):
        raise ParseError(f"{what}: expected CENTRES line after DOMAIN")
    lineno, cen = lines[1]
    try:
        centres = tuple(int(p) for p in cen.split()[1:])
    except ValueError:
        raise ParseError(f"line {lineno}: bad centre list") from None
    if not centres:
        raise ParseError(f"line {lineno}: empty centre list")
    for c in centres:
        if not (1 <= c <= m):
            raise ParseError(f"line {lineno}: centre {c} outside [1, {m}]")
    tuples_by_rel: list[list[tuple]] = [[] for _ in schema.relations]
    for lineno, line in lines[2:]:
        parts = line.split()
        name = parts[0]
        if name not in schema.by_name:
            raise ParseError(f"line {lineno}: unknown relation {name!r}")
        rel = schema.relations[schema.by_name[name]]
        if len(parts) - 1 != rel.arity:
            raise ParseError(f"line {lineno}: relation {name} expects {rel.arity} elements")
        try:
            tup = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer element") from None
        for e in tup:
            if not (1 <= e <= m):
                raise ParseError(f"line {lineno}: element {e} outside [1, {m}]")
        if rel.symmetric:
            if tup[0] == tup[1]:
                raise ParseError(f"line {lineno}: symmetric relations are irreflexive")
            tup = (min(tup), max(tup))
        tuples_by_rel[schema.by_name[name]].append(tup)
    frag = Fragment(schema, m, tuple(tuple(sorted(set(ts))) for ts in tuples_by_rel))
    return frag, centres


def parse_query(text: str, schema: Schema, registry: TypeRegistry) -> QueryNF:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append((lineno, line))
    if not lines:
        raise ParseError("empty query text")

    lineno, header = lines[0]
    parts = header.split()
    if parts[0] != "QUERY":
        raise ParseError(f"line {lineno}: expected QUERY header")
    fields = {}
    for p in parts[1:]:
        if "=" not in p:
            raise ParseError(f"line {lineno}: bad header field {p!r}")
        key, val = p.split("=", 1)
        try:
            fields[key] = int(val)
        except ValueError:
            raise ParseError(f"line {lineno}: bad header value {p!r}") from None
    for key in ("k", "r", "d"):
        if key not in fields:
            raise ParseError(f"line {lineno}: header missing {key}=")
    k, radius, d = fields["k"], fields["r"], fields["d"]
    if k < 1 or radius < 0 or d < 2:
        raise ParseError(f"line {lineno}: need k>=1, r>=0, d>=2")

    # split the body into CLAUSE sections, each a SPHERE block plus HANF blocks
    idx = 1
    clauses: list[Clause] = []
    seen_end = False
    while idx < len(lines):
        lineno, line = lines[idx]
        if line == "END":
            seen_end = True
            idx += 1
            if idx != len(lines):
                raise ParseError(f"line {lines[idx][0]}: content after END")
            break
        if line != "CLAUSE":
            raise ParseError(f"line {lineno}: expected CLAUSE or END")
        idx += 1
        if idx >= len(lines) or lines[idx][1] != "SPHERE":
            raise ParseError(f"line {lineno}: CLAUSE must start with a SPHERE block")
        idx += 1
        block_end = idx
        while block_end < len(lines) and lines[block_end][1].split()[0] not in ("HANF", "CLAUSE", "END"):
            block_end += 1
        frag, centres = _parse_neighbourhood_lines(lines[idx:block_end], schema, "SPHERE block")
        if len(centres) != k:
            raise CentreCountMismatch(
                f"SPHERE block near line {lineno}: {len(centres)} centres, query has k={k}"
            )
        sphere_type = intern_block(frag, centres, radius, d, registry, "SPHERE block")
        idx = block_end

        sentences: list[HanfSentence] = []
        while idx < len(lines) and lines[idx][1].split()[0] == "HANF":
            hline_no, hline = lines[idx]
            hparts = hline.split()
            if len(hparts) != 4 or hparts[1] not in ("+", "-") or hparts[2] not in (">=", "="):
                raise ParseError(f"line {hline_no}: expected 'HANF <+|-> <>=|=> <m>'")
            try:
                threshold = int(hparts[3])
            except ValueError:
                raise ParseError(f"line {hline_no}: bad threshold") from None
            if threshold < 1:
                raise ParseError(f"line {hline_no}: threshold must be >= 1")
            idx += 1
            block_end = idx
            while block_end < len(lines) and lines[block_end][1].split()[0] not in ("HANF", "CLAUSE", "END"):
                block_end += 1
            hfrag, hcentres = _parse_neighbourhood_lines(lines[idx:block_end], schema, "HANF block")
            if len(hcentres) != 1:
                raise CentreCountMismatch(
                    f"HANF block near line {hline_no}: needs exactly 1 centre"
                )
            htype = intern_block(hfrag, hcentres, radius, d, registry, "HANF block")
            negated = hparts[1] == "-"
            if hparts[2] == "=":
                if negated:
                    raise ParseError(f"line {hline_no}: exact counts only with sign '+'")
                sentences.append(HanfSentence(False, threshold, htype, radius))
                sentences.append(HanfSentence(True, threshold + 1, htype, radius))
            else:
                sentences.append(HanfSentence(negated, threshold, htype, radius))
            idx = block_end
        clauses.append(Clause(SphereAtom(sphere_type, radius), tuple(sentences)))
    if not seen_end:
        raise ParseError("query text not terminated by END")

    deduped: list[Clause] = []
    seen_types: dict[int, Clause] = {}
    for c in clauses:
        tid = c.sphere.type.type_id
        prev = seen_types.get(tid)
        if prev is None:
            seen_types[tid] = c
            deduped.append(c)
        elif prev == c:
            continue  # exact duplicate clause, merge silently
        else:
            raise ParseError(
                "two clauses share a sphere type but differ in sentences; "
                "clause sphere types must be pairwise distinct"
            )
    return QueryNF(k=k, radius=radius, degree_bound=d, clauses=tuple(deduped))


def _print_neighbourhood(t: CanonicalType) -> list[str]:
    frag = t.representative.fragment
    lines = [f"DOMAIN {frag.size}",
             "CENTRES " + " ".join(str(c) for c in t.representative.centres)]
    for rel, tups in zip(frag.schema.relations, frag.tuples):
        for tup in tups:
            lines.append(rel.name + " " + " ".join(str(e) for e in tup))
    return lines


def print_query(q: QueryNF) -> str:
    lines = [f"QUERY k={q.k} r={q.radius} d={q.degree_bound}"]
    for c in q.clauses:
        lines.append("CLAUSE")
        lines.append("SPHERE")
        lines.extend(_print_neighbourhood(c.sphere.type))
        for s in c.sentences:
            sign = "-" if s.negated else "+"
            lines.append(f"HANF {sign} >= {s.threshold}")
            lines.extend(_print_neighbourhood(s.type))
    lines.append("END")
    return "\n".join(lines) + "\n"
