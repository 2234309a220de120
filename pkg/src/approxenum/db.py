"""Bounded-degree relational databases with local (oracle-style) access.

A database stores, per relation, a lexicographically sorted tuple list plus an
incidence index mapping each element to the tuples containing it.  All reads
used by the rest of the package go through that index, so any consumer only
ever touches local parts of the database: the j-th tuple of relation R
containing element i, the Gaifman neighbours of an element, balls of bounded
radius.  Databases are immutable after construction and safe to share across
threads; the only mutable field is a plain counter of index probes used by the
delay instrumentation.

The domain is always [1, n].  An undirected graph is modelled as a binary
relation flagged ``symmetric``: each edge is stored once as a sorted pair, the
incidence index exposes it from both endpoints, and isomorphism treats the
pair as unordered.  This keeps the degree of a vertex equal to its number of
incident edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .errors import (
    ArityMismatch,
    DegreeExceeded,
    ElementOutOfRange,
    IndexOutOfRange,
    ParseError,
)

Tuple_ = tuple  # readability alias in annotations below


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    symmetric: bool = False


class Schema:
    """Ordered list of named relations with fixed arities."""

    def __init__(self, relations: Sequence[Relation]):
        names = [r.name for r in relations]
        if len(set(names)) != len(names):
            raise ParseError("relation names must be unique")
        for r in relations:
            if r.arity < 1:
                raise ParseError(f"relation {r.name}: arity must be >= 1")
            if r.symmetric and r.arity != 2:
                raise ParseError(f"relation {r.name}: symmetric requires arity 2")
        self.relations: tuple[Relation, ...] = tuple(relations)
        self.by_name = {r.name: i for i, r in enumerate(self.relations)}

    @property
    def size(self) -> int:
        return sum(r.arity for r in self.relations)

    def signature(self) -> tuple:
        return tuple((r.name, r.arity, r.symmetric) for r in self.relations)

    def __eq__(self, other) -> bool:
        return isinstance(other, Schema) and self.signature() == other.signature()

    def __hash__(self) -> int:
        return hash(self.signature())

    @classmethod
    def parse(cls, text: str) -> "Schema":
        """Parse lines of the form ``relation <name> <arity> [symmetric]``."""
        rels = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] != "relation" or len(parts) not in (3, 4):
                raise ParseError(f"schema line {lineno}: expected 'relation <name> <arity> [symmetric]'")
            name = parts[1]
            try:
                arity = int(parts[2])
            except ValueError:
                raise ParseError(f"schema line {lineno}: bad arity {parts[2]!r}") from None
            symmetric = False
            if len(parts) == 4:
                if parts[3] != "symmetric":
                    raise ParseError(f"schema line {lineno}: unknown flag {parts[3]!r}")
                symmetric = True
            rels.append(Relation(name, arity, symmetric))
        return cls(rels)

    def serialize(self) -> str:
        lines = []
        for r in self.relations:
            flag = " symmetric" if r.symmetric else ""
            lines.append(f"relation {r.name} {r.arity}{flag}")
        return "\n".join(lines) + "\n"


def _normalize(rel: Relation, tup: Tuple_) -> Tuple_:
    if rel.symmetric:
        if tup[0] == tup[1]:
            raise ParseError(f"relation {rel.name}: symmetric relations are irreflexive, got {tup}")
        return (min(tup), max(tup))
    return tup


class Database:
    """Immutable bounded-degree database over a fixed schema.

    ``tuples[i]`` is the sorted tuple list of relation ``i``;
    ``incidence[i][a]`` lists, in the same order, the indices of the tuples of
    relation ``i`` that contain element ``a``.  ``degrees[a]`` counts tuples
    containing ``a`` across all relations and never exceeds ``degree_bound``.
    """

    __slots__ = ("schema", "n", "degree_bound", "tuples", "incidence", "degrees", "probes")

    def __init__(self, schema: Schema, n: int, degree_bound: int,
                 tuples_by_rel: Sequence[Iterable[Tuple_]]):
        if n < 0:
            raise ParseError("domain size must be >= 0")
        if degree_bound < 2:
            raise ParseError("degree bound must be >= 2")
        self.schema = schema
        self.n = n
        self.degree_bound = degree_bound
        self.probes = 0  # incidence probes, for delay instrumentation only

        clean: list[tuple[Tuple_, ...]] = []
        for rel, tups in zip(schema.relations, tuples_by_rel):
            seen = set()
            for t in tups:
                t = tuple(t)
                if len(t) != rel.arity:
                    raise ArityMismatch(f"relation {rel.name}: tuple {t} has arity {len(t)}")
                for e in t:
                    if not (1 <= e <= n):
                        raise ElementOutOfRange(f"relation {rel.name}: element {e} outside [1, {n}]")
                seen.add(_normalize(rel, t))
            clean.append(tuple(sorted(seen)))
        self.tuples: tuple[tuple[Tuple_, ...], ...] = tuple(clean)

        degrees = [0] * (n + 1)
        incidence: list[dict[int, list[int]]] = []
        for rel_idx, tups in enumerate(self.tuples):
            index: dict[int, list[int]] = {}
            for pos, t in enumerate(tups):
                for e in set(t):
                    index.setdefault(e, []).append(pos)
                    degrees[e] += 1
            incidence.append(index)
        self.incidence: tuple[dict[int, list[int]], ...] = tuple(incidence)
        self.degrees = degrees
        for a in range(1, n + 1):
            if degrees[a] > degree_bound:
                raise DegreeExceeded(a, degrees[a], degree_bound)

    # -- oracle access -----------------------------------------------------

    def oracle(self, rel_name: str, i: int, j: int) -> Optional[Tuple_]:
        """Return the j-th tuple (lexicographic order) of a relation containing i.

        Returns None when fewer than j such tuples exist.  1-based i and j;
        i must lie in the domain and j in [1, degree bound].
        """
        if rel_name not in self.schema.by_name:
            raise IndexOutOfRange(f"unknown relation {rel_name!r}")
        if not (1 <= i <= self.n):
            raise IndexOutOfRange(f"element index {i} outside [1, {self.n}]")
        if not (1 <= j <= self.degree_bound):
            raise IndexOutOfRange(f"tuple rank {j} outside [1, {self.degree_bound}]")
        rel_idx = self.schema.by_name[rel_name]
        self.probes += 1
        positions = self.incidence[rel_idx].get(i)
        if positions is None or len(positions) < j:
            return None
        return self.tuples[rel_idx][positions[j - 1]]

    def incident_tuples(self, a: int) -> Iterator[tuple[int, Tuple_]]:
        """Yield (relation index, tuple) for every tuple containing ``a``.

        Equivalent to probing the oracle with j = 1..deg for each relation;
        the probe counter is charged accordingly.
        """
        for rel_idx in range(len(self.schema.relations)):
            positions = self.incidence[rel_idx].get(a, ())
            self.probes += len(positions) + 1
            for pos in positions:
                yield rel_idx, self.tuples[rel_idx][pos]

    def neighbours(self, a: int) -> set[int]:
        out = set()
        for _, t in self.incident_tuples(a):
            out.update(t)
        out.discard(a)
        return out

    def degree(self, a: int) -> int:
        if not (1 <= a <= self.n):
            raise IndexOutOfRange(f"element {a} outside [1, {self.n}]")
        return self.degrees[a]


def oracle_query(db: Database, rel_name: str, i: int, j: int) -> Optional[Tuple_]:
    return db.oracle(rel_name, i, j)


def gaifman_ball(db: Database, elements: Sequence[int], radius: int) -> set[int]:
    """All elements at distance <= radius from the given tuple, by BFS.

    Work is bounded by the ball size times the degree bound; no global scan.
    """
    if radius < 0:
        raise IndexOutOfRange("radius must be >= 0")
    frontier = set()
    for a in elements:
        if not (1 <= a <= db.n):
            raise ElementOutOfRange(f"element {a} outside [1, {db.n}]")
        frontier.add(a)
    ball = set(frontier)
    for _ in range(radius):
        nxt = set()
        for a in frontier:
            for b in db.neighbours(a):
                if b not in ball:
                    nxt.add(b)
        ball.update(nxt)
        frontier = nxt
        if not frontier:
            break
    return ball


@dataclass(frozen=True)
class Fragment:
    """Sub-database over contiguous local ids 1..size.

    ``orig`` maps local ids back to source elements (``orig[i-1]`` is the
    source id of local element i); it is None for synthetic fragments such as
    canonical representatives.  ``tuples`` holds, per relation of the schema,
    a sorted tuple of local-id tuples.
    """

    schema: Schema
    size: int
    tuples: tuple[tuple[Tuple_, ...], ...]
    orig: Optional[tuple[int, ...]] = None

    def incident(self) -> dict[int, list[tuple[int, Tuple_]]]:
        out: dict[int, list[tuple[int, Tuple_]]] = {e: [] for e in range(1, self.size + 1)}
        for rel_idx, tups in enumerate(self.tuples):
            for t in tups:
                for e in set(t):
                    out[e].append((rel_idx, t))
        return out

    def gaifman_edges(self) -> set[tuple[int, int]]:
        edges = set()
        for tups in self.tuples:
            for t in tups:
                comps = sorted(set(t))
                for i in range(len(comps)):
                    for j in range(i + 1, len(comps)):
                        edges.add((comps[i], comps[j]))
        return edges

    def component_count(self) -> int:
        parent = list(range(self.size + 1))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.gaifman_edges():
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        return len({find(e) for e in range(1, self.size + 1)})

    def as_database(self, degree_bound: int) -> Database:
        return Database(self.schema, self.size, degree_bound, self.tuples)


def induced_subdb(db: Database, members: Iterable[int], order: Optional[Sequence[int]] = None) -> Fragment:
    """Fragment induced by a member set, relabelled to contiguous local ids.

    ``order`` fixes the local id assignment; by default members are numbered
    in ascending source id.  Only tuples with every component in the member
    set survive.
    """
    if order is None:
        order = sorted(set(members))
    else:
        order = list(order)
        if set(order) != set(members):
            raise ParseError("order must enumerate exactly the member set")
    local = {e: i + 1 for i, e in enumerate(order)}
    rel_tuples: list[tuple[Tuple_, ...]] = []
    member_set = set(order)
    for rel_idx, rel in enumerate(db.schema.relations):
        keep = set()
        # walk the incidence lists of members only; no global scan
        seen_positions = set()
        for e in order:
            for pos in db.incidence[rel_idx].get(e, ()):
                if pos in seen_positions:
                    continue
                seen_positions.add(pos)
                t = db.tuples[rel_idx][pos]
                if all(c in member_set for c in t):
                    mapped = tuple(local[c] for c in t)
                    keep.add(_normalize(rel, mapped))
        rel_tuples.append(tuple(sorted(keep)))
    return Fragment(db.schema, len(order), tuple(rel_tuples), orig=tuple(order))


def parse_database(schema: Schema, text: str, degree_bound: int) -> Database:
    """Parse the database text format.

    First non-comment line is ``domain <n>``; every further line is
    ``<relname> <e1> ... <e_ar>``.  Lines starting with ``#`` are comments.
    """
    n = None
    tuples_by_rel: list[list[Tuple_]] = [[] for _ in schema.relations]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if parts[0] != "domain" or len(parts) != 2:
                raise ParseError(f"db line {lineno}: expected 'domain <n>' first")
            try:
                n = int(parts[1])
            except ValueError:
                raise ParseError(f"db line {lineno}: bad domain size") from None
            continue
        name = parts[0]
        if name not in schema.by_name:
            raise ParseError(f"db line {lineno}: unknown relation {name!r}")
        rel = schema.relations[schema.by_name[name]]
        if len(parts) - 1 != rel.arity:
            raise ArityMismatch(f"db line {lineno}: relation {name} expects {rel.arity} elements")
        try:
            tup = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise ParseError(f"db line {lineno}: non-integer element") from None
        tuples_by_rel[schema.by_name[name]].append(tup)
    if n is None:
        raise ParseError("missing 'domain <n>' line")
    return Database(schema, n, degree_bound, tuples_by_rel)


def load_database(schema_text: str, db_text: str, degree_bound: int) -> tuple[Schema, Database]:
    schema = Schema.parse(schema_text)
    return schema, parse_database(schema, db_text, degree_bound)


def serialize_database(db: Database) -> str:
    lines = [f"domain {db.n}"]
    for rel, tups in zip(db.schema.relations, db.tuples):
        for t in tups:
            lines.append(rel.name + " " + " ".join(str(e) for e in t))
    return "\n".join(lines) + "\n"
