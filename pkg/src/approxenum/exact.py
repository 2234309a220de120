"""Brute-force reference engine: exact evaluation and edit-distance closeness.

Everything here favours transparency over speed and serves as the oracle the
randomized components are validated against.  ``answer_set`` scans the full
tuple space; ``closeness_check`` exhaustively searches edit sets on instances
small enough to enumerate.  Both refuse (BudgetExceeded) rather than guess
when an instance is too large.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .db import Database
from .errors import BudgetExceeded, NotLocal
from .neighborhoods import TypeRegistry
from .query import HanfSentence, QueryNF, SphereAtom, is_local
from .typecache import TypeCache


@dataclass(frozen=True)
class AnswerSet:
    query: QueryNF
    tuples: tuple[tuple[int, ...], ...]  # sorted, duplicate-free

    def __contains__(self, item) -> bool:
        return tuple(item) in set(self.tuples)


def eval_sphere(cache: TypeCache, abar: Sequence[int], sphere: SphereAtom) -> bool:
    if len(abar) != len(sphere.type.centre_positions):
        return False
    return cache.tuple_type(tuple(abar), sphere.radius) == sphere.type.type_id


def count_type(cache: TypeCache, type_id: int, radius: int) -> int:
    """Exact number of elements with the given 1-centre type, by full scan."""
    total = 0
    for a in range(1, cache.db.n + 1):
        if cache.element_type(a, radius) == type_id:
            total += 1
    return total


def eval_hanf(cache: TypeCache, sentence: HanfSentence) -> bool:
    threshold = max(1, sentence.threshold)  # parser forbids 0; clamp defensively
    holds = count_type(cache, sentence.type.type_id, sentence.radius) >= threshold
    return not holds if sentence.negated else holds


def eval_query(cache: TypeCache, abar: Sequence[int], q: QueryNF,
               sentence_verdicts: Optional[dict[int, bool]] = None) -> bool:
    """True iff some clause's sphere matches and all its sentences hold.

    ``sentence_verdicts`` lets callers share the per-clause sentence scans
    across many tuples (they do not depend on the tuple).
    """
    abar = tuple(abar)
    if len(abar) != q.k:
        return False
    for idx, clause in enumerate(q.clauses):
        if sentence_verdicts is not None:
            sentences_ok = sentence_verdicts[idx]
        else:
            sentences_ok = all(eval_hanf(cache, s) for s in clause.sentences)
        if sentences_ok and eval_sphere(cache, abar, clause.sphere):
            return True
    return False


def clause_sentence_verdicts(cache: TypeCache, q: QueryNF) -> dict[int, bool]:
    return {idx: all(eval_hanf(cache, s) for s in clause.sentences)
            for idx, clause in enumerate(q.clauses)}


def answer_set(db: Database, q: QueryNF, registry: TypeRegistry,
               budget: int = 2_000_000) -> AnswerSet:
    """All answers by full scan over the tuple space; BudgetExceeded beyond the cap."""
    if db.n ** q.k > budget:
        raise BudgetExceeded(f"n^k = {db.n ** q.k} exceeds answer_set budget {budget}")
    cache = TypeCache(db, registry)
    verdicts = clause_sentence_verdicts(cache, q)
    live_types = {c.sphere.type.type_id for i, c in enumerate(q.clauses) if verdicts[i]}
    out = []
    for abar in itertools.product(range(1, db.n + 1), repeat=q.k):
        if cache.tuple_type(abar, q.radius) in live_types:
            out.append(abar)
    return AnswerSet(q, tuple(sorted(out)))


def local_member(cache: TypeCache, abar: Sequence[int], q: QueryNF) -> bool:
    """Constant-work membership for sentence-free queries.

    One neighbourhood type lookup and a set test; raises NotLocal otherwise.
    """
    if not is_local(q):
        raise NotLocal("query carries count sentences")
    return cache.tuple_type(tuple(abar), q.radius) in q.sphere_type_ids()


# -- edit-distance closeness --------------------------------------------------


def _edit_candidates(db: Database, insertion_space_cap: int) -> list[tuple[str, int, tuple]]:
    """All legal single edits: deletions of present tuples, insertions of absent ones."""
    edits: list[tuple[str, int, tuple]] = []
    for rel_idx, tups in enumerate(db.tuples):
        for t in tups:
            edits.append(("del", rel_idx, t))
    space = 0
    for rel_idx, rel in enumerate(db.schema.relations):
        present = set(db.tuples[rel_idx])
        if rel.symmetric:
            universe: Iterable[tuple] = itertools.combinations(range(1, db.n + 1), 2)
        else:
            universe = itertools.product(range(1, db.n + 1), repeat=rel.arity)
        for t in universe:
            space += 1
            if space > insertion_space_cap:
                raise BudgetExceeded(
                    f"insertion space exceeds {insertion_space_cap}; instance too large for the edit search"
                )
            if t not in present:
                edits.append(("ins", rel_idx, t))
    return edits


def _apply_edits(db: Database, edits: Sequence[tuple[str, int, tuple]]) -> Optional[Database]:
    """Edited database, or None when the degree bound would break."""
    deltas: dict[int, int] = {}
    for kind, rel_idx, t in edits:
        step = 1 if kind == "ins" else -1
        for e in set(t):
            deltas[e] = deltas.get(e, 0) + step
    for e, delta in deltas.items():
        if db.degrees[e] + delta > db.degree_bound:
            return None
    new_tuples = []
    for rel_idx in range(len(db.schema.relations)):
        tups = set(db.tuples[rel_idx])
        for kind, ri, t in edits:
            if ri != rel_idx:
                continue
            if kind == "del":
                tups.discard(t)
            else:
                tups.add(t)
        new_tuples.append(sorted(tups))
    return Database(db.schema, db.n, db.degree_bound, new_tuples)


def closeness_check(db: Database, abar: Sequence[int], q: QueryNF, epsilon: float,
                    registry: TypeRegistry, edit_budget_cap: int = 3,
                    insertion_space_cap: int = 2000) -> bool:
    """Can at most floor(epsilon*d*n) tuple edits make ``abar`` an answer?

    The edited database must stay within the degree bound (the only class
    constraint enforced here) and must leave the radius-r type of ``abar``
    unchanged.  Exhaustive over edit sets, so only desk-scale instances are
    admissible; a budget above ``edit_budget_cap`` raises BudgetExceeded
    rather than returning a wrong answer.  Since the type of ``abar`` is
    preserved, only clauses whose sphere already matches can ever fire, which
    prunes the search to their sentences.
    """
    abar = tuple(abar)
    budget = int(epsilon * db.degree_bound * db.n)
    if budget > edit_budget_cap:
        raise BudgetExceeded(f"edit budget {budget} exceeds cap {edit_budget_cap}")

    cache = TypeCache(db, registry)
    own_type = cache.tuple_type(abar, q.radius)
    matching = [c for c in q.clauses if c.sphere.type.type_id == own_type]
    if not matching:
        return False  # a preserved type can never satisfy any clause
    if eval_query(cache, abar, q):
        return True  # zero edits suffice

    edits = _edit_candidates(db, insertion_space_cap)
    for size in range(1, budget + 1):
        for combo in itertools.combinations(edits, size):
            edited = _apply_edits(db, combo)
            if edited is None:
                continue
            ecache = TypeCache(edited, registry)
            if ecache.tuple_type(abar, q.radius) != own_type:
                continue
            for clause in matching:
                if all(eval_hanf(ecache, s) for s in clause.sentences):
                    return True
    return False
