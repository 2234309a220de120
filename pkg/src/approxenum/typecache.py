"""Per-database caches for neighbourhood type lookups.

Membership checks in the enumeration engine reduce to "what is the type of
this tuple", evaluated many times against one immutable database.  The cache
exploits two structural facts:

* the type of a single element is a pure function of the element, so it can
  sit in a flat array filled on first touch (the vector variant services the
  engine's bulk rounds);
* when the components of a tuple are pairwise far apart (distance greater
  than 2r+1, so their balls neither meet nor touch through a tuple), the
  tuple's type is determined by the component types alone, via the disjoint
  composition interned in the registry.

Everything here is semantically transparent: ``tuple_type`` agrees with
extracting and canonicalizing the neighbourhood directly, which the test
suite checks property-style.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .db import Database, gaifman_ball
from .neighborhoods import TypeRegistry, embedding_into_representative, extract_neighbourhood


def group_positions(cache: "TypeCache", btuple: Sequence[int], radius: int) -> list[list[int]]:
    """Partition tuple positions into interaction components.

    Positions land in the same group exactly when their elements' radius-r
    balls are chained together (consecutive distance at most 2r+1); distinct
    groups are fully separated, with no tuple spanning them.  Groups are
    ordered by their smallest position; 0-based positions.
    """
    k = len(btuple)
    parent = list(range(k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(k):
        for j in range(i + 1, k):
            if find(i) != find(j) and cache.within_chain_distance(btuple[i], btuple[j], radius):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


class TypeCache:
    """Lazy per-database caches keyed by (element, radius)."""

    def __init__(self, db: Database, registry: TypeRegistry):
        self.db = db
        self.registry = registry
        self._balls: dict[tuple[int, int], frozenset[int]] = {}
        self._etype: dict[int, np.ndarray] = {}  # radius -> array of type ids (-1 unknown)
        self._tuple_memo: dict[tuple, int] = {}
        self._anchor_memo: dict[tuple[int, int], tuple[int, dict[int, int]]] = {}

    # -- balls and distances -------------------------------------------------

    def ball(self, element: int, radius: int) -> frozenset[int]:
        key = (element, radius)
        hit = self._balls.get(key)
        if hit is None:
            hit = frozenset(gaifman_ball(self.db, (element,), radius))
            self._balls[key] = hit
        return hit

    def within_chain_distance(self, a: int, b: int, radius: int) -> bool:
        """dist(a, b) <= 2*radius+1, tested with two cached balls."""
        if a == b:
            return True
        return not self.ball(a, radius).isdisjoint(self.ball(b, radius + 1))

    # -- element types ---------------------------------------------------------

    def _etype_array(self, radius: int) -> np.ndarray:
        arr = self._etype.get(radius)
        if arr is None:
            arr = np.full(self.db.n + 1, -1, dtype=np.int64)
            self._etype[radius] = arr
        return arr

    def element_type(self, element: int, radius: int) -> int:
        arr = self._etype_array(radius)
        tid = arr[element]
        if tid < 0:
            tid = self.registry.type_of(self.db, (element,), radius).type_id
            arr[element] = tid
        return int(tid)

    def element_types_many(self, elements: np.ndarray, radius: int) -> np.ndarray:
        """Vectorized element-type lookup, computing misses on first touch."""
        arr = self._etype_array(radius)
        out = arr[elements]
        missing = np.unique(elements[out < 0])
        for e in missing:
            self.element_type(int(e), radius)
        if missing.size:
            out = arr[elements]
        return out

    # -- tuple types -----------------------------------------------------------

    def tuple_type(self, btuple: Sequence[int], radius: int) -> int:
        """Type id of a tuple's radius-r neighbourhood with ordered centres."""
        btuple = tuple(btuple)
        if len(btuple) == 1:
            return self.element_type(btuple[0], radius)
        memo_key = (btuple, radius)
        hit = self._tuple_memo.get(memo_key)
        if hit is not None:
            return hit
        groups = group_positions(self, btuple, radius)
        if len(groups) == 1:
            nb = extract_neighbourhood(self.db, btuple, radius)
            tid = self.registry.canonicalize(nb).type_id
        else:
            pattern = [0] * len(btuple)
            comp_types = []
            for gi, grp in enumerate(groups):
                for pos in grp:
                    pattern[pos] = gi
                sub = tuple(btuple[pos] for pos in grp)
                if len(sub) == 1:
                    comp_types.append(self.element_type(sub[0], radius))
                else:
                    comp_types.append(self.tuple_type(sub, radius))
            tid = self.registry.compose_disjoint(tuple(pattern), tuple(comp_types), radius)
        self._tuple_memo[memo_key] = tid
        return tid

    def tuple_type_direct(self, btuple: Sequence[int], radius: int) -> int:
        """Bypass the composition path; reference for property tests."""
        nb = extract_neighbourhood(self.db, tuple(btuple), radius)
        return self.registry.canonicalize(nb).type_id

    # -- anchored embeddings -----------------------------------------------

    def anchored_embedding(self, element: int, radius: int) -> tuple[int, dict[int, int]]:
        """1-centre type of an element plus its least embedding, as (type id, map).

        The map sends representative positions back to source elements; it is
        the inverse of the least isomorphism from the element's ball onto the
        type representative, so bindings expressed in representative positions
        can be resolved against the database.
        """
        key = (element, radius)
        hit = self._anchor_memo.get(key)
        if hit is None:
            nb = extract_neighbourhood(self.db, (element,), radius)
            anchor = self.registry.canonicalize(nb)
            emb = embedding_into_representative(nb, anchor)
            inverse = {pos: nb.fragment.orig[local - 1] for local, pos in emb.items()}
            arr = self._etype_array(radius)
            arr[element] = anchor.type_id
            hit = (anchor.type_id, inverse)
            self._anchor_memo[key] = hit
        return hit
