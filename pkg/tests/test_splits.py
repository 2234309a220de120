import itertools
import random

from approxenum import figures
from approxenum.splits import (
    anchor_radius,
    candidate_found_tuples,
    found_from,
    leaders_of,
    member_reach,
    unique_split_of,
)
from approxenum.typecache import TypeCache


def test_single_group_within_copy(registry):
    db = figures.graph_db(8, figures.PAIR_A_EDGES)
    cache = TypeCache(db, registry)
    split = unique_split_of(cache, (1, 4), 2)
    assert split.group_count() == 1
    (grp,) = split.groups
    assert grp.coords == (1, 2)
    # the anchor is the wide-radius type of the leader (vertex 1)
    wide = anchor_radius(2, 2)
    assert grp.anchor_type_id == cache.element_type(1, wide)


def test_two_singleton_groups_cross_copy(registry):
    db = figures.pair_a_copies(2)
    cache = TypeCache(db, registry)
    split = unique_split_of(cache, (1, 8 + 4), 2)
    assert split.group_count() == 2
    assert [g.coords for g in split.groups] == [(1,), (2,)]
    assert all(g.binding.positions == () for g in split.groups)


def test_k1_always_singleton(registry, rng):
    db = figures.random_bounded_db(15, 3, rng, tuple_target=18)
    cache = TypeCache(db, registry)
    for a in range(1, 16):
        split = unique_split_of(cache, (a,), 1)
        assert split.group_count() == 1
        assert split.groups[0].coords == (1,)


def test_found_from_round_trip_fixed(registry):
    db = figures.graph_db(8, figures.PAIR_A_EDGES)
    cache = TypeCache(db, registry)
    split = unique_split_of(cache, (1, 4), 2)
    assert found_from(cache, (1,), split) == (1, 4)


def test_found_from_wrong_anchor(registry):
    db = figures.pair_a_copies(2)
    cache = TypeCache(db, registry)
    split = unique_split_of(cache, (1, 4), 2)  # within-copy pair, one group
    # vertex 4 (the pendant) does not carry the root's anchor type
    assert found_from(cache, (4,), split) is None


def test_found_from_interacting_groups(registry):
    db = figures.pair_a_copies(2)
    cache = TypeCache(db, registry)
    # split shaped by a fully separated cross-copy pair ...
    split = unique_split_of(cache, (1, 8 + 4), 2)
    # ... applied to leaders from one copy: anchors match, separation fails
    assert found_from(cache, (1, 4), split) is None


def test_round_trip_random(registry, rng):
    # ten thousand random tuples across random databases reassemble exactly
    total = 0
    while total < 10_000:
        n = rng.randint(6, 24)
        db = figures.random_bounded_db(n, 3, rng, tuple_target=n)
        cache = TypeCache(db, registry)
        r = rng.choice([0, 1, 2])
        for _ in range(200):
            k = rng.choice([1, 2, 3])
            btuple = tuple(rng.randint(1, n) for _ in range(k))
            split = unique_split_of(cache, btuple, r)
            lead = leaders_of(cache, btuple, r)
            assert found_from(cache, lead, split) == btuple
            # distance bound: non-leaders stay within reach of their leader
            for grp in split.groups:
                leader = btuple[grp.coords[0] - 1]
                reach = member_reach(r, k)
                from approxenum.db import gaifman_ball
                ball = gaifman_ball(db, (leader,), reach)
                for coord in grp.coords[1:]:
                    assert btuple[coord - 1] in ball
            total += 1


def test_candidate_single_leader(registry):
    db = figures.graph_db(8, figures.PAIR_A_EDGES)
    cache = TypeCache(db, registry)
    t = registry.type_of(db, (1, 4), 2)
    got = candidate_found_tuples(cache, (1,), frozenset([t.type_id]), 2, 2)
    assert got == [(1, 4)]
    # no other element leads to anything
    for a in range(2, 9):
        assert candidate_found_tuples(cache, (a,), frozenset([t.type_id]), 2, 2) == []


def test_candidate_empty_type_set(registry):
    db = figures.graph_db(8, figures.PAIR_A_EDGES)
    cache = TypeCache(db, registry)
    assert candidate_found_tuples(cache, (1,), frozenset(), 2, 2) == []


def test_candidate_group_count_mismatch(registry):
    db = figures.graph_db(8, figures.PAIR_A_EDGES)
    cache = TypeCache(db, registry)
    t = registry.type_of(db, (1, 4), 2)  # connected type: one group
    got = candidate_found_tuples(cache, (1, 4), frozenset([t.type_id]), 2, 2)
    assert got == []


def test_candidate_disconnected_type(registry):
    db = figures.pair_a_copies(2)
    cache = TypeCache(db, registry)
    t_cross = cache.tuple_type((1, 8 + 1), 2)
    got = candidate_found_tuples(cache, (1, 8 + 1), frozenset([t_cross]), 2, 2)
    assert (1, 9) in got
    # every returned tuple led by exactly these leaders
    for b in got:
        assert leaders_of(cache, b, 2) == (1, 9)


def exhaustive_equivalence(db, registry, type_ids, k, r):
    """Oracle for the grounded split table: scan all tuples and all leaders."""
    cache = TypeCache(db, registry)
    want = {b for b in itertools.product(range(1, db.n + 1), repeat=k)
            if cache.tuple_type(b, r) in type_ids}
    got: dict[tuple, list[tuple]] = {}
    for c in range(1, k + 1):
        for abar in itertools.product(range(1, db.n + 1), repeat=c):
            for b in candidate_found_tuples(cache, abar, type_ids, k, r):
                got.setdefault(b, []).append(abar)
    assert set(got) == want
    for b, sources in got.items():
        assert len(sources) == 1, f"{b} produced from {sources}"


def test_equivalence_small_family(registry):
    db = figures.fallback_family(m=1, a_copies=1)  # n = 16
    types = figures.shape_types(registry)
    ids = frozenset([types["pair_a"].type_id, types["pair_b"].type_id])
    exhaustive_equivalence(db, registry, ids, 2, 2)


def test_equivalence_random_small(registry, rng):
    for _ in range(3):
        db = figures.random_bounded_db(12, 3, rng, tuple_target=14)
        cache = TypeCache(db, registry)
        # target the types that actually occur, sampled from the instance
        ids = {cache.tuple_type((rng.randint(1, 12), rng.randint(1, 12)), 1)
               for _ in range(4)}
        exhaustive_equivalence(db, registry, frozenset(ids), 2, 1)
