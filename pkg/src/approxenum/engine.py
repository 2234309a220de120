"""Randomized constant-delay enumeration over sampled index spaces.

The core loop enumerates a subset of an index space ``V`` given a constant
time membership check for the target set ``V1``: each round draws ``alpha``
indices uniformly at random, advances a sequential cursor by ``batch``
indices, filters the fresh ones through the membership check into a queue,
and outputs one queued item; the run stops the first time there is nothing to
output.  With

    q     = min((1 - mu*(1-mu))^2, (1-delta)^2 / 9)
    alpha = ceil(log_{1 - mu*(1-mu)} q)
    batch = ceil(1 / mu^2)

the output is always a duplicate-free subset of ``V1``, and whenever
``|V1| >= mu * |V|`` it equals ``V1`` with probability at least ``delta``.
Work between consecutive outputs is bounded by a constant in ``alpha``,
``batch`` and the per-check cost.

Two behaviour-preserving fast paths keep large runs tractable; both leave the
emitted sequence bit-identical to the literal loop for a fixed seed:

* rounds are processed in blocks of up to ``chunk`` whenever enough queued
  items guarantee no stop can occur inside the block (samples are drawn from
  a fixed-size buffered stream, so consumption order does not depend on the
  blocking);
* once every index has been touched, sampling is skipped while the queue
  drains (post-saturation samples are all duplicates and can never change
  the output).

Instrumented runs (``instrument=True``) execute the literal single-round
loop and record elementary operations per output: samples drawn, cursor
advances, dedup reads/writes, membership checks, queue traffic and
emissions, with incidence probes tallied separately.

The four query-enumeration modes wire the loop to query semantics:

=========================  =========================  ======================
mode                       index space                membership
=========================  =========================  ======================
local                      all k-tuples               tuple type in the
                                                      query's sphere types
local strengthened         leader tuples of arity     non-empty expansion
                           up to conn(q)              through the split table
general                    all k-tuples               tuple type in the
                                                      tested relevant set
general strengthened /     leader tuples of arity     non-empty expansion
pluggable testers          up to conn(q)              against the tested set
=========================  =========================  ======================

Local modes emit only true answers.  General modes emit, with probability at
least 2/3, only tuples that are answers or within the edit-distance closeness
margin, and all answers whenever the answer set meets the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .db import Database
from .errors import MissingTester, NotLocal
from .neighborhoods import TypeRegistry
from .query import QueryNF, compute_conn, is_local
from .randutil import child_rng, child_seed
from .splits import candidate_found_tuples
from .testers import ClauseTester, TesterFactory, compute_type_set, make_tester_factory
from .typecache import TypeCache

_NUMPY_SPACE_LIMIT = 1 << 62
_DENSE_DEDUP_LIMIT = 1 << 27


def lemma_constants(mu: float, delta: float) -> tuple[float, int, int]:
    """(q, alpha, batch) for the core loop's sampling schedule."""
    if not (0.0 < mu < 1.0 and 0.0 < delta < 1.0):
        raise ValueError("mu and delta must lie in (0, 1)")
    p = mu * (1.0 - mu)
    q = min((1.0 - p) ** 2, (1.0 - delta) ** 2 / 9.0)
    alpha = max(1, math.ceil(math.log(q) / math.log(1.0 - p)))
    batch = max(1, math.ceil(1.0 / (mu * mu)))
    return q, alpha, batch


def analytic_delay_bound(alpha: int, batch: int, expansion_cap: int = 1) -> int:
    """Upper bound on instrumented ops between consecutive outputs.

    Mirrors the instrumented loop: alpha sample draws, up to ``batch`` cursor
    advances, one dedup read per candidate, at most one dedup write plus one
    membership check per fresh candidate, queue pushes, one queue pop, the
    expansion work, and the emission itself.
    """
    per_candidate = alpha + batch
    return alpha + batch + 4 * per_candidate + 2 * expansion_cap + 3


@dataclass(frozen=True)
class IndexSpace:
    """1-based index space over tuples: a union of blocks D^a, a in arities."""

    n: int
    arities: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "_sizes", tuple(self.n ** a for a in self.arities))
        offs = []
        total = 0
        for s in self._sizes:  # type: ignore[attr-defined]
            offs.append(total)
            total += s
        object.__setattr__(self, "_offsets", tuple(offs))
        object.__setattr__(self, "size", total)

    @classmethod
    def power(cls, n: int, k: int) -> "IndexSpace":
        return cls(n, (k,))

    @classmethod
    def union_up_to(cls, n: int, c: int) -> "IndexSpace":
        return cls(n, tuple(range(1, c + 1)))

    def decode(self, idx: int) -> tuple[int, ...]:
        j = idx - 1
        for arity, off, size in zip(self.arities, self._offsets, self._sizes):
            if j < off + size:
                j -= off
                out = []
                for p in range(arity - 1, -1, -1):
                    out.append(j // self.n ** p % self.n + 1)
                return tuple(out)
        raise IndexError(f"index {idx} outside space of size {self.size}")

    def split_blocks(self, idxs: np.ndarray) -> list[tuple[int, np.ndarray, list[np.ndarray]]]:
        """Per arity block: (arity, positions into ``idxs``, coordinate columns)."""
        out = []
        j = idxs - 1
        for arity, off, size in zip(self.arities, self._offsets, self._sizes):
            sel = np.nonzero((j >= off) & (j < off + size))[0]
            if sel.size == 0:
                continue
            rel = j[sel] - off
            cols = []
            for p in range(arity - 1, -1, -1):
                col = rel // self.n ** p % self.n + 1
                if col.dtype == object:  # huge spaces decode through python ints
                    col = col.astype(np.int64)
                cols.append(col)
            out.append((arity, sel, cols))
        return out


class _Dedup:
    """Seen-index record: dense boolean array or dict, lazily initialised."""

    def __init__(self, size: int, fault_skip: bool = False):
        self.size = size
        self.count = 0
        self.fault_skip = fault_skip
        self._dense = size <= _DENSE_DEDUP_LIMIT
        if self._dense:
            self._arr = np.zeros(size + 1, dtype=bool)
        else:
            self._set: set[int] = set()

    @property
    def saturated(self) -> bool:
        return self.count >= self.size

    def test_and_set(self, idx: int) -> bool:
        if self.fault_skip:
            return True
        if self._dense:
            if self._arr[idx]:
                return False
            self._arr[idx] = True
        else:
            if idx in self._set:
                return False
            self._set.add(idx)
        self.count += 1
        return True

    def test_and_set_many(self, idxs: np.ndarray) -> np.ndarray:
        """Mask of first-ever occurrences, in order; marks them seen."""
        if self.fault_skip:
            return np.ones(idxs.size, dtype=bool)
        if not self._dense:
            return np.fromiter((self.test_and_set(int(i)) for i in idxs),
                               dtype=bool, count=idxs.size)
        uniq, first_pos = np.unique(idxs, return_index=True)
        fresh = ~self._arr[uniq]
        self._arr[uniq[fresh]] = True
        self.count += int(fresh.sum())
        mask = np.zeros(idxs.size, dtype=bool)
        mask[first_pos[fresh]] = True
        return mask


class _SampleStream:
    """Uniform indices in [1, size], buffered in fixed-size blocks.

    The draw order is a pure function of the seed, so callers may consume in
    any group sizes without changing the stream.
    """

    def __init__(self, size: int, seed: int, block: int = 1 << 16):
        self.size = size
        self.drawn = 0
        self._block = block
        if size < _NUMPY_SPACE_LIMIT:
            self._rng = child_rng(seed, "samples")
            self._py = None
        else:
            import random as _random

            self._py = _random.Random(child_seed(seed, "samples"))
            self._rng = None
        self._buf = np.empty(0, dtype=np.int64)
        self._pos = 0

    def draw(self, count: int) -> np.ndarray:
        self.drawn += count
        if self._py is not None:
            return np.array([self._py.randrange(1, self.size + 1) for _ in range(count)],
                            dtype=object)
        out = np.empty(count, dtype=np.int64)
        filled = 0
        while filled < count:
            if self._pos >= self._buf.size:
                self._buf = self._rng.integers(1, self.size + 1, size=self._block)
                self._pos = 0
            take = min(count - filled, self._buf.size - self._pos)
            out[filled:filled + take] = self._buf[self._pos:self._pos + take]
            self._pos += take
            filled += take
        return out


# -- membership evaluators -----------------------------------------------------


class TypeMembership:
    """V1 = tuples whose radius-r type belongs to a fixed set."""

    def __init__(self, cache: TypeCache, type_ids: frozenset[int], k: int, radius: int):
        self.cache = cache
        self.type_ids = type_ids
        self.k = k
        self.radius = radius
        reg = cache.registry
        allowed = [set() for _ in range(k)]
        for tid in type_ids:
            t = reg.by_id(tid)
            if len(t.centre_positions) == k:
                for pos in range(k):
                    allowed[pos].add(reg.centre_restriction(t, pos))
        self._allowed = [np.array(sorted(s), dtype=np.int64) for s in allowed]
        self._degrees = np.asarray(cache.db.degrees, dtype=np.int64)
        self._pair_compose: dict[tuple[int, int], bool] = {}
        self.expansion_cap = 1
        self.identity_expansion = True

    def check(self, tup: tuple[int, ...]) -> bool:
        return self.cache.tuple_type(tup, self.radius) in self.type_ids

    def _pair_ok(self, ta: int, tb: int) -> bool:
        key = (ta, tb)
        hit = self._pair_compose.get(key)
        if hit is None:
            hit = self.cache.registry.compose_disjoint((0, 1), key, self.radius) \
                in self.type_ids
            self._pair_compose[key] = hit
        return hit

    def check_block(self, arity: int, cols: list[np.ndarray]) -> np.ndarray:
        size = cols[0].size
        if arity != self.k or not self.type_ids:
            return np.zeros(size, dtype=bool)
        mask = np.ones(size, dtype=bool)
        etypes = []
        for pos in range(self.k):
            col_types = self.cache.element_types_many(cols[pos], self.radius)
            etypes.append(col_types)
            mask &= np.isin(col_types, self._allowed[pos])
            if not mask.any():
                return mask
        if self.k == 1:
            return mask  # the elementwise filter is exact for one centre
        scalar = mask.copy()
        if self.k == 2:
            # degree-0 elements have singleton balls at every radius, so a
            # distinct pair of them composes from the element types alone
            iso = mask & (self._degrees[cols[0]] == 0) & (self._degrees[cols[1]] == 0)
            iso &= cols[0] != cols[1]
            idx = np.nonzero(iso)[0]
            if idx.size:
                keys = etypes[0][idx] * (1 << 32) + etypes[1][idx]
                for key in np.unique(keys):
                    ta, tb = int(key >> 32), int(key & 0xFFFFFFFF)
                    sub = idx[keys == key]
                    mask[sub] = self._pair_ok(ta, tb)
                scalar &= ~iso
        for i in np.nonzero(scalar)[0]:
            tup = tuple(int(cols[pos][i]) for pos in range(self.k))
            if not self.check(tup):
                mask[i] = False
        return mask

    def expansions(self, tup: tuple[int, ...]) -> list[tuple[int, ...]]:
        return [tup]


class SplitMembership:
    """V1 = leader tuples from which some target-type tuple is found.

    The elementwise prefilter admits element ``a`` at leader slot ``j`` only
    when some target type's j-th group leader carries ``a``'s radius-r type;
    survivors get the exact expansion check.
    """

    def __init__(self, cache: TypeCache, type_ids: frozenset[int], k: int, radius: int,
                 conn: int, expansion_cap: int):
        self.cache = cache
        self.type_ids = type_ids
        self.k = k
        self.radius = radius
        self.conn = conn
        self.expansion_cap = expansion_cap
        reg = cache.registry
        allowed: dict[int, list[set[int]]] = {
            c: [set() for _ in range(c)] for c in range(1, conn + 1)
        }
        for tid in type_ids:
            t = reg.by_id(tid)
            if len(t.centre_positions) != k:
                continue
            leaders = _leader_positions(reg, t)
            c = len(leaders)
            if c > conn:
                continue
            for j, pos in enumerate(leaders):
                allowed[c][j].add(reg.centre_restriction(t, pos))
        self._allowed = {
            c: [np.array(sorted(s), dtype=np.int64) for s in slots]
            for c, slots in allowed.items()
        }

    def check(self, tup: tuple[int, ...]) -> bool:
        return bool(candidate_found_tuples(self.cache, tup, self.type_ids,
                                           self.k, self.radius, first_only=True))

    def check_block(self, arity: int, cols: list[np.ndarray]) -> np.ndarray:
        size = cols[0].size
        slots = self._allowed.get(arity)
        if slots is None or not self.type_ids:
            return np.zeros(size, dtype=bool)
        mask = np.ones(size, dtype=bool)
        for j in range(arity):
            etypes = self.cache.element_types_many(cols[j], self.radius)
            mask &= np.isin(etypes, slots[j])
            if not mask.any():
                return mask
        for i in np.nonzero(mask)[0]:
            tup = tuple(int(cols[j][i]) for j in range(arity))
            if not self.check(tup):
                mask[i] = False
        return mask

    def expansions(self, tup: tuple[int, ...]) -> list[tuple[int, ...]]:
        return candidate_found_tuples(self.cache, tup, self.type_ids, self.k, self.radius)


def _leader_positions(registry: TypeRegistry, t) -> list[int]:
    """0-based centre slots leading each component of a type, by first slot."""
    frag = t.representative.fragment
    parent = list(range(frag.size + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in frag.gaifman_edges():
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict[int, int] = {}
    for slot, centre in enumerate(t.representative.centres):
        root = find(centre)
        if root not in groups:
            groups[root] = slot
    return sorted(groups.values())


# -- session summary -----------------------------------------------------------


@dataclass
class EnumSummary:
    mode: str
    n: int
    k: int
    space_size: int
    mu: float
    delta: float
    q: float
    alpha: int
    batch: int
    seed: int
    conn: int = 1
    expansion_cap: int = 1
    outputs: int = 0
    samples_drawn: int = 0
    cursor_consumed: int = 0
    seen_count: int = 0
    rounds: int = 0
    truncated: bool = False
    max_delay_ops: int = 0
    first_output_ops: int = 0
    end_delay_ops: int = 0
    max_oracle_per_output: int = 0
    max_inner_queue: int = 0
    max_out_queue: int = 0
    delay_bound: int = 0
    preprocessing: dict = field(default_factory=dict)
    delays: list = field(default_factory=list)


# -- the core loop ---------------------------------------------------------------


def partitioned_enumerate(space: IndexSpace, membership, mu: float, delta: float,
                          seed: int, emit: Callable[[tuple[int, ...]], None],
                          mode: str = "partitioned",
                          max_outputs: Optional[int] = None,
                          instrument: bool = False,
                          chunk: int = 4096,
                          keep_delays: bool = False,
                          _fault_skip_dedup: bool = False,
                          summary: Optional[EnumSummary] = None) -> EnumSummary:
    """Run the sampling loop; see the module docstring for the contract."""
    from collections import deque

    q, alpha, batch = lemma_constants(mu, delta)
    if summary is None:
        summary = EnumSummary(mode=mode, n=space.n, k=max(space.arities),
                              space_size=space.size, mu=mu, delta=delta, q=q,
                              alpha=alpha, batch=batch, seed=seed)
    else:
        summary.mu, summary.delta, summary.q = mu, delta, q
        summary.alpha, summary.batch = alpha, batch
        summary.space_size = space.size
    summary.delay_bound = analytic_delay_bound(alpha, batch, membership.expansion_cap)
    if space.size == 0:
        return summary

    dedup = _Dedup(space.size, fault_skip=_fault_skip_dedup)
    stream = _SampleStream(space.size, seed)
    identity_expand = getattr(membership, "identity_expansion", False)
    inner: deque[tuple[int, ...]] = deque()
    out: deque[tuple[int, ...]] = deque()
    cursor = 0
    inner_stopped = False
    emitted = 0
    ops_since_emit = 0
    had_output = False
    probes0 = membership.cache.db.probes if hasattr(membership, "cache") else 0
    db = membership.cache.db if hasattr(membership, "cache") else None

    if instrument:
        chunk = 1

    def arrivals_for(cand: np.ndarray) -> list[tuple[int, ...]]:
        fresh_mask = dedup.test_and_set_many(cand)
        fresh = cand[fresh_mask]
        decoded: list = [None] * fresh.size
        for arity, sel, cols in space.split_blocks(fresh):
            block_mask = membership.check_block(arity, cols)
            hit_cols = [c[block_mask].tolist() for c in cols]
            for pos, tup in zip(sel[block_mask], zip(*hit_cols)):
                decoded[pos] = tup
        return [tup for tup in decoded if tup is not None]

    while True:
        if max_outputs is not None and emitted >= max_outputs:
            summary.truncated = True
            break
        if not inner_stopped:
            rounds = max(1, min(chunk, len(inner)))
            if instrument:
                rounds = 1
            # sampling may be skipped once every index has been seen: all
            # draws would be duplicates and cannot affect the output; the
            # instrumented mode keeps the literal loop
            take_cursor = min(batch * rounds, space.size - cursor)
            if instrument or not dedup.saturated:
                samples = stream.draw(alpha * rounds)
                summary.samples_drawn += alpha * rounds
                if take_cursor:
                    cur = np.arange(cursor + 1, cursor + take_cursor + 1, dtype=samples.dtype)
                    full = take_cursor == batch * rounds
                    if full and rounds > 1:
                        cand = np.concatenate(
                            [samples.reshape(rounds, alpha), cur.reshape(rounds, batch)],
                            axis=1).ravel()
                    elif rounds == 1:
                        cand = np.concatenate([samples, cur])
                    else:
                        parts = []
                        for i in range(rounds):
                            parts.append(samples[i * alpha:(i + 1) * alpha])
                            parts.append(cur[i * batch:(i + 1) * batch])
                        cand = np.concatenate(parts)
                else:
                    cand = samples
                cursor += take_cursor
                summary.cursor_consumed += take_cursor
                new_items = arrivals_for(cand)
                inner.extend(new_items)
                if instrument:
                    fresh_count = dedup.count  # updated inside arrivals_for
                    ops_since_emit += alpha + take_cursor  # draws + cursor advances
                    ops_since_emit += cand.size            # dedup reads
                    # dedup writes + membership checks for fresh candidates:
                    # counted via the change in the seen counter
                    ops_since_emit += 2 * (fresh_count - summary.seen_count)
                    ops_since_emit += len(new_items)       # queue pushes
                    summary.seen_count = fresh_count
            else:
                cursor += take_cursor
                summary.cursor_consumed += take_cursor
            summary.rounds += rounds
            summary.max_inner_queue = max(summary.max_inner_queue, len(inner))
            if identity_expand and not instrument and rounds <= len(inner):
                # expansion is the identity and out is empty at round borders:
                # emitting straight off the inner queue preserves the order
                for _ in range(rounds):
                    emit(inner.popleft())
                    emitted += 1
                    if max_outputs is not None and emitted >= max_outputs:
                        break
                continue
            for _ in range(rounds):
                if inner:
                    expanded = membership.expansions(inner.popleft())
                    out.extend(expanded)
                    if instrument:
                        ops_since_emit += 1 + 2 * len(expanded)
                else:
                    inner_stopped = True
                    break
                summary.max_out_queue = max(summary.max_out_queue, len(out))
                if out:
                    emit(out.popleft())
                    emitted += 1
                    if instrument:
                        ops_since_emit += 2
                        _record_delay(summary, ops_since_emit, had_output, keep_delays)
                        if db is not None:
                            summary.max_oracle_per_output = max(
                                summary.max_oracle_per_output, db.probes - probes0)
                            probes0 = db.probes
                        had_output = True
                        ops_since_emit = 0
                    if max_outputs is not None and emitted >= max_outputs:
                        break
                else:
                    inner_stopped = True
                    break
            continue
        # inner loop has stopped: drain the output queue
        if out:
            rounds = max(1, min(chunk, len(out)))
            for _ in range(rounds):
                emit(out.popleft())
                emitted += 1
                if instrument:
                    ops_since_emit += 2
                    _record_delay(summary, ops_since_emit, had_output, keep_delays)
                    had_output = True
                    ops_since_emit = 0
                if max_outputs is not None and emitted >= max_outputs:
                    break
        else:
            break

    summary.outputs = emitted
    summary.seen_count = dedup.count
    if instrument:
        # delay covers the gap to the end-of-enumeration message as well
        summary.end_delay_ops = ops_since_emit + 1  # the stop check itself
        if not summary.truncated:
            summary.max_delay_ops = max(summary.max_delay_ops, summary.end_delay_ops)
    return summary


def _record_delay(summary: EnumSummary, ops: int, had_output: bool, keep: bool) -> None:
    if not had_output:
        summary.first_output_ops = ops
    summary.max_delay_ops = max(summary.max_delay_ops, ops)
    if keep:
        summary.delays.append(ops)


# -- query enumeration modes -----------------------------------------------------


def _ensure_cache(db: Database, registry: Optional[TypeRegistry],
                  cache: Optional[TypeCache]) -> TypeCache:
    if cache is not None:
        return cache
    return TypeCache(db, registry if registry is not None else TypeRegistry())


def enumerate_local(db: Database, q: QueryNF, gamma: float, seed: int,
                    emit: Callable[[tuple[int, ...]], None],
                    registry: Optional[TypeRegistry] = None,
                    cache: Optional[TypeCache] = None,
                    **loop_kwargs) -> EnumSummary:
    """Sound and, above the gamma*n^k answer threshold, 2/3-complete enumeration."""
    if not is_local(q):
        raise NotLocal("local enumeration requires a sentence-free query")
    cache = _ensure_cache(db, registry, cache)
    space = IndexSpace.power(db.n, q.k)
    membership = TypeMembership(cache, q.sphere_type_ids(), q.k, q.radius)
    return partitioned_enumerate(space, membership, mu=gamma, delta=2.0 / 3.0,
                                 seed=seed, emit=emit, mode="local", **loop_kwargs)


def enumerate_local_strengthened(db: Database, q: QueryNF, gamma: float, seed: int,
                                 emit: Callable[[tuple[int, ...]], None],
                                 registry: Optional[TypeRegistry] = None,
                                 cache: Optional[TypeCache] = None,
                                 expansion_cap: int = 1,
                                 **loop_kwargs) -> EnumSummary:
    """Local enumeration with the threshold reduced to gamma*n^conn.

    ``expansion_cap`` stands in for the worst-case number of target tuples a
    single leader tuple can expand to on this database; it rescales mu and
    must upper-bound the true expansion count for the threshold guarantee to
    carry over.
    """
    if not is_local(q):
        raise NotLocal("local enumeration requires a sentence-free query")
    cache = _ensure_cache(db, registry, cache)
    c = compute_conn(q)
    space = IndexSpace.union_up_to(db.n, c)
    membership = SplitMembership(cache, q.sphere_type_ids(), q.k, q.radius,
                                 conn=c, expansion_cap=expansion_cap)
    mu = gamma / (c * expansion_cap)
    summary = partitioned_enumerate(space, membership, mu=mu, delta=4.0 / 5.0,
                                    seed=seed, emit=emit, mode="local-strengthened",
                                    **loop_kwargs)
    summary.conn = c
    summary.expansion_cap = expansion_cap
    return summary


def enumerate_general(db: Database, q: QueryNF, gamma: float, epsilon: float, seed: int,
                      emit: Callable[[tuple[int, ...]], None],
                      registry: Optional[TypeRegistry] = None,
                      cache: Optional[TypeCache] = None,
                      tester: str | TesterFactory = "exact",
                      **loop_kwargs) -> EnumSummary:
    """Approximate enumeration for general queries at threshold gamma*n^k.

    Preprocessing computes the tested relevant-type set; the loop then runs
    with membership "tuple type is in the set".
    """
    cache = _ensure_cache(db, registry, cache)
    factory = make_tester_factory(tester, q.k) if isinstance(tester, str) else tester
    tset = compute_type_set(cache, q, epsilon, child_seed(seed, "typeset"), factory=factory)
    space = IndexSpace.power(db.n, q.k)
    membership = TypeMembership(cache, tset.members, q.k, q.radius)
    summary = partitioned_enumerate(space, membership, mu=gamma, delta=5.0 / 6.0,
                                    seed=seed, emit=emit, mode="general", **loop_kwargs)
    summary.preprocessing = {"type_set": sorted(tset.members), "exact_branch": tset.exact}
    return summary


def enumerate_general_strengthened(db: Database, q: QueryNF, gamma: float, epsilon: float,
                                   seed: int, emit: Callable[[tuple[int, ...]], None],
                                   registry: Optional[TypeRegistry] = None,
                                   cache: Optional[TypeCache] = None,
                                   tester: str | TesterFactory = "exact",
                                   expansion_cap: int = 1,
                                   plugins: Optional[Sequence[ClauseTester]] = None,
                                   **loop_kwargs) -> EnumSummary:
    """General-query enumeration at the reduced threshold gamma*n^conn."""
    cache = _ensure_cache(db, registry, cache)
    factory = make_tester_factory(tester, q.k) if isinstance(tester, str) else tester
    tset = compute_type_set(cache, q, epsilon, child_seed(seed, "typeset"),
                            factory=factory, plugins=plugins)
    c = compute_conn(q)
    space = IndexSpace.union_up_to(db.n, c)
    membership = SplitMembership(cache, tset.members, q.k, q.radius,
                                 conn=c, expansion_cap=expansion_cap)
    mu = gamma / (c * expansion_cap)
    summary = partitioned_enumerate(space, membership, mu=mu, delta=4.0 / 5.0,
                                    seed=seed, emit=emit, mode="general-strengthened",
                                    **loop_kwargs)
    summary.conn = c
    summary.expansion_cap = expansion_cap
    summary.preprocessing = {"type_set": sorted(tset.members), "exact_branch": tset.exact}
    return summary


def enumerate_hanf_testable(db: Database, q: QueryNF, gamma: float, epsilon: float,
                            seed: int, emit: Callable[[tuple[int, ...]], None],
                            plugins: Sequence[ClauseTester],
                            registry: Optional[TypeRegistry] = None,
                            cache: Optional[TypeCache] = None,
                            expansion_cap: int = 1,
                            **loop_kwargs) -> EnumSummary:
    """Strengthened general enumeration with caller-supplied clause testers."""
    if plugins is None or len(plugins) != len(q.clauses):
        raise MissingTester(
            f"need one tester per clause ({len(q.clauses)}), got "
            f"{0 if plugins is None else len(plugins)}"
        )
    summary = enumerate_general_strengthened(
        db, q, gamma, epsilon, seed, emit, registry=registry, cache=cache,
        expansion_cap=expansion_cap, plugins=plugins, **loop_kwargs)
    summary.mode = "hanf-testable"
    return summary


def abstract_expansion_bound(d: int, radius: int, k: int) -> int:
    """A-priori cap on expansions per leader tuple: fill k-1 free coordinates
    from anywhere in a leader's wide-radius ball."""
    ball = d ** (3 * max(radius, 1) * k + 1)
    return max(1, k ** k * ball ** (k - 1))
