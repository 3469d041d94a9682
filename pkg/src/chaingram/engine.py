"""Backtracking recognition over chain-instance multisets and bond matchings.

The searcher walks candidate multisets of store-chain copies in order of
instance count and chain-id multiset.  A complete complex bonds every
occurrence except one dangling conclusion, so per token label the bonds
form a perfect matching (minus the dangler), which pins the parity of
every candidate multiset: exactly one token may have an odd total count
and it must be concludable.  Candidate multisets are pre-grouped by that
parity signature once per (store, bounds), making most rejections a
handful of dictionary lookups.  Surviving candidates go through
per-label matching enumeration with incremental position-feasibility
pruning.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping

from .chains import Chain, ChainStore, Token
from .complexes import (
    FRESH,
    Bond,
    ChainInstance,
    Complex,
    Occurrence,
    PositionAssignment,
    SearchConfig,
    dangling_token,
    instances_connected,
    occ_sort_key,
    solve_positions,
    store_web_connected,
)


@dataclass
class RecognitionResult:
    accepted: bool
    conclusions: frozenset[Token]
    witnesses: list[tuple[Complex, PositionAssignment]]


def parity_filter(fresh: Chain, counts: Mapping[str, int], store: ChainStore) -> bool:
    """Necessary condition on a candidate multiset.

    True iff over all occurrences of the multiset plus the fresh chain
    exactly one token has an odd count and that token concludes at least
    one selected chain.  Every valid complex passes.
    """
    odd: set[Token] = set()

    def flip_all(chain: Chain):
        for tok in chain.tokens():
            if tok in odd:
                odd.discard(tok)
            else:
                odd.add(tok)

    flip_all(fresh)
    concludable: set[Token] = set()
    for chain_id, k in counts.items():
        if k <= 0:
            continue
        chain = store.get(chain_id)
        if k % 2:
            flip_all(chain)
        if chain.conclusion is not None:
            concludable.add(chain.conclusion)
    return len(odd) == 1 and next(iter(odd)) in concludable


@dataclass(frozen=True)
class _MultisetEntry:
    size: int
    ids: tuple[str, ...]  # expanded, e.g. ("c1", "c5", "c5")
    counts: tuple[tuple[str, int], ...]
    signature: frozenset[Token]
    conclusions: frozenset[Token]


@lru_cache(maxsize=32)
def _multiset_index(store: ChainStore, max_copies: int,
                    max_chains: int) -> dict[frozenset[Token], tuple[_MultisetEntry, ...]]:
    """Every store multiset within bounds, grouped by odd-token signature."""
    chains = list(store)
    chain_parity = []
    for chain in chains:
        odd: set[Token] = set()
        for tok in chain.tokens():
            odd.symmetric_difference_update((tok,))
        chain_parity.append(frozenset(odd))

    entries: list[_MultisetEntry] = []
    counts: dict[str, int] = {}
    parity: set[Token] = set()
    concl: Counter[Token] = Counter()

    def emit(size: int):
        if size == 0:
            return
        items = tuple(sorted(counts.items()))
        ids = tuple(cid for cid, k in items for _ in range(k))
        entries.append(_MultisetEntry(
            size, ids, items, frozenset(parity),
            frozenset(tok for tok, c in concl.items() if c > 0)))

    def walk(i: int, size: int):
        if i == len(chains):
            emit(size)
            return
        walk(i + 1, size)
        chain = chains[i]
        added = 0
        for k in range(1, max_copies + 1):
            if size + k > max_chains:
                break
            parity.symmetric_difference_update(chain_parity[i])
            if chain.conclusion is not None:
                concl[chain.conclusion] += 1
            counts[chain.id] = k
            added = k
            walk(i + 1, size + k)
        if added:
            if added % 2:
                parity.symmetric_difference_update(chain_parity[i])
            if chain.conclusion is not None:
                concl[chain.conclusion] -= added
            del counts[chain.id]

    walk(0, 0)
    grouped: dict[frozenset[Token], list[_MultisetEntry]] = defaultdict(list)
    for entry in entries:
        grouped[entry.signature].append(entry)
    return {sig: tuple(sorted(group, key=lambda e: (e.size, e.ids)))
            for sig, group in grouped.items()}


def _fresh_parity(fresh: Chain) -> frozenset[Token]:
    odd: set[Token] = set()
    for tok in fresh.body:
        odd.symmetric_difference_update((tok,))
    return frozenset(odd)


def _token_sharing_connected(chains: list[Chain]) -> bool:
    nodes = len(chains)
    parent = list(range(nodes))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    first_node: dict[Token, int] = {}
    for node_idx, chain in enumerate(chains):
        for tok in chain.tokens():
            if tok in first_node:
                ra, rb = find(first_node[tok]), find(node_idx)
                if ra != rb:
                    parent[ra] = rb
            else:
                first_node[tok] = node_idx
    return len({find(i) for i in range(nodes)}) == 1


def _plausible(fresh: Chain, entry: _MultisetEntry, store: ChainStore,
               dangler: Token) -> bool:
    """Cheap necessary checks: token-sharing connectivity and pair capacity.

    Both the full selection (with fresh) and the store selection alone
    must share tokens connectedly, mirroring the bond-graph requirements.
    """
    chains = [store.get(cid) for cid, _ in entry.counts]
    if not _token_sharing_connected([fresh] + chains):
        return False
    if not _token_sharing_connected(chains):
        return False

    # no single instance may hold more than half of a token's occurrences
    totals: Counter[Token] = Counter(fresh.body)
    per_instance: dict[Token, int] = Counter(fresh.body)
    for (cid, k), chain in zip(entry.counts, chains):
        local = Counter(chain.tokens())
        for tok, c in local.items():
            totals[tok] += c * k
            if c > per_instance.get(tok, 0):
                per_instance[tok] = c
    for tok, total in totals.items():
        allowance = 1 if tok == dangler else 0
        if 2 * per_instance[tok] > total + allowance:
            return False
    return True


def enumerate_complexes(fresh: Chain, store: ChainStore,
                        cfg: SearchConfig | None = None
                        ) -> Iterator[tuple[Complex, PositionAssignment]]:
    """Yield every valid complex within bounds, deterministically ordered.

    Order: instance count, then lexicographic chain-id multiset, then
    bond-matching enumeration order.  This exhaustive stream is the
    brute-force oracle behind every rejection claim.
    """
    cfg = cfg or SearchConfig()
    if fresh.conclusion is not None:
        raise ValueError("fresh chain must be conclusion-free")
    max_instances = cfg.resolved_max_instances(store)
    index = _multiset_index(store, cfg.max_copies_per_chain, max_instances - 1)
    base = _fresh_parity(fresh)

    candidates: list[tuple[_MultisetEntry, Token]] = []
    for dangler in store.conclusion_tokens():
        target = frozenset(base.symmetric_difference((dangler,)))
        for entry in index.get(target, ()):
            if dangler in entry.conclusions:
                candidates.append((entry, dangler))
    candidates.sort(key=lambda pair: (pair[0].size, pair[0].ids))

    for entry, dangler in candidates:
        if not _plausible(fresh, entry, store, dangler):
            continue
        yield from _enumerate_matchings(fresh, store, entry, dangler, cfg)


class _IncrementalPositions:
    """Difference-constraint state with trail-based rollback.

    Longest-path distances over (integer weight, strict-edge count)
    pairs, one node per occurrence plus a constant anchor.  Body order
    and fresh pinning are static; each bond adds coincidence edges, the
    span bound for newly bonded occurrences, and the body-span interval
    for newly bonded conclusions.  A distance exceeding the simple-path
    limits certifies a positive cycle, i.e. infeasibility.
    """

    def __init__(self, instances: tuple[ChainInstance, ...], n: int,
                 enforce_span: bool, enforce_interval: bool):
        self.n = n
        self.enforce_span = enforce_span
        self.enforce_interval = enforce_interval
        self.node_of: dict[Occurrence, int] = {}
        self.first_last: dict[int, tuple[Occurrence, Occurrence]] = {}
        idx = 1  # node 0 anchors the constants
        for inst in instances:
            body_len = len(inst.chain.body)
            for k in range(1, body_len + 1):
                self.node_of[Occurrence.body(inst.instance_id, k)] = idx
                idx += 1
            if inst.chain.conclusion is not None:
                self.node_of[Occurrence.conclusion(inst.instance_id)] = idx
                idx += 1
            self.first_last[inst.instance_id] = (
                Occurrence.body(inst.instance_id, 1),
                Occurrence.body(inst.instance_id, body_len))
        self.dist: list[tuple[int, int]] = [(0, 0)] * idx
        self.out: list[list[tuple[int, int, int]]] = [[] for _ in range(idx)]
        self.trail: list[tuple] = []
        self.span_bounded: set[int] = set()
        self.w_limit = n
        self.e_limit = sum(len(inst.chain.body) - 1 for inst in instances)

        for inst in instances:
            if inst.is_fresh:
                for k in range(1, len(inst.chain.body) + 1):
                    node = self.node_of[Occurrence.body(inst.instance_id, k)]
                    self._add_edge(0, node, k, 0)
                    self._add_edge(node, 0, -k, 0)
            for k in range(1, len(inst.chain.body)):
                a = self.node_of[Occurrence.body(inst.instance_id, k)]
                b = self.node_of[Occurrence.body(inst.instance_id, k + 1)]
                self._add_edge(a, b, 0, 1)

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int):
        while len(self.trail) > mark:
            entry = self.trail.pop()
            if entry[0] == "d":
                self.dist[entry[1]] = entry[2]
            elif entry[0] == "e":
                self.out[entry[1]].pop()
            else:
                self.span_bounded.discard(entry[1])

    def _add_edge(self, u: int, v: int, w: int, e: int) -> bool:
        self.out[u].append((v, w, e))
        self.trail.append(("e", u))
        du = self.dist[u]
        return self._relax(v, (du[0] + w, du[1] + e))

    def _relax(self, v: int, cand: tuple[int, int]) -> bool:
        queue = [(v, cand)]
        while queue:
            v, cand = queue.pop()
            if cand <= self.dist[v]:
                continue
            if cand[0] > self.w_limit or cand[1] > self.e_limit:
                return False
            self.trail.append(("d", v, self.dist[v]))
            self.dist[v] = cand
            for t, w, e in self.out[v]:
                c2 = (cand[0] + w, cand[1] + e)
                if c2 > self.dist[t]:
                    queue.append((t, c2))
        return True

    def bond(self, a: Occurrence, b: Occurrence) -> bool:
        na, nb = self.node_of[a], self.node_of[b]
        if not self._add_edge(na, nb, 0, 0):
            return False
        if not self._add_edge(nb, na, 0, 0):
            return False
        for occ, node in ((a, na), (b, nb)):
            if self.enforce_span and node not in self.span_bounded:
                self.span_bounded.add(node)
                self.trail.append(("b", node))
                if not self._add_edge(0, node, 1, 0):
                    return False
                if not self._add_edge(node, 0, -self.n, 0):
                    return False
            if self.enforce_interval and occ.is_conclusion:
                first, last = self.first_last[occ.instance]
                if not self._add_edge(self.node_of[first], node, 0, 0):
                    return False
                if not self._add_edge(node, self.node_of[last], 0, 0):
                    return False
        return True

    def assignment(self, instances: tuple[ChainInstance, ...],
                   bonded: set[Occurrence]) -> PositionAssignment:
        eps = Fraction(1, self.e_limit + 1)
        base_w, base_e = self.dist[0]
        positions: dict[Occurrence, Fraction] = {}
        for occ, node in self.node_of.items():
            if occ.is_conclusion and occ not in bonded:
                continue
            w, e = self.dist[node]
            positions[occ] = Fraction(w - base_w) + Fraction(e - base_e) * eps
        for inst in instances:
            concl = Occurrence.conclusion(inst.instance_id)
            if inst.chain.conclusion is None or concl in positions:
                continue
            first, last = self.first_last[inst.instance_id]
            positions[concl] = (positions[first] + positions[last]) / 2
        return PositionAssignment(positions)


def _enumerate_matchings(fresh: Chain, store: ChainStore, entry: _MultisetEntry,
                         dangler: Token, cfg: SearchConfig
                         ) -> Iterator[tuple[Complex, PositionAssignment]]:
    instances = [ChainInstance(0, FRESH, 1, fresh)]
    next_id = 1
    for cid, k in entry.counts:
        chain = store.get(cid)
        for copy in range(1, k + 1):
            instances.append(ChainInstance(next_id, cid, copy, chain))
            next_id += 1
    instances_t = tuple(instances)
    inst_by_id = {inst.instance_id: inst for inst in instances_t}

    by_token: dict[Token, list[Occurrence]] = defaultdict(list)
    for inst in instances_t:
        for k in range(1, len(inst.chain.body) + 1):
            occ = Occurrence.body(inst.instance_id, k)
            by_token[inst.chain.body[k - 1]].append(occ)
        if inst.chain.conclusion is not None:
            by_token[inst.chain.conclusion].append(
                Occurrence.conclusion(inst.instance_id))
    for occs in by_token.values():
        occs.sort(key=occ_sort_key)

    # fresh-anchored labels first: their bonds pin integer positions and
    # let the feasibility prune fire early
    def class_key(item: tuple[Token, list[Occurrence]]):
        token, occs = item
        anchored = any(occ.instance == 0 for occ in occs)
        return (0 if anchored else 1, token.sort_key())

    classes = sorted(by_token.items(), key=class_key)

    solver = _IncrementalPositions(instances_t, len(fresh.body),
                                   cfg.enforce_span, cfg.enforce_conclusion_interval)
    bonds: list[Bond] = []
    touched: dict[int, int] = {inst.instance_id: 0 for inst in instances_t}

    def pair_up(occs: list[Occurrence], class_idx: int,
                may_skip: bool) -> Iterator[tuple[Complex, PositionAssignment]]:
        if not occs:
            yield from fill_class(class_idx + 1)
            return
        head, rest = occs[0], occs[1:]
        if may_skip and head.is_conclusion:
            yield from pair_up(rest, class_idx, False)
        offered: set[tuple[str, int]] = set()
        for j, partner in enumerate(rest):
            if partner.instance == head.instance:
                continue
            # untouched copies of the same chain are interchangeable:
            # offer only the lowest one per slot
            pinst = inst_by_id[partner.instance]
            if not pinst.is_fresh and touched[partner.instance] == 0:
                key = (pinst.source, partner.slot)
                if key in offered:
                    continue
                offered.add(key)
            mark = solver.mark()
            if solver.bond(head, partner):
                bonds.append(Bond(head, partner))
                touched[head.instance] += 1
                touched[partner.instance] += 1
                yield from pair_up(rest[:j] + rest[j + 1:], class_idx, may_skip)
                touched[head.instance] -= 1
                touched[partner.instance] -= 1
                bonds.pop()
            solver.undo(mark)

    def fill_class(class_idx: int) -> Iterator[tuple[Complex, PositionAssignment]]:
        if class_idx == len(classes):
            x = Complex(instances_t, frozenset(bonds))
            if instances_connected(x) and store_web_connected(x):
                bonded = {occ for bond in bonds for occ in bond.ends()}
                yield x, solver.assignment(instances_t, bonded)
            return
        token, occs = classes[class_idx]
        yield from pair_up(list(occs), class_idx, token == dangler)

    yield from fill_class(0)


def recognize(fresh: Chain, store: ChainStore,
              cfg: SearchConfig | None = None) -> RecognitionResult:
    """Decide whether the fresh chain completes a complex over the store.

    mode='first' stops at the minimal witness (instance count, then
    chain-id multiset); mode='all' collects every witness within bounds.
    Exhausted bounds mean rejection, not an error.
    """
    cfg = cfg or SearchConfig()
    stream = enumerate_complexes(fresh, store, cfg)
    if cfg.mode == "first":
        witnesses = []
        for item in stream:
            witnesses.append(item)
            break
    else:
        witnesses = list(stream)
    conclusions = frozenset(
        tok for tok in (dangling_token(x) for x, _ in witnesses) if tok is not None)
    return RecognitionResult(bool(witnesses), conclusions, witnesses)
