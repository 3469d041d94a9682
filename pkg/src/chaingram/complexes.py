"""Chain-instance complexes: bonds, completeness rules, position feasibility.

A complex glues one fresh chain instance to copies of store chains by
bonding pairs of equal tokens.  It is complete when exactly one
occurrence stays unbonded, that occurrence is a conclusion slot, the
bond graph is connected, and the store instances stay connected even
without the fresh instance (one recognition, one web of knowledge).  On
top of the combinatorial rules the complex has to admit a temporal
embedding: fresh body tokens sit at integer positions 1..n, every body
runs strictly left to right, bonded tokens coincide, a bonded conclusion
stays over its own body span, and every bonded token stays inside the
sentence span [1, n].  Feasibility is decided over the rationals via
longest-path propagation on the merged-occurrence constraint graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .chains import Chain, ChainStore, Token

FRESH = "fresh"
CONCLUSION = 0  # slot value marking a conclusion occurrence


@dataclass(frozen=True)
class ChainInstance:
    """One usable copy of a chain inside a complex."""

    instance_id: int
    source: str  # FRESH or a store chain id
    copy_index: int
    chain: Chain = field(compare=False, repr=False)

    @property
    def is_fresh(self) -> bool:
        return self.source == FRESH


@dataclass(frozen=True)
class Occurrence:
    """A token position within an instance: body index >= 1 or CONCLUSION."""

    instance: int
    slot: int

    @classmethod
    def body(cls, instance: int, index: int) -> "Occurrence":
        if index < 1:
            raise ValueError("body slots are 1-based")
        return cls(instance, index)

    @classmethod
    def conclusion(cls, instance: int) -> "Occurrence":
        return cls(instance, CONCLUSION)

    @property
    def is_conclusion(self) -> bool:
        return self.slot == CONCLUSION

    def name(self) -> str:
        return f"i{self.instance}_{'c' if self.is_conclusion else self.slot}"


def occ_sort_key(occ: Occurrence) -> tuple[int, int, int]:
    # body slots in order, conclusion last
    return (occ.instance, 1 if occ.is_conclusion else 0, occ.slot)


@dataclass(frozen=True)
class Bond:
    """Unordered attachment of two equal tokens in distinct instances."""

    a: Occurrence
    b: Occurrence

    def __post_init__(self):
        if self.a.instance == self.b.instance:
            raise ValueError("a bond must join distinct instances")
        if occ_sort_key(self.b) < occ_sort_key(self.a):
            first, second = self.b, self.a
            object.__setattr__(self, "a", first)
            object.__setattr__(self, "b", second)

    def ends(self) -> tuple[Occurrence, Occurrence]:
        return (self.a, self.b)

    def sort_key(self):
        return (occ_sort_key(self.a), occ_sort_key(self.b))


@dataclass(frozen=True)
class Complex:
    instances: tuple[ChainInstance, ...]
    bonds: frozenset[Bond]

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(
            sorted(self.instances, key=lambda inst: inst.instance_id)))
        object.__setattr__(self, "bonds", frozenset(self.bonds))
        ids = [inst.instance_id for inst in self.instances]
        if len(set(ids)) != len(ids):
            raise ValueError("instance ids must be unique")

    def instance(self, instance_id: int) -> ChainInstance:
        for inst in self.instances:
            if inst.instance_id == instance_id:
                return inst
        raise KeyError(f"no instance {instance_id}")

    def occurrences(self) -> list[Occurrence]:
        out: list[Occurrence] = []
        for inst in self.instances:
            out.extend(Occurrence.body(inst.instance_id, k)
                       for k in range(1, len(inst.chain.body) + 1))
            if inst.chain.conclusion is not None:
                out.append(Occurrence.conclusion(inst.instance_id))
        return out

    def token_at(self, occ: Occurrence) -> Token:
        chain = self.instance(occ.instance).chain
        if occ.is_conclusion:
            if chain.conclusion is None:
                raise ValueError(f"{occ.name()} names a missing conclusion")
            return chain.conclusion
        if occ.slot > len(chain.body):
            raise ValueError(f"{occ.name()} is past the end of its body")
        return chain.body[occ.slot - 1]

    def sorted_bonds(self) -> list[Bond]:
        return sorted(self.bonds, key=Bond.sort_key)

    def fresh_instance(self) -> ChainInstance:
        for inst in self.instances:
            if inst.is_fresh:
                return inst
        raise ValueError("complex has no fresh instance")


@dataclass
class PositionAssignment:
    """Rational time coordinate for every occurrence; bonded pairs coincide."""

    positions: Mapping[Occurrence, Fraction]

    def __getitem__(self, occ: Occurrence) -> Fraction:
        return self.positions[occ]

    def items(self):
        return self.positions.items()


@dataclass(frozen=True)
class SearchConfig:
    """Bounds and rule toggles for recognition searches.

    max_instances of None means 8, raised to 9 for stores holding more
    than 7 chains (the largest worked examples need 9 instances).
    """

    max_instances: int | None = None
    max_copies_per_chain: int = 3
    enforce_span: bool = True
    enforce_conclusion_interval: bool = True
    mode: str = "first"

    def __post_init__(self):
        if self.max_instances is not None and self.max_instances < 1:
            raise ValueError("max_instances must be >= 1")
        if self.max_copies_per_chain < 1:
            raise ValueError("max_copies_per_chain must be >= 1")
        if self.mode not in ("first", "all"):
            raise ValueError("mode must be 'first' or 'all'")

    def resolved_max_instances(self, store: ChainStore) -> int:
        if self.max_instances is not None:
            return self.max_instances
        return 9 if len(store) > 7 else 8


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    dangling: Token | None = None
    first_violated_rule: str | None = None


def merged_classes(x: Complex) -> list[tuple[Occurrence, tuple[Occurrence, ...]]]:
    """Occurrence classes after merging bonded pairs, canonically ordered."""
    partner: dict[Occurrence, Occurrence] = {}
    for bond in x.bonds:
        partner[bond.a] = bond.b
        partner[bond.b] = bond.a
    classes: list[tuple[Occurrence, tuple[Occurrence, ...]]] = []
    seen: set[Occurrence] = set()
    for occ in sorted(x.occurrences(), key=occ_sort_key):
        if occ in seen:
            continue
        other = partner.get(occ)
        members = (occ,) if other is None else tuple(sorted((occ, other), key=occ_sort_key))
        seen.update(members)
        classes.append((members[0], members))
    return classes


def bonded_occurrences(x: Complex) -> set[Occurrence]:
    out: set[Occurrence] = set()
    for bond in x.bonds:
        out.update(bond.ends())
    return out


def dangling_occurrence(x: Complex) -> Occurrence | None:
    """The single unbonded conclusion occurrence, if the complex has one."""
    bonded = bonded_occurrences(x)
    unbonded = [occ for occ in x.occurrences() if occ not in bonded]
    if len(unbonded) == 1 and unbonded[0].is_conclusion:
        return unbonded[0]
    return None


def dangling_token(x: Complex) -> Token | None:
    occ = dangling_occurrence(x)
    return None if occ is None else x.token_at(occ)


def _propagate(node_count: int,
               edges: list[tuple[int, int, int, int]]) -> list[tuple[int, int]] | None:
    """Longest-path distances under (weight, strict-count) lexicographic sums.

    Edge (u, v, w, e) encodes pos[v] - pos[u] >= w, strictly when e = 1.
    Starting every node at (0, 0) acts as a super-source; a relaxation
    surviving node_count rounds certifies a positive cycle (infeasible).
    """
    dist = [(0, 0)] * node_count
    for _ in range(node_count):
        changed = False
        for u, v, w, e in edges:
            cand = (dist[u][0] + w, dist[u][1] + e)
            if cand > dist[v]:
                dist[v] = cand
                changed = True
        if not changed:
            return dist
    for u, v, w, e in edges:
        if (dist[u][0] + w, dist[u][1] + e) > dist[v]:
            return None
    return dist


def solve_positions(x: Complex, fresh: Chain, *,
                    enforce_span: bool = True,
                    enforce_conclusion_interval: bool = True) -> PositionAssignment | None:
    """Find a temporal embedding of the complex, or None when infeasible.

    Fresh body tokens are pinned to 1..n, bodies increase strictly,
    bonded occurrences coincide, a bonded conclusion stays within its
    chain's body span (closed interval), and bonded occurrences stay in
    [1, n].  Unbonded conclusions carry no constraints; they are placed
    at the midpoint of their body span for rendering.  The returned
    witness is the longest-path canonical assignment.
    """
    fresh_inst = x.fresh_instance()
    n = len(fresh.body)

    partner: dict[Occurrence, Occurrence] = {}
    for bond in x.bonds:
        partner[bond.a] = bond.b
        partner[bond.b] = bond.a

    rep: dict[Occurrence, Occurrence] = {}
    for occ in x.occurrences():
        other = partner.get(occ)
        rep[occ] = occ if other is None else min(occ, other, key=occ_sort_key)

    # Constraint nodes: all body classes plus bonded conclusion classes.
    # Unbonded conclusions (dangling candidates) stay out of the graph.
    def constrained(occ: Occurrence) -> bool:
        return not occ.is_conclusion or occ in partner

    node_of: dict[Occurrence, int] = {}
    zero = 0
    next_node = 1
    for occ in x.occurrences():
        if not constrained(occ):
            continue
        r = rep[occ]
        if r not in node_of:
            node_of[r] = next_node
            next_node += 1

    edges: list[tuple[int, int, int, int]] = []

    def node(occ: Occurrence) -> int:
        return node_of[rep[occ]]

    for k in range(1, n + 1):
        occ = Occurrence.body(fresh_inst.instance_id, k)
        edges.append((zero, node(occ), k, 0))
        edges.append((node(occ), zero, -k, 0))

    for inst in x.instances:
        body_len = len(inst.chain.body)
        for k in range(1, body_len):
            a = Occurrence.body(inst.instance_id, k)
            b = Occurrence.body(inst.instance_id, k + 1)
            edges.append((node(a), node(b), 0, 1))
        if enforce_conclusion_interval and inst.chain.conclusion is not None:
            concl = Occurrence.conclusion(inst.instance_id)
            if concl in partner:
                first = Occurrence.body(inst.instance_id, 1)
                last = Occurrence.body(inst.instance_id, body_len)
                edges.append((node(first), node(concl), 0, 0))
                edges.append((node(concl), node(last), 0, 0))

    if enforce_span:
        bounded: set[int] = set()
        for occ in partner:
            idx = node(occ)
            if idx not in bounded:
                bounded.add(idx)
                edges.append((zero, idx, 1, 0))
                edges.append((idx, zero, -n, 0))

    dist = _propagate(next_node, edges)
    if dist is None:
        return None

    eps = Fraction(1, len(edges) + 2)
    base_w, base_e = dist[zero]

    def value(idx: int) -> Fraction:
        w, e = dist[idx]
        return Fraction(w - base_w) + Fraction(e - base_e) * eps

    positions: dict[Occurrence, Fraction] = {}
    for occ in x.occurrences():
        if constrained(occ):
            positions[occ] = value(node(occ))
    for inst in x.instances:
        if inst.chain.conclusion is None:
            continue
        concl = Occurrence.conclusion(inst.instance_id)
        if concl in positions:
            continue
        first = positions[Occurrence.body(inst.instance_id, 1)]
        last = positions[Occurrence.body(inst.instance_id, len(inst.chain.body))]
        positions[concl] = (first + last) / 2
    return PositionAssignment(positions)


def validate(x: Complex, fresh: Chain, store: ChainStore,
             cfg: SearchConfig | None = None) -> ValidationReport:
    """Check completeness rules C1-C4 and position feasibility.

    first_violated_rule identifies which family failed: C1 (one fresh,
    conclusion-free), C2 (matching over equal tokens), C3 (exactly one
    dangling conclusion), C4 (connectivity), then P5/P4/P2 for position
    failures (identified by re-solving with the span bound, then the
    conclusion interval, relaxed).
    """
    cfg = cfg or SearchConfig()

    for inst in x.instances:
        expected = fresh if inst.is_fresh else store.get(inst.source)
        if inst.chain != expected:
            raise ValueError(f"instance {inst.instance_id} does not match its source chain")

    fresh_insts = [inst for inst in x.instances if inst.is_fresh]
    if len(fresh_insts) != 1 or fresh_insts[0].chain.conclusion is not None:
        return ValidationReport(False, None, "C1")

    seen: set[Occurrence] = set()
    occ_set = set(x.occurrences())
    for bond in x.sorted_bonds():
        for occ in bond.ends():
            if occ not in occ_set:
                raise ValueError(f"bond end {occ.name()} does not exist")
            if occ in seen:
                return ValidationReport(False, None, "C2")
            seen.add(occ)
        if x.token_at(bond.a) != x.token_at(bond.b):
            return ValidationReport(False, None, "C2")

    unbonded = [occ for occ in x.occurrences() if occ not in seen]
    if len(unbonded) != 1 or not unbonded[0].is_conclusion:
        return ValidationReport(False, None, "C3")
    dangling = x.token_at(unbonded[0])

    if not instances_connected(x) or not store_web_connected(x):
        return ValidationReport(False, None, "C4")

    pa = solve_positions(x, fresh,
                         enforce_span=cfg.enforce_span,
                         enforce_conclusion_interval=cfg.enforce_conclusion_interval)
    if pa is None:
        rule = "P2"
        if cfg.enforce_span and solve_positions(
                x, fresh, enforce_span=False,
                enforce_conclusion_interval=cfg.enforce_conclusion_interval) is not None:
            rule = "P5"
        elif cfg.enforce_conclusion_interval and solve_positions(
                x, fresh, enforce_span=cfg.enforce_span,
                enforce_conclusion_interval=False) is not None:
            rule = "P4"
        return ValidationReport(False, None, rule)
    return ValidationReport(True, dangling, None)


def _union_connected(ids: list[int], pairs: Iterable[tuple[int, int]]) -> bool:
    if len(ids) <= 1:
        return True
    parent = {i: i for i in ids}

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(i) for i in ids}) == 1


def instances_connected(x: Complex) -> bool:
    """Bond graph over all instances is connected."""
    return _union_connected(
        [inst.instance_id for inst in x.instances],
        ((b.a.instance, b.b.instance) for b in x.bonds))


def store_web_connected(x: Complex) -> bool:
    """The store instances stay bond-connected without the fresh instance.

    A complete complex is one recognition, not several: the pre-existing
    chains must form a single web of their own.  Dropping this lets a
    fully closed side assembly (for example two pattern copies bonded
    slot by slot) absorb part of the sentence while an unrelated chain
    dangles its conclusion.
    """
    fresh_id = x.fresh_instance().instance_id
    return _union_connected(
        [inst.instance_id for inst in x.instances if inst.instance_id != fresh_id],
        ((b.a.instance, b.b.instance) for b in x.bonds
         if b.a.instance != fresh_id and b.b.instance != fresh_id))
