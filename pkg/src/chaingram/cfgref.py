"""CKY reference recognizer for pure stores, plus the differential crosscheck.

A store is pure when every chain is either a single word classified by a
category or a category-only body concluded by a category; such a store
is exactly a context-free grammar (body = right-hand side, conclusion =
left-hand side).  The chart recognizer supports arbitrary rule arity and
unit-rule closure.  A CKY derivation converts constructively into a
complex (one instance per tree node, conclusion-to-body bonds along the
edges), which is the soundness witness for the crosscheck: every
CFG-accepted sentence must be complex-accepted.  The converse does not
hold by design; analogical accepts are reported, never failed.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .chains import Chain, ChainStore, Token
from .complexes import FRESH, Bond, ChainInstance, Complex, Occurrence, SearchConfig, validate
from .engine import recognize


def is_pure(store: ChainStore) -> bool:
    for chain in store:
        if chain.conclusion is None or not chain.conclusion.is_category:
            return False
        if len(chain.body) == 1 and chain.body[0].is_word:
            continue
        if all(tok.is_category for tok in chain.body):
            continue
        return False
    return True


def check_pure(store: ChainStore):
    if not is_pure(store):
        raise ValueError("store is not pure: every chain must be word->category "
                         "or categories->category")


@dataclass(frozen=True)
class ParseTree:
    """One CKY derivation node: the chain used and the children it consumes."""

    category: str
    chain_id: str
    span: tuple[int, int]  # 0-based, half-open
    children: tuple["ParseTree", ...] = ()

    def nodes(self) -> Iterable["ParseTree"]:
        yield self
        for child in self.children:
            yield from child.nodes()


# backpointer: ("lex", chain_id) or ("rule", chain_id, ((cat, i, j), ...))
_Cell = dict[str, tuple]


def _chart(words: list[str], store: ChainStore) -> dict[tuple[int, int], _Cell]:
    lexical: dict[str, list[tuple[str, str]]] = defaultdict(list)
    unit_rules: list[tuple[str, str, str]] = []
    long_rules: list[tuple[str, tuple[str, ...], str]] = []
    for chain in store:
        lhs = chain.conclusion.label
        if len(chain.body) == 1 and chain.body[0].is_word:
            lexical[chain.body[0].label].append((lhs, chain.id))
        elif len(chain.body) == 1:
            unit_rules.append((lhs, chain.body[0].label, chain.id))
        else:
            long_rules.append((lhs, tuple(t.label for t in chain.body), chain.id))

    n = len(words)
    chart: dict[tuple[int, int], _Cell] = {}

    def close(cell: _Cell, i: int, j: int):
        queue = list(cell)
        while queue:
            cat = queue.pop(0)
            for lhs, rhs, cid in unit_rules:
                if rhs == cat and lhs not in cell:
                    cell[lhs] = ("rule", cid, ((rhs, i, j),))
                    queue.append(lhs)

    def split_match(rhs: tuple[str, ...], i: int, j: int) -> tuple | None:
        """First composition of [i, j) into consecutive spans deriving rhs."""
        if len(rhs) == 1:
            return ((rhs[0], i, j),) if rhs[0] in chart[(i, j)] else None
        head = rhs[0]
        for mid in range(i + 1, j - len(rhs) + 2):
            if head in chart[(i, mid)]:
                tail = split_match(rhs[1:], mid, j)
                if tail is not None:
                    return ((head, i, mid),) + tail
        return None

    for span in range(1, n + 1):
        for i in range(n - span + 1):
            j = i + span
            cell: _Cell = {}
            if span == 1:
                for cat, cid in lexical.get(words[i], []):
                    cell.setdefault(cat, ("lex", cid))
            chart[(i, j)] = cell
            for lhs, rhs, cid in long_rules:
                if lhs in cell or len(rhs) > span:
                    continue
                parts = split_match(rhs, i, j)
                if parts is not None:
                    cell[lhs] = ("rule", cid, parts)
            close(cell, i, j)
    return chart


def cky_reference(fresh: Chain, store: ChainStore) -> frozenset[Token]:
    """Categories deriving the whole fresh body under the induced grammar."""
    check_pure(store)
    words = []
    for tok in fresh.body:
        if not tok.is_word:
            raise ValueError("reference recognizer takes word-only input")
        words.append(tok.label)
    chart = _chart(words, store)
    return frozenset(Token.category(cat) for cat in chart[(0, len(words))])


def cky_tree(fresh: Chain, store: ChainStore, category: Token) -> ParseTree | None:
    """One derivation tree for the category, or None when not derivable."""
    check_pure(store)
    words = [tok.label for tok in fresh.body]
    chart = _chart(words, store)

    def build(cat: str, i: int, j: int) -> ParseTree:
        bp = chart[(i, j)][cat]
        if bp[0] == "lex":
            return ParseTree(cat, bp[1], (i, j))
        _, cid, parts = bp
        children = tuple(build(c, a, b) for c, a, b in parts)
        return ParseTree(cat, cid, (i, j), children)

    if category.label not in chart[(0, len(words))]:
        return None
    return build(category.label, 0, len(words))


def tree_to_complex(tree: ParseTree, fresh: Chain, store: ChainStore) -> Complex:
    """Stack the derivation's chains into a complex with the root dangling."""
    instances = [ChainInstance(0, FRESH, 1, fresh)]
    bonds: list[Bond] = []
    copies: dict[str, int] = defaultdict(int)

    def walk(node: ParseTree) -> int:
        chain = store.get(node.chain_id)
        copies[node.chain_id] += 1
        iid = len(instances)
        instances.append(ChainInstance(iid, node.chain_id, copies[node.chain_id], chain))
        if not node.children:
            bonds.append(Bond(Occurrence.body(iid, 1),
                              Occurrence.body(0, node.span[0] + 1)))
        else:
            for k, child in enumerate(node.children, start=1):
                child_iid = walk(child)
                bonds.append(Bond(Occurrence.body(iid, k),
                                  Occurrence.conclusion(child_iid)))
        return iid

    walk(tree)
    return Complex(tuple(instances), frozenset(bonds))


@dataclass
class CrosscheckReport:
    lines: list[tuple[str, bool, bool]] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    analogy_accepts: list[str] = field(default_factory=list)

    @property
    def checked(self) -> int:
        return len(self.lines)

    def render(self) -> str:
        return "".join(f"{s}\tcfg:{int(c)}\tcomplex:{int(x)}\n"
                       for s, c, x in self.lines)


def crosscheck_store(store: ChainStore, max_len: int,
                     cfg: SearchConfig | None = None) -> CrosscheckReport:
    """Compare the reference grammar and the complex engine sentence by sentence.

    Enumerates every sentence over the store's word vocabulary up to
    max_len.  A violation is a CFG-accepted sentence (any category) that
    the engine rejects; the engine's bounds are widened to the size of
    the constructive witness so only genuine disagreements count.
    Engine-only accepts are analogy findings, reported informationally.
    """
    check_pure(store)
    cfg = cfg or SearchConfig()
    report = CrosscheckReport()
    vocab = store.word_vocabulary()
    for length in range(1, max_len + 1):
        for combo in itertools.product(vocab, repeat=length):
            sentence = " ".join(combo)
            fresh = Chain(tuple(Token.word(w) for w in combo))
            cats = sorted(cky_reference(fresh, store), key=Token.sort_key)
            if cats:
                complex_ok = _covers(fresh, store, cats, cfg, report, sentence)
            else:
                complex_ok = recognize(fresh, store, cfg).accepted
                if complex_ok:
                    report.analogy_accepts.append(sentence)
            report.lines.append((sentence, bool(cats), complex_ok))
    return report


def _covers(fresh: Chain, store: ChainStore, cats: list[Token],
            cfg: SearchConfig, report: CrosscheckReport, sentence: str) -> bool:
    from .engine import enumerate_complexes
    from .complexes import dangling_token

    need_instances = cfg.resolved_max_instances(store)
    need_copies = cfg.max_copies_per_chain
    for cat in cats:
        tree = cky_tree(fresh, store, cat)
        assert tree is not None
        witness = tree_to_complex(tree, fresh, store)
        if not validate(witness, fresh, store, cfg).valid:
            report.violations.append(f"{sentence}: constructed witness for "
                                     f"{cat.label} is invalid")
        node_list = list(tree.nodes())
        need_instances = max(need_instances, len(node_list) + 1)
        multiplicity = defaultdict(int)
        for node in node_list:
            multiplicity[node.chain_id] += 1
        need_copies = max(need_copies, max(multiplicity.values()))

    widened = SearchConfig(max_instances=need_instances,
                           max_copies_per_chain=need_copies,
                           enforce_span=cfg.enforce_span,
                           enforce_conclusion_interval=cfg.enforce_conclusion_interval,
                           mode="all")
    pending = {cat for cat in cats}
    found_any = False
    for x, _ in enumerate_complexes(fresh, store, widened):
        found_any = True
        pending.discard(dangling_token(x))
        if not pending:
            break
    for cat in sorted(pending, key=Token.sort_key):
        report.violations.append(f"{sentence}: grammar derives {cat.label} "
                                 f"but no complex concludes it")
    return found_any
