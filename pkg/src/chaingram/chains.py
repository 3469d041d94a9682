"""Tokens, chains, and chain stores.

A chain is an ordered body of tokens plus an optional conclusion token.
Stores are plain text, one chain per line:

    "cows" -> NP
    NP - V2 - NP -> S
    # full-line comment; `# @id name` names the next chain

Quoted tokens are word occurrences, bare identifiers are grammatical
categories.  `-` separates body tokens, `->` attaches the conclusion.
All values are immutable after construction; store extension returns a
new store.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

WORD = "Word"
CATEGORY = "Category"

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_AUTO_ID_RE = re.compile(r"c([0-9]+)")


class ChainParseError(ValueError):
    """Malformed chain-store text; carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    """A word occurrence or a grammatical-category label."""

    kind: str
    label: str

    def __post_init__(self):
        if self.kind not in (WORD, CATEGORY):
            raise ValueError(f"unknown token kind {self.kind!r}")
        if not self.label or any(ch.isspace() for ch in self.label):
            raise ValueError(f"token label must be non-empty without whitespace: {self.label!r}")
        if self.kind == WORD and '"' in self.label:
            raise ValueError(f"word label may not contain a double quote: {self.label!r}")
        if self.kind == CATEGORY and not _IDENT_RE.fullmatch(self.label):
            raise ValueError(f"category label must be an identifier: {self.label!r}")

    @classmethod
    def word(cls, label: str) -> "Token":
        return cls(WORD, label)

    @classmethod
    def category(cls, label: str) -> "Token":
        return cls(CATEGORY, label)

    @property
    def is_word(self) -> bool:
        return self.kind == WORD

    @property
    def is_category(self) -> bool:
        return self.kind == CATEGORY

    def notation(self) -> str:
        """The token as it appears in chain-store text."""
        return f'"{self.label}"' if self.kind == WORD else self.label

    def sort_key(self) -> tuple[str, str]:
        return (self.kind, self.label)


@dataclass(frozen=True)
class Chain:
    """Ordered token body plus optional conclusion.

    The id is bookkeeping only: two chains are equal iff body and
    conclusion match, regardless of id.
    """

    body: tuple[Token, ...]
    conclusion: Token | None = None
    id: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if not self.body:
            raise ValueError("chain body must hold at least one token")

    def with_id(self, chain_id: str) -> "Chain":
        return Chain(self.body, self.conclusion, chain_id)

    def tokens(self) -> Iterator[Token]:
        """Body tokens followed by the conclusion, when present."""
        yield from self.body
        if self.conclusion is not None:
            yield self.conclusion


@dataclass(frozen=True)
class ChainStore:
    """Ordered, immutable collection of chains with unique ids."""

    chains: tuple[Chain, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "chains", tuple(self.chains))
        seen: set[str] = set()
        for chain in self.chains:
            if not chain.id:
                raise ValueError("store chains need an id")
            if chain.id in seen:
                raise ValueError(f"duplicate chain id {chain.id!r}")
            seen.add(chain.id)

    def __iter__(self) -> Iterator[Chain]:
        return iter(self.chains)

    def __len__(self) -> int:
        return len(self.chains)

    def get(self, chain_id: str) -> Chain:
        for chain in self.chains:
            if chain.id == chain_id:
                return chain
        raise KeyError(f"no chain with id {chain_id!r}")

    def add(self, chain: Chain) -> "ChainStore":
        return ChainStore(self.chains + (chain,))

    def next_id(self) -> str:
        used = {chain.id for chain in self.chains}
        highest = 0
        for chain_id in used:
            m = _AUTO_ID_RE.fullmatch(chain_id)
            if m:
                highest = max(highest, int(m.group(1)))
        candidate = highest + 1
        while f"c{candidate}" in used:
            candidate += 1
        return f"c{candidate}"

    def word_vocabulary(self) -> tuple[str, ...]:
        """Distinct word labels occurring in chain bodies, sorted."""
        words = {tok.label for chain in self.chains for tok in chain.body if tok.is_word}
        return tuple(sorted(words))

    def conclusion_tokens(self) -> tuple[Token, ...]:
        """Distinct conclusion tokens, sorted."""
        concl = {chain.conclusion for chain in self.chains if chain.conclusion is not None}
        return tuple(sorted(concl, key=Token.sort_key))


def parse_chain_line(line: str, lineno: int = 1) -> Chain | None:
    """Parse one line of chain notation.

    Returns None for blank lines and comments (first non-space char '#').
    Raises ChainParseError with line/column on malformed input.
    """
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None

    pos = 0
    n = len(line)

    def skip_ws():
        nonlocal pos
        while pos < n and line[pos].isspace():
            pos += 1

    def read_token() -> Token:
        nonlocal pos
        if pos >= n:
            raise ChainParseError("expected token", lineno, pos + 1)
        if line[pos] == '"':
            opening = pos
            pos += 1
            begin = pos
            while pos < n and line[pos] != '"':
                if line[pos].isspace():
                    raise ChainParseError("whitespace inside word token", lineno, pos + 1)
                pos += 1
            if pos >= n:
                raise ChainParseError("unterminated word token", lineno, opening + 1)
            label = line[begin:pos]
            pos += 1
            if not label:
                raise ChainParseError("empty word token", lineno, opening + 1)
            return Token.word(label)
        m = _IDENT_RE.match(line, pos)
        if not m:
            raise ChainParseError(f"expected token, found {line[pos]!r}", lineno, pos + 1)
        pos = m.end()
        return Token.category(m.group())

    skip_ws()
    body = [read_token()]
    conclusion: Token | None = None
    while True:
        skip_ws()
        if pos >= n:
            break
        if line[pos] != "-":
            raise ChainParseError(f"expected '-' or '->', found {line[pos]!r}", lineno, pos + 1)
        if pos + 1 < n and line[pos + 1] == ">":
            pos += 2
            skip_ws()
            conclusion = read_token()
            skip_ws()
            if pos < n:
                raise ChainParseError("trailing text after conclusion", lineno, pos + 1)
            break
        pos += 1
        skip_ws()
        body.append(read_token())
    return Chain(tuple(body), conclusion)


def format_chain(chain: Chain) -> str:
    """Canonical single-line notation; round-trips through parse_chain_line."""
    text = " - ".join(tok.notation() for tok in chain.body)
    if chain.conclusion is not None:
        text += f" -> {chain.conclusion.notation()}"
    return text


def load_store(document: str) -> ChainStore:
    """Parse a chain-store document.

    Chains keep file order and get ids c1, c2, ... by position unless a
    preceding `# @id name` directive names them.  The first bad line
    aborts the load.
    """
    chains: list[Chain] = []
    used: set[str] = set()
    pending_id: str | None = None
    ordinal = 0
    for lineno, line in enumerate(document.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            directive = stripped[1:].strip()
            if directive.startswith("@id"):
                name = directive[3:].strip()
                if not name or any(ch.isspace() for ch in name):
                    raise ChainParseError("@id directive needs a single name", lineno, 1)
                pending_id = name
            continue
        if not stripped:
            continue
        chain = parse_chain_line(line, lineno)
        assert chain is not None
        ordinal += 1
        chain_id = pending_id if pending_id is not None else f"c{ordinal}"
        pending_id = None
        if chain_id in used:
            raise ChainParseError(f"duplicate chain id {chain_id!r}", lineno, 1)
        used.add(chain_id)
        chains.append(chain.with_id(chain_id))
    return ChainStore(tuple(chains))


def tokenize_sentence(text: str) -> Chain:
    """Whitespace-split a sentence into a conclusion-free word chain."""
    fields = text.split()
    if not fields:
        raise ValueError("sentence is empty")
    return Chain(tuple(Token.word(w) for w in fields))


def consolidate(store: ChainStore, fresh: Chain, label: Token) -> ChainStore:
    """Memorize a confirmed chain under a category label.

    Appends Chain(fresh.body -> label); returns the store unchanged when
    an identical (body, conclusion) chain already exists.
    """
    if fresh.conclusion is not None:
        raise ValueError("fresh chain already carries a conclusion")
    if not label.is_category:
        raise ValueError("conclusion label must be a category token")
    for chain in store:
        if chain.body == fresh.body and chain.conclusion == label:
            return store
    return store.add(Chain(fresh.body, label, store.next_id()))
