"""Slash-type calculus: types, the eight combination rules, chart derivation.

Types are atoms or directional fractions: A/B looks right for a B and
yields an A, A\\B looks left for an A and yields a B.  The rule set is
application (R1), composition (R2), associativity (R3) and lifting (R4),
each in a left and a right version.  Because lifting alone never
terminates, derivation search bounds the type size (atom count) and the
number of consecutive unary steps; within those bounds the span chart
enumerates every derivation of the target type.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Right:
    """numerator/denominator: consumes the denominator to its right."""

    numerator: "CatType"
    denominator: "CatType"


@dataclass(frozen=True)
class Left:
    """denominator\\numerator: consumes the denominator to its left."""

    denominator: "CatType"
    numerator: "CatType"


CatType = Union[Atom, Right, Left]

_ATOM_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


def type_size(t: CatType) -> int:
    """Number of atoms in the type."""
    if isinstance(t, Atom):
        return 1
    if isinstance(t, Right):
        return type_size(t.numerator) + type_size(t.denominator)
    return type_size(t.denominator) + type_size(t.numerator)


def subtypes(t: CatType) -> Iterable[CatType]:
    yield t
    if isinstance(t, Right):
        yield from subtypes(t.numerator)
        yield from subtypes(t.denominator)
    elif isinstance(t, Left):
        yield from subtypes(t.denominator)
        yield from subtypes(t.numerator)


def format_type(t: CatType) -> str:
    """Canonical notation; compound operands are bracketed."""
    def operand(s: CatType) -> str:
        return s.name if isinstance(s, Atom) else f"({format_type(s)})"

    if isinstance(t, Atom):
        return t.name
    if isinstance(t, Right):
        return f"{operand(t.numerator)}/{operand(t.denominator)}"
    return f"{operand(t.denominator)}\\{operand(t.numerator)}"


class TypeParseError(ValueError):
    pass


def parse_type(text: str, abbreviations: Mapping[str, CatType] | None = None) -> CatType:
    """Parse slash notation; operators associate to the left.

    Atom names found in the abbreviation table expand to their
    definitions.  The built-in table covers V1, V2, NP1 and NP4.
    """
    abbrevs = DEFAULT_ABBREVIATIONS if abbreviations is None else abbreviations
    pos = 0
    n = len(text)

    def skip_ws():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def parse_term() -> CatType:
        nonlocal pos
        skip_ws()
        if pos >= n:
            raise TypeParseError("unexpected end of type")
        if text[pos] == "(":
            pos += 1
            inner = parse_expr()
            skip_ws()
            if pos >= n or text[pos] != ")":
                raise TypeParseError("missing closing bracket")
            pos += 1
            return inner
        m = _ATOM_RE.match(text, pos)
        if not m:
            raise TypeParseError(f"expected atom at column {pos + 1}")
        pos = m.end()
        name = m.group()
        return abbrevs.get(name, Atom(name))

    def parse_expr() -> CatType:
        nonlocal pos
        t = parse_term()
        while True:
            skip_ws()
            if pos < n and text[pos] == "/":
                pos += 1
                t = Right(t, parse_term())
            elif pos < n and text[pos] == "\\":
                pos += 1
                t = Left(t, parse_term())
            else:
                return t

    result = parse_expr()
    skip_ws()
    if pos < n:
        raise TypeParseError(f"trailing text at column {pos + 1}")
    return result


_NP = Atom("NP")
_S = Atom("S")
DEFAULT_ABBREVIATIONS: dict[str, CatType] = {
    "V1": Left(_NP, _S),
    "V2": Right(Left(_NP, _S), _NP),
    "NP1": Right(_S, Left(_NP, _S)),
    "NP4": Left(Right(_S, _NP), _S),
}


RULE_NAMES = ("R1L", "R1R", "R2L", "R2R", "R3L", "R3R", "R4L", "R4R")


def apply_rule(rule: str, side: str, inputs: tuple[CatType, ...] | list,
               target: CatType | None = None) -> CatType | None:
    """Apply one named rule to types given in textual (left-to-right) order.

    Returns None when the input shapes do not fit.  Lifting (R4) needs
    the result's target type as an extra parameter.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    inputs = tuple(inputs)

    if rule == "R1":
        if len(inputs) != 2:
            raise ValueError("R1 is binary")
        if side == "right":
            f, a = inputs
            if isinstance(f, Right) and f.denominator == a:
                return f.numerator
        else:
            a, f = inputs
            if isinstance(f, Left) and f.denominator == a:
                return f.numerator
        return None

    if rule == "R2":
        if len(inputs) != 2:
            raise ValueError("R2 is binary")
        if side == "right":
            f, g = inputs
            if (isinstance(f, Right) and isinstance(g, Right)
                    and f.denominator == g.numerator):
                return Right(f.numerator, g.denominator)
        else:
            g, f = inputs
            if (isinstance(g, Left) and isinstance(f, Left)
                    and g.numerator == f.denominator):
                return Left(g.denominator, f.numerator)
        return None

    if rule == "R3":
        if len(inputs) != 1:
            raise ValueError("R3 is unary")
        (f,) = inputs
        if side == "right":
            if isinstance(f, Right) and isinstance(f.numerator, Left):
                c, a = f.numerator.denominator, f.numerator.numerator
                return Left(c, Right(a, f.denominator))
        else:
            if isinstance(f, Left) and isinstance(f.numerator, Right):
                a, b = f.numerator.numerator, f.numerator.denominator
                return Right(Left(f.denominator, a), b)
        return None

    if rule == "R4":
        if len(inputs) != 1:
            raise ValueError("R4 is unary")
        if target is None:
            raise ValueError("lifting needs a target type")
        (a,) = inputs
        if side == "right":
            return Right(target, Left(a, target))
        return Left(Right(target, a), target)

    raise ValueError(f"unknown rule {rule!r}")


@dataclass(frozen=True)
class TypedWord:
    word: str
    type: CatType


@dataclass(frozen=True)
class Lexicon:
    entries: tuple[TypedWord, ...]

    def types_for(self, word: str) -> tuple[CatType, ...]:
        found = tuple(e.type for e in self.entries if e.word == word)
        if not found:
            raise ValueError(f"unknown word {word!r}")
        return found

    def all_types(self) -> tuple[CatType, ...]:
        return tuple(e.type for e in self.entries)


def load_lexicon(document: str) -> Lexicon:
    """Parse a type lexicon.

    Lines are `"word" : TYPE` entries or `NAME := TYPE` abbreviations;
    '#' starts a comment line.  Abbreviations extend the built-in table
    and apply to later lines.
    """
    abbrevs = dict(DEFAULT_ABBREVIATIONS)
    entries: list[TypedWord] = []
    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":=" in line:
            name, _, definition = line.partition(":=")
            name = name.strip()
            if not _ATOM_RE.fullmatch(name):
                raise TypeParseError(f"line {lineno}: bad abbreviation name {name!r}")
            abbrevs[name] = parse_type(definition.strip(), abbrevs)
            continue
        m = re.match(r'^"([^"\s]+)"\s*:\s*(.+)$', line)
        if not m:
            raise TypeParseError(f'line {lineno}: expected `"word" : TYPE`')
        entries.append(TypedWord(m.group(1), parse_type(m.group(2).strip(), abbrevs)))
    return Lexicon(tuple(entries))


@dataclass(frozen=True)
class Derivation:
    """A derivation node; leaves carry words, inner nodes a rule name."""

    type: CatType
    span: tuple[int, int]  # 0-based, half-open
    rule: str | None = None
    word: str | None = None
    children: tuple["Derivation", ...] = ()

    def replay(self) -> CatType:
        """Recompute this node's type through apply_rule (soundness check)."""
        if self.rule is None:
            return self.type
        if self.rule.startswith(("R1", "R2")):
            kids = tuple(child.replay() for child in self.children)
            result = apply_rule(self.rule[:2], _side(self.rule), kids)
        elif self.rule.startswith("R3"):
            result = apply_rule("R3", _side(self.rule),
                                (self.children[0].replay(),))
        else:
            # both lifted shapes, B/(A\B) and (B/A)\B, carry the target as numerator
            result = apply_rule("R4", _side(self.rule),
                                (self.children[0].replay(),), target=self.type.numerator)
        if result != self.type:
            raise AssertionError(f"derivation replay mismatch at {self.rule}")
        return result


def _side(rule_name: str) -> str:
    return "left" if rule_name.endswith("L") else "right"


def derive(lexicon: Lexicon, words: list[str], target: CatType, *,
           max_type_atoms: int = 7, max_unary_chain: int = 2) -> list[Derivation]:
    """All derivations assigning the target type to the word sequence.

    Span chart: cells hold (type, consecutive-unary-count) items, closed
    under R3 and under R4 with targets drawn from the subtypes of the
    lexicon and of the requested target; R1/R2 combine adjacent spans and
    reset the unary counter.  The two bounds guarantee termination.
    Deterministically ordered by rendered form.
    """
    if not words:
        raise ValueError("empty word sequence")
    for entry_type in lexicon.all_types():
        if type_size(entry_type) > max_type_atoms:
            raise ValueError("lexicon entry exceeds max_type_atoms")

    lift_targets: list[CatType] = []
    seen_targets: set[CatType] = set()
    for t in list(lexicon.all_types()) + [target]:
        for s in subtypes(t):
            if s not in seen_targets:
                seen_targets.add(s)
                lift_targets.append(s)
    lift_targets.sort(key=format_type)

    n = len(words)
    # cell: dict[(type, unary_count)] -> dict[Derivation, None] (ordered set)
    cells: dict[tuple[int, int], dict] = {}

    def add(cell: dict, item: tuple[CatType, int], deriv: Derivation,
            queue: list) -> None:
        derivs = cell.setdefault(item, {})
        if deriv not in derivs:
            derivs[deriv] = None
            queue.append((item, deriv))

    def close(cell: dict, i: int, j: int, queue: list):
        while queue:
            (t, unary), deriv = queue.pop(0)
            if unary >= max_unary_chain:
                continue
            for rule, side in (("R3", "left"), ("R3", "right")):
                result = apply_rule(rule, side, (t,))
                if result is not None and type_size(result) <= max_type_atoms:
                    node = Derivation(result, (i, j),
                                      rule="R3L" if side == "left" else "R3R",
                                      children=(deriv,))
                    add(cell, (result, unary + 1), node, queue)
            for b in lift_targets:
                for side, name in (("right", "R4R"), ("left", "R4L")):
                    result = apply_rule("R4", side, (t,), target=b)
                    if type_size(result) <= max_type_atoms:
                        node = Derivation(result, (i, j), rule=name,
                                          children=(deriv,))
                        add(cell, (result, unary + 1), node, queue)

    for i in range(n):
        cell: dict = {}
        queue: list = []
        for t in lexicon.types_for(words[i]):
            add(cell, (t, 0), Derivation(t, (i, i + 1), word=words[i]), queue)
        close(cell, i, i + 1, queue)
        cells[(i, i + 1)] = cell

    binary_rules = (("R1", "right", "R1R"), ("R1", "left", "R1L"),
                    ("R2", "right", "R2R"), ("R2", "left", "R2L"))

    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span
            cell = {}
            queue = []
            for mid in range(i + 1, j):
                left_cell = cells[(i, mid)]
                right_cell = cells[(mid, j)]
                for (t1, _), derivs1 in left_cell.items():
                    for (t2, _), derivs2 in right_cell.items():
                        for rule, side, name in binary_rules:
                            result = apply_rule(rule, side, (t1, t2))
                            if result is None or type_size(result) > max_type_atoms:
                                continue
                            for d1 in derivs1:
                                for d2 in derivs2:
                                    node = Derivation(result, (i, j), rule=name,
                                                      children=(d1, d2))
                                    add(cell, (result, 0), node, queue)
            close(cell, i, j, queue)
            cells[(i, j)] = cell

    results: dict[Derivation, None] = {}
    for (t, _unary), derivs in cells[(0, n)].items():
        if t == target:
            for d in derivs:
                results[d] = None
    return sorted(results, key=render_derivation)


def render_derivation(d: Derivation) -> str:
    """Indented tree, one node per line: span, rule or word, type."""
    lines: list[str] = []

    def walk(node: Derivation, depth: int):
        i, j = node.span
        span_text = f"[{i + 1}-{j}]"
        if node.rule is None:
            head = f'lex "{node.word}"'
        else:
            head = node.rule
        lines.append("  " * depth + f"{span_text} {head} : {format_type(node.type)}")
        for child in node.children:
            walk(child, depth + 1)

    walk(d, 0)
    return "\n".join(lines) + "\n"
