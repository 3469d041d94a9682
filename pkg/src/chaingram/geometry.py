"""3D embedding of complexes and XYZ / DOT / JSON exporters.

Bonded token pairs render as one merged node (attached equal tokens
touch, so no stick between them); body neighbours connect with rest
length 1.0, a chain and its conclusion with 0.6.  The embedding is a
fixed-iteration force relaxation seeded from the temporal positions on
the x axis, deterministic for identical inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .chains import Chain, ChainStore, Token
from .complexes import (
    FRESH,
    Bond,
    ChainInstance,
    Complex,
    Occurrence,
    PositionAssignment,
    dangling_token,
    merged_classes,
    occ_sort_key,
)

WORD_ELEMENT = "H"
FALLBACK_ELEMENT = "C"
DEFAULT_CATEGORY_ELEMENTS = {
    "NP": "N", "V1": "O", "V2": "O", "S": "S",
    "Adj": "C", "NP1": "N", "NP4": "P", "CP": "B",
}


@dataclass(frozen=True)
class StyleMap:
    """Token to element-symbol mapping for XYZ export; total by fallback."""

    overrides: tuple[tuple[str, str], ...] = ()

    def element_for(self, token: Token) -> str:
        table = dict(self.overrides)
        if token.label in table:
            return table[token.label]
        if token.is_word:
            return WORD_ELEMENT
        return DEFAULT_CATEGORY_ELEMENTS.get(token.label, FALLBACK_ELEMENT)


def load_style(document: str) -> StyleMap:
    """Parse `LABEL = ELEMENT` lines; '#' starts a comment line."""
    overrides = []
    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        label, sep, element = line.partition("=")
        if not sep or not label.strip() or not element.strip():
            raise ValueError(f"style line {lineno}: expected LABEL = ELEMENT")
        overrides.append((label.strip(), element.strip()))
    return StyleMap(tuple(overrides))


@dataclass
class Layout:
    coordinates: dict[Occurrence, tuple[float, float, float]]  # keyed by class rep
    seed: int
    iterations: int


def embed(x: Complex, pa: PositionAssignment, seed: int,
          iterations: int = 500) -> Layout:
    """Deterministic force-directed relaxation of the merged-class graph."""
    classes = merged_classes(x)
    index = {rep: row for row, (rep, _members) in enumerate(classes)}
    n = len(classes)

    pos = np.zeros((n, 3))
    for rep, _members in classes:
        pos[index[rep], 0] = float(pa[rep])
    rng = np.random.default_rng(seed)
    pos[:, 1:] = rng.uniform(-0.5, 0.5, size=(n, 2))

    rep_of: dict[Occurrence, Occurrence] = {}
    for rep, members in classes:
        for occ in members:
            rep_of[occ] = rep

    springs: dict[tuple[int, int], float] = {}
    for inst in x.instances:
        body_len = len(inst.chain.body)
        for k in range(1, body_len):
            a = index[rep_of[Occurrence.body(inst.instance_id, k)]]
            b = index[rep_of[Occurrence.body(inst.instance_id, k + 1)]]
            springs[(min(a, b), max(a, b))] = 1.0
        if inst.chain.conclusion is not None:
            a = index[rep_of[Occurrence.body(inst.instance_id, body_len)]]
            b = index[rep_of[Occurrence.conclusion(inst.instance_id)]]
            springs[(min(a, b), max(a, b))] = 0.6

    adjacent = set(springs)
    step = 0.05
    for _ in range(iterations):
        force = np.zeros((n, 3))
        for (a, b), rest in springs.items():
            delta = pos[b] - pos[a]
            dist = float(np.linalg.norm(delta)) + 1e-9
            pull = (dist - rest) * delta / dist
            force[a] += pull
            force[b] -= pull
        for a in range(n):
            for b in range(a + 1, n):
                if (a, b) in adjacent:
                    continue
                delta = pos[a] - pos[b]
                dist = float(np.linalg.norm(delta)) + 1e-9
                push = 0.2 / (dist * dist) * delta / dist
                force[a] += push
                force[b] -= push
        np.clip(force, -2.0, 2.0, out=force)
        pos += step * force

    coords = {rep: (float(pos[index[rep], 0]),
                    float(pos[index[rep], 1]),
                    float(pos[index[rep], 2]))
              for rep, _members in classes}
    return Layout(coords, seed, iterations)


def export_xyz(layout: Layout, x: Complex, style: StyleMap | None = None,
               split_bonds: bool = False) -> str:
    """Standard XYZ text: count, comment (sentence and conclusion), atoms.

    One atom per merged class; with split_bonds, bonded pairs render as
    two atoms 0.3 apart along z.
    """
    style = style or StyleMap()
    classes = merged_classes(x)
    fresh = x.fresh_instance()
    sentence = " ".join(tok.label for tok in fresh.chain.body)
    concl = dangling_token(x)
    comment = sentence + (f" -> {concl.label}" if concl is not None else "")

    atoms: list[str] = []
    for rep, members in classes:
        cx, cy, cz = layout.coordinates[rep]
        if split_bonds and len(members) == 2:
            for occ, dz in zip(members, (-0.15, 0.15)):
                element = style.element_for(x.token_at(occ))
                atoms.append(f"{element} {cx:.6f} {cy:.6f} {cz + dz:.6f}")
        else:
            element = style.element_for(x.token_at(rep))
            atoms.append(f"{element} {cx:.6f} {cy:.6f} {cz:.6f}")
    return "\n".join([str(len(atoms)), comment] + atoms) + "\n"


def export_dot(x: Complex) -> str:
    """Graphviz text: one node per occurrence, solid body edges, dashed
    conclusion links, bold zero-weight bond edges."""
    lines = ["graph complex {"]
    for inst in x.instances:
        for k in range(1, len(inst.chain.body) + 1):
            occ = Occurrence.body(inst.instance_id, k)
            lines.append(f'  {occ.name()} [label="{x.token_at(occ).label}"];')
        if inst.chain.conclusion is not None:
            occ = Occurrence.conclusion(inst.instance_id)
            lines.append(f'  {occ.name()} [label="{x.token_at(occ).label}"];')
    for inst in x.instances:
        body_len = len(inst.chain.body)
        for k in range(1, body_len):
            a = Occurrence.body(inst.instance_id, k)
            b = Occurrence.body(inst.instance_id, k + 1)
            lines.append(f"  {a.name()} -- {b.name()};")
        if inst.chain.conclusion is not None:
            a = Occurrence.body(inst.instance_id, body_len)
            b = Occurrence.conclusion(inst.instance_id)
            lines.append(f"  {a.name()} -- {b.name()} [style=dashed];")
    for bond in x.sorted_bonds():
        lines.append(f"  {bond.a.name()} -- {bond.b.name()} [style=bold, weight=0];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _occ_json(occ: Occurrence):
    return {"instance": occ.instance, "slot": "c" if occ.is_conclusion else occ.slot}


def _occ_from_json(obj) -> Occurrence:
    if obj["slot"] == "c":
        return Occurrence.conclusion(obj["instance"])
    return Occurrence.body(obj["instance"], int(obj["slot"]))


def export_json(x: Complex, layout: Layout | None,
                pa: PositionAssignment) -> str:
    """Serialize a complex: instances, bonds, dangling, positions, and,
    when a layout is given, coordinates.  Positions and coordinates are
    keyed by merged-class representative (see Occurrence.name)."""
    classes = merged_classes(x)
    concl = dangling_token(x)
    doc = {
        "instances": [
            {"id": inst.instance_id, "source": inst.source, "copy": inst.copy_index}
            for inst in x.instances
        ],
        "bonds": [[_occ_json(b.a), _occ_json(b.b)] for b in x.sorted_bonds()],
        "dangling": None if concl is None else {"kind": concl.kind, "label": concl.label},
        "positions": {rep.name(): str(pa[rep]) for rep, _members in classes},
    }
    if layout is not None:
        doc["coordinates"] = {
            rep.name(): [round(c, 6) for c in layout.coordinates[rep]]
            for rep, _members in classes
        }
    return json.dumps(doc, indent=2) + "\n"


def complex_from_json(text: str, fresh: Chain,
                      store: ChainStore) -> tuple[Complex, PositionAssignment]:
    """Rebuild a complex from its JSON form, resolving chains in the store."""
    doc = json.loads(text)
    instances = []
    for obj in doc["instances"]:
        source = obj["source"]
        chain = fresh if source == FRESH else store.get(source)
        instances.append(ChainInstance(obj["id"], source, obj["copy"], chain))
    bonds = frozenset(Bond(_occ_from_json(a), _occ_from_json(b))
                      for a, b in doc["bonds"])
    x = Complex(tuple(instances), bonds)

    by_name = {occ.name(): occ for occ in x.occurrences()}
    rep_positions = {by_name[name]: Fraction(value)
                     for name, value in doc["positions"].items()}
    positions: dict[Occurrence, Fraction] = {}
    for rep, members in merged_classes(x):
        for occ in members:
            positions[occ] = rep_positions[rep]
    return x, PositionAssignment(positions)
