"""The closed primitive set of the question language.

This table is the normative description of each primitive; ``docs/primitives.json``
is generated from it (``python scripts/dump_primitives.py``).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Primitive:
    name: str
    arity: int
    signature: str
    semantics: str
    partial: bool = False


PRIMITIVES: dict[str, Primitive] = {
    p.name: p
    for p in [
        Primitive("and", 2, "Boolean Boolean -> Boolean", "logical conjunction"),
        Primitive("or", 2, "Boolean Boolean -> Boolean", "logical disjunction"),
        Primitive("not", 1, "Boolean -> Boolean", "logical negation"),
        Primitive("==", 2, "t t -> Boolean  (t ground)",
                  "structural equality; operands of different ground types are a type error"),
        Primitive(">", 2, "Number Number -> Boolean", "integer comparison; Booleans coerce to 0/1"),
        Primitive("<", 2, "Number Number -> Boolean", "integer comparison; Booleans coerce to 0/1"),
        Primitive("any", 1, "Set(Boolean) -> Boolean", "true iff some element is TRUE; false on empty"),
        Primitive("all", 1, "Set(Boolean) -> Boolean", "true iff every element is TRUE; true on empty"),
        Primitive("touch", 2, "Color Color -> Boolean",
                  "the two ships share an edge (orthogonal adjacency; diagonal does not count); "
                  "a ship does not touch itself; domain error if either color is Water", partial=True),
        Primitive("+", 2, "Number Number -> Number", "integer sum; Booleans coerce to 0/1"),
        Primitive("-", 2, "Number Number -> Number", "integer difference; Booleans coerce to 0/1"),
        Primitive("++", 1, "Set(Number) -> Number",
                  "sum of all elements counting multiplicity; Booleans coerce to 0/1; 0 on empty"),
        Primitive("size", 1, "Color -> Number", "length of the ship; domain error on Water", partial=True),
        Primitive("rowL", 1, "Location -> Number", "1-based row number"),
        Primitive("colL", 1, "Location -> Number", "1-based column number (A -> 1)"),
        Primitive("setSize", 1, "Set(t) -> Number", "number of elements, counting multiplicity"),
        Primitive("color", 1, "Location -> Color", "color of the tile: Water or a ship color"),
        Primitive("orient", 1, "Color -> Orientation", "ship orientation H or V; domain error on Water",
                  partial=True),
        Primitive("topleft", 1, "Set(Location) -> Location",
                  "row-major minimum; domain error on the empty set", partial=True),
        Primitive("bottomright", 1, "Set(Location) -> Location",
                  "row-major maximum; domain error on the empty set", partial=True),
        Primitive("coloredTiles", 1, "Color -> Set(Location)",
                  "tiles of the given color; for Water, every water tile"),
        Primitive("set", 1, "SetName -> Set(Location) | Set(Color)",
                  "AllTiles: every board location; AllColors: the ship colors (not Water)"),
        Primitive("union", 2, "Set(t) Set(t) -> Set(t)  (t Location or Color)", "set union"),
        Primitive("intersection", 2, "Set(t) Set(t) -> Set(t)  (t Location or Color)", "set intersection"),
        Primitive("setDifference", 2, "Set(t) Set(t) -> Set(t)  (t Location or Color)",
                  "elements of the first set not in the second"),
        Primitive("unique", 1, "Set(t) -> Set(t)",
                  "removes repeated elements; identity on sets that are already duplicate-free"),
        Primitive("map", 2, "(t -> u) Set(t) -> Set(u)",
                  "applies a lambda to every element in canonical order; keeps repeated results "
                  "(a multiset) so that ++ counts them"),
    ]
}

SPECIAL_FORMS = ("lambda",)

SET_NAMES = ("AllTiles", "AllColors")

ORDERING_NOTES = {
    "Location": "row-major: (row, column)",
    "Color": "declaration order: Water, then ships as configured",
    "Number": "ascending",
    "Boolean": "FALSE < TRUE",
}


def semantics_table() -> dict:
    """Machine-readable semantics (the content of docs/primitives.json)."""
    return {
        "primitives": [asdict(p) for p in PRIMITIVES.values()],
        "special_forms": {"lambda": "(lambda <var> <body>) - only as the first argument of map"},
        "literals": {
            "Boolean": "TRUE | FALSE",
            "Number": "0 | 1 | ... | 9",
            "Color": "Water | <ship id>",
            "Orientation": "H | V",
            "Location": "<row digit><column letter>, e.g. 2C",
            "SetName": "AllTiles | AllColors",
        },
        "canonical_order": ORDERING_NOTES,
        "errors": "a program raising a domain error on any hypothesis is invalid for that board",
    }
