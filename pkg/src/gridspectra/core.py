"""Finite relational structures over the four-direction grid signature.

A structure is a finite universe {0..n-1} plus named relations of arity 1
or 2.  The four direction relations L, R, U, D are always present; further
relations (counters, tile colors, run symbols, wiring) are declared per
structure.  Structures are mutable while being built and must be frozen
before use; all queries assume a frozen structure and are pure, so frozen
structures are safe to share between threads.

Grid convention: x grows rightward (R), y grows downward (D).  Row y=0 is
the top row, the one where U is undefined.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    ArityError,
    NotFunctional,
    SignatureMismatch,
    StructureFormatError,
    UnknownRelation,
)

DIRECTIONS = ("L", "R", "U", "D")

# Relations with a fixed arity whenever they appear.
_FORCED_ARITY = {"L": 2, "R": 2, "U": 2, "D": 2, "B": 2, "W": 2}


@dataclass(frozen=True)
class Signature:
    """Relation names with arities (1 or 2).  L, R, U, D are mandatory."""

    relations: tuple[tuple[str, int], ...] = tuple((d, 2) for d in DIRECTIONS)

    def __post_init__(self):
        names = [name for name, _ in self.relations]
        if len(set(names)) != len(names):
            raise SignatureMismatch(f"duplicate relation names in {names}")
        for name, arity in self.relations:
            if arity not in (1, 2):
                raise SignatureMismatch(f"relation {name} has arity {arity}")
            forced = _FORCED_ARITY.get(name)
            if forced is not None and arity != forced:
                raise SignatureMismatch(f"relation {name} must have arity {forced}")
        for d in DIRECTIONS:
            if d not in names:
                raise SignatureMismatch(f"direction relation {d} is missing")

    @cached_property
    def _arity(self) -> dict[str, int]:
        return dict(self.relations)

    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.relations)

    def has(self, name: str) -> bool:
        return name in self._arity

    def arity(self, name: str) -> int:
        try:
            return self._arity[name]
        except KeyError:
            raise UnknownRelation(f"relation {name} not in signature") from None

    def unary_names(self) -> tuple[str, ...]:
        return tuple(n for n, a in self.relations if a == 1)

    def binary_names(self) -> tuple[str, ...]:
        return tuple(n for n, a in self.relations if a == 2)

    def extended(self, *extra: tuple[str, int]) -> Signature:
        """Signature with additional relations; re-declaring identically is a no-op."""
        merged = list(self.relations)
        for name, arity in extra:
            if self.has(name):
                if self._arity[name] != arity:
                    raise SignatureMismatch(
                        f"relation {name} re-declared with arity {arity}"
                    )
                continue
            if (name, arity) not in merged:
                merged.append((name, arity))
        return Signature(tuple(merged))


GRID_SIGNATURE = Signature()


class Structure:
    """Universe {0..size-1} with named relation tuple sets."""

    __slots__ = ("size", "signature", "_rels", "_frozen", "_succ", "_pred")

    def __init__(self, size: int, signature: Signature = GRID_SIGNATURE):
        if size < 0:
            raise ValueError("universe size must be nonnegative")
        self.size = size
        self.signature = signature
        self._rels: dict[str, set[tuple[int, ...]]] = {
            name: set() for name in signature.names()
        }
        self._frozen = False
        self._succ: dict[str, dict[int, tuple[int, ...]]] = {}
        self._pred: dict[str, dict[int, tuple[int, ...]]] = {}

    # -- build phase ----------------------------------------------------

    def add(self, rel: str, *elems: int) -> None:
        if self._frozen:
            raise ValueError("structure is frozen")
        arity = self.signature.arity(rel)
        if len(elems) != arity:
            raise ArityError(
                f"relation {rel} expects {arity} argument(s), got {len(elems)}"
            )
        for e in elems:
            if not (0 <= e < self.size):
                raise ValueError(f"element {e} outside universe of size {self.size}")
        self._rels[rel].add(tuple(elems))

    def freeze(self) -> Structure:
        if not self._frozen:
            self._frozen = True
            for name in self.signature.binary_names():
                succ: dict[int, list[int]] = {}
                pred: dict[int, list[int]] = {}
                for a, b in self._rels[name]:
                    succ.setdefault(a, []).append(b)
                    pred.setdefault(b, []).append(a)
                self._succ[name] = {v: tuple(sorted(ws)) for v, ws in succ.items()}
                self._pred[name] = {v: tuple(sorted(ws)) for v, ws in pred.items()}
        return self

    # -- queries (frozen) -----------------------------------------------

    def holds(self, rel: str, *elems: int) -> bool:
        if not self.signature.has(rel):
            raise UnknownRelation(f"relation {rel} not in signature")
        return tuple(elems) in self._rels[rel]

    def tuples(self, rel: str) -> tuple[tuple[int, ...], ...]:
        if not self.signature.has(rel):
            raise UnknownRelation(f"relation {rel} not in signature")
        return tuple(sorted(self._rels[rel]))

    def members(self, rel: str) -> tuple[int, ...]:
        """Elements of a unary relation, sorted."""
        if self.signature.arity(rel) != 1:
            raise ArityError(f"relation {rel} is not unary")
        return tuple(sorted(e for (e,) in self._rels[rel]))

    def successors(self, rel: str, v: int) -> tuple[int, ...]:
        return self._succ.get(rel, {}).get(v, ())

    def predecessors(self, rel: str, v: int) -> tuple[int, ...]:
        return self._pred.get(rel, {}).get(v, ())

    def relation_sizes(self) -> dict[str, int]:
        return {name: len(tups) for name, tups in self._rels.items()}

    # -- derived structures ----------------------------------------------

    def with_additions(
        self,
        additions: dict[str, list[tuple[int, ...]]] | None = None,
        declare: tuple[tuple[str, int], ...] = (),
    ) -> Structure:
        """Copy of this structure with extra declared relations and tuples."""
        sig = self.signature.extended(*declare)
        out = Structure(self.size, sig)
        for name, tups in self._rels.items():
            out._rels[name] |= tups
        for name, tups in (additions or {}).items():
            for tup in tups:
                out.add(name, *tup)
        return out.freeze()

    def reduct(self, names: tuple[str, ...] = DIRECTIONS) -> Structure:
        """Structure keeping only the listed relations (directions kept always)."""
        keep = set(names) | set(DIRECTIONS)
        sig = Signature(tuple(r for r in self.signature.relations if r[0] in keep))
        out = Structure(self.size, sig)
        for name in sig.names():
            out._rels[name] |= self._rels[name]
        return out.freeze()

    def induced(self, keep: list[int]) -> tuple[Structure, list[int]]:
        """Substructure induced on `keep`; returns it plus new->old element map."""
        old_of_new = sorted(set(keep))
        new_of_old = {old: new for new, old in enumerate(old_of_new)}
        out = Structure(len(old_of_new), self.signature)
        for name, tups in self._rels.items():
            for tup in tups:
                if all(e in new_of_old for e in tup):
                    out._rels[name].add(tuple(new_of_old[e] for e in tup))
        return out.freeze(), old_of_new

    def __eq__(self, other) -> bool:
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.size == other.size
            and set(self.signature.relations) == set(other.signature.relations)
            and self._rels == other._rels
        )

    def __repr__(self) -> str:
        filled = {n: len(t) for n, t in self._rels.items() if t}
        return f"Structure(size={self.size}, tuples={filled})"


@dataclass(frozen=True, eq=True)
class GridWitness:
    """Isomorphism onto a width x height rectangular grid.

    `cells[(x, y)]` is the element at column x, row y; `coords` inverts it.
    """

    width: int
    height: int
    cells: dict[tuple[int, int], int]
    coords: dict[int, tuple[int, int]]

    def __eq__(self, other):
        if not isinstance(other, GridWitness):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.cells == other.cells
        )


def new_structure(size: int, signature: Signature = GRID_SIGNATURE) -> Structure:
    """Fresh frozen structure with all relations empty."""
    return Structure(size, signature).freeze()


def partial_fn(s: Structure, rel: str, v: int) -> int | None:
    """The unique rel-successor of v, or None when v has none.

    Raises NotFunctional when v has two successors, which signals a
    violation of partial injectivity in the structure itself.
    """
    if s.signature.arity(rel) != 2:
        raise ArityError(f"relation {rel} is not binary")
    succ = s.successors(rel, v)
    if len(succ) > 1:
        raise NotFunctional(f"{rel} has {len(succ)} successors at element {v}")
    return succ[0] if succ else None


def is_connected(s: Structure) -> bool:
    """Connectivity of the undirected graph of L/R/U/D tuples (empty = connected)."""
    if s.size == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for d in DIRECTIONS:
            for w in s.successors(d, v) + s.predecessors(d, v):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    return len(seen) == s.size


def _walk(s: Structure, rel: str, start: int, cap: int) -> list[int] | None:
    """Chain of unique successors from start; None on branching or cycles."""
    chain = [start]
    seen = {start}
    v = start
    while True:
        succ = s.successors(rel, v)
        if len(succ) > 1:
            return None
        if not succ:
            return chain
        v = succ[0]
        if v in seen or len(chain) >= cap:
            return None
        chain.append(v)
        seen.add(v)


def recognize_grid(s: Structure) -> GridWitness | None:
    """Witness that the L/R/U/D reduct is exactly a rectangular grid.

    Scans by definition: finds the unique corner, walks the first row and
    column, rebuilds the coordinate map, and finally compares the four
    tuple sets against the grid tuples implied by the map.  Unary
    relations are ignored; any extra or missing direction tuple rejects.
    """
    n = s.size
    if n == 0:
        return None
    for d in DIRECTIONS:
        for v in range(n):
            if len(s.successors(d, v)) > 1:
                return None
    corners = [
        v
        for v in range(n)
        if not s.successors("L", v) and not s.successors("U", v)
    ]
    if len(corners) != 1:
        return None
    origin = corners[0]
    row0 = _walk(s, "R", origin, n)
    col0 = _walk(s, "D", origin, n)
    if row0 is None or col0 is None:
        return None
    w, h = len(row0), len(col0)
    if w * h != n:
        return None
    cells: dict[tuple[int, int], int] = {}
    for y, left in enumerate(col0):
        row = _walk(s, "R", left, n)
        if row is None or len(row) != w:
            return None
        for x, e in enumerate(row):
            cells[(x, y)] = e
    if len(set(cells.values())) != n:
        return None
    expected: dict[str, set[tuple[int, int]]] = {d: set() for d in DIRECTIONS}
    for (x, y), e in cells.items():
        if x > 0:
            expected["L"].add((e, cells[(x - 1, y)]))
        if x < w - 1:
            expected["R"].add((e, cells[(x + 1, y)]))
        if y > 0:
            expected["U"].add((e, cells[(x, y - 1)]))
        if y < h - 1:
            expected["D"].add((e, cells[(x, y + 1)]))
    for d in DIRECTIONS:
        if set(s.tuples(d)) != expected[d]:
            return None
    coords = {e: xy for xy, e in cells.items()}
    return GridWitness(w, h, cells, coords)


def relabel(s: Structure, perm: list[int]) -> Structure:
    """Structure with element e renamed to perm[e]; perm must be a bijection."""
    if sorted(perm) != list(range(s.size)):
        raise ValueError("perm is not a bijection on the universe")
    out = Structure(s.size, s.signature)
    for name in s.signature.names():
        for tup in s.tuples(name):
            out.add(name, *(perm[e] for e in tup))
    return out.freeze()


# -- text format ---------------------------------------------------------
#
#   universe N
#   declare NAME ARITY
#   unary NAME e1 e2 ...
#   binary NAME (a,b) (c,d) ...
#
# '#' starts a comment; blank lines are skipped.  Relations beyond the four
# directions must be declared before use.

_PAIR_RE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


def structure_to_text(s: Structure) -> str:
    lines = [f"universe {s.size}"]
    for name, arity in sorted(s.signature.relations):
        if name not in DIRECTIONS:
            lines.append(f"declare {name} {arity}")
    for name, arity in sorted(s.signature.relations):
        tups = s.tuples(name)
        if not tups:
            continue
        if arity == 1:
            lines.append("unary " + name + " " + " ".join(str(e) for (e,) in tups))
        else:
            lines.append(
                "binary " + name + " " + " ".join(f"({a},{b})" for a, b in tups)
            )
    return "\n".join(lines) + "\n"


def structure_from_text(text: str) -> Structure:
    size: int | None = None
    declared: list[tuple[str, int]] = []
    pending: list[tuple[int, str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split(None, 2)
        kind = fields[0]
        if kind == "universe":
            if size is not None:
                raise StructureFormatError("duplicate universe line", lineno)
            if len(fields) != 2 or not fields[1].isdigit():
                raise StructureFormatError("universe expects one integer", lineno)
            size = int(fields[1])
        elif kind == "declare":
            if len(fields) != 3 or not fields[2].isdigit():
                raise StructureFormatError("declare expects NAME ARITY", lineno)
            declared.append((fields[1], int(fields[2])))
        elif kind in ("unary", "binary"):
            if len(fields) < 2:
                raise StructureFormatError(f"{kind} expects a relation name", lineno)
            pending.append((lineno, kind, fields[1], fields[2] if len(fields) > 2 else ""))
        else:
            raise StructureFormatError(f"unknown directive {kind!r}", lineno)
    if size is None:
        raise StructureFormatError("missing universe line")
    try:
        sig = GRID_SIGNATURE.extended(*declared)
    except SignatureMismatch as exc:
        raise StructureFormatError(str(exc)) from exc
    s = Structure(size, sig)
    for lineno, kind, name, rest in pending:
        if not sig.has(name):
            raise StructureFormatError(
                f"relation {name} is not declared (add 'declare {name} ARITY')", lineno
            )
        arity = sig.arity(name)
        want = 1 if kind == "unary" else 2
        if arity != want:
            raise StructureFormatError(
                f"relation {name} has arity {arity}, used as {kind}", lineno
            )
        try:
            if kind == "unary":
                for tok in rest.split():
                    if not tok.isdigit():
                        raise StructureFormatError(f"bad element {tok!r}", lineno)
                    s.add(name, int(tok))
            else:
                stripped = _PAIR_RE.sub("", rest).strip()
                if stripped:
                    raise StructureFormatError(f"bad tuple text {stripped!r}", lineno)
                for a, b in _PAIR_RE.findall(rest):
                    s.add(name, int(a), int(b))
        except ValueError as exc:
            raise StructureFormatError(str(exc), lineno) from exc
    return s.freeze()
