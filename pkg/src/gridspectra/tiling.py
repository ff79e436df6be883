"""Wang-tile constraint solving on rectangles, tori, and raw structures.

The solver is a deterministic backtracking search: cells are assigned in
row-major order (elements in index order for structure coloring), values
in tile order, with arc-consistent domain pruning after every assignment.
Domains are bitmasks over the tile list, and per-direction support tables
make each revision O(1).  Proven absence and budget exhaustion are kept
distinct: the former returns None, the latter raises BudgetExceeded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

from .core import Structure
from .errors import BudgetExceeded, StructureFormatError
from .logic import color_relation

_PAIR_RE = re.compile(r"\(\s*([^\s,()]+)\s*,\s*([^\s,()]+)\s*\)")


@dataclass(frozen=True)
class Tileset:
    """Named Wang tiles with right- and down-compatibility relations.

    (a, b) in hrel means b may sit immediately to the right of a;
    (a, b) in vrel means b may sit immediately below a.
    """

    tiles: tuple[str, ...]
    hrel: frozenset[tuple[str, str]]
    vrel: frozenset[tuple[str, str]]

    def __post_init__(self):
        if not self.tiles:
            raise ValueError("tileset needs at least one tile")
        if len(set(self.tiles)) != len(self.tiles):
            raise ValueError("duplicate tile names")
        known = set(self.tiles)
        for rel in (self.hrel, self.vrel):
            for a, b in rel:
                if a not in known or b not in known:
                    raise ValueError(f"pair ({a},{b}) references unknown tiles")

    @cached_property
    def index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.tiles)}


def parse_tileset(text: str) -> Tileset:
    tiles: list[str] = []
    hrel: set[tuple[str, str]] = set()
    vrel: set[tuple[str, str]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split(None, 1)
        kind = fields[0]
        rest = fields[1] if len(fields) > 1 else ""
        if kind == "tiles":
            tiles.extend(rest.split())
        elif kind in ("hrel", "vrel"):
            target = hrel if kind == "hrel" else vrel
            stripped = _PAIR_RE.sub("", rest).strip()
            if stripped:
                raise StructureFormatError(f"bad pair text {stripped!r}", lineno)
            for a, b in _PAIR_RE.findall(rest):
                target.add((a, b))
        else:
            raise StructureFormatError(f"unknown directive {kind!r}", lineno)
    try:
        return Tileset(tuple(tiles), frozenset(hrel), frozenset(vrel))
    except ValueError as exc:
        raise StructureFormatError(str(exc)) from exc


def format_tileset(ts: Tileset) -> str:
    lines = ["tiles " + " ".join(ts.tiles)]
    lines.append("hrel " + " ".join(f"({a},{b})" for a, b in sorted(ts.hrel)))
    lines.append("vrel " + " ".join(f"({a},{b})" for a, b in sorted(ts.vrel)))
    return "\n".join(lines) + "\n"


@dataclass
class TileAssignment:
    width: int
    height: int
    cells: dict[tuple[int, int], str]
    wrap: bool

    def to_text(self) -> str:
        return "\n".join(
            " ".join(self.cells[(x, y)] for x in range(self.width))
            for y in range(self.height)
        )


def validate_assignment(ts: Tileset, asg: TileAssignment) -> bool:
    """Independent re-check of every adjacency constraint, by definition."""
    for y in range(asg.height):
        for x in range(asg.width):
            t = asg.cells[(x, y)]
            if t not in ts.index:
                return False
            if x + 1 < asg.width or asg.wrap:
                right = asg.cells[((x + 1) % asg.width, y)]
                if (t, right) not in ts.hrel:
                    return False
            if y + 1 < asg.height or asg.wrap:
                below = asg.cells[(x, (y + 1) % asg.height)]
                if (t, below) not in ts.vrel:
                    return False
    return True


# -- bitmask CSP core --------------------------------------------------------


class _Masks:
    """Per-direction compatibility bitmasks and union-over-domain tables."""

    def __init__(self, ts: Tileset):
        k = len(ts.tiles)
        self.k = k
        self.full = (1 << k) - 1
        idx = ts.index
        self.right_of = [0] * k  # tiles allowed right of t
        self.left_of = [0] * k   # tiles allowed left of t
        self.below_of = [0] * k
        self.above_of = [0] * k
        for a, b in ts.hrel:
            self.right_of[idx[a]] |= 1 << idx[b]
            self.left_of[idx[b]] |= 1 << idx[a]
        for a, b in ts.vrel:
            self.below_of[idx[a]] |= 1 << idx[b]
            self.above_of[idx[b]] |= 1 << idx[a]

    def union_table(self, per_tile: list[int]):
        if self.k > 16:
            return _LazyUnion(per_tile)
        table = [0] * (1 << self.k)
        for mask in range(1, 1 << self.k):
            low = mask & (-mask)
            table[mask] = table[mask ^ low] | per_tile[low.bit_length() - 1]
        return table


class _LazyUnion:
    """Union-over-domain lookup with memoization, for wide tilesets."""

    def __init__(self, per_tile: list[int]):
        self.per_tile = per_tile
        self.cache: dict[int, int] = {0: 0}

    def __getitem__(self, mask: int) -> int:
        cached = self.cache.get(mask)
        if cached is not None:
            return cached
        out = 0
        rest = mask
        while rest:
            low = rest & (-rest)
            out |= self.per_tile[low.bit_length() - 1]
            rest ^= low
        self.cache[mask] = out
        return out


def _support_tables(masks: _Masks) -> dict[str, list[int]]:
    return {
        "right_of": masks.union_table(masks.right_of),
        "left_of": masks.union_table(masks.left_of),
        "below_of": masks.union_table(masks.below_of),
        "above_of": masks.union_table(masks.above_of),
    }


class _Solver:
    """AC-3 maintaining backtracker over bitmask domains."""

    def __init__(self, ts: Tileset, nvars: int, edges: list[tuple[int, int, str]],
                 budget: int | None):
        self.ts = ts
        self.masks = _Masks(ts)
        self.tables = _support_tables(self.masks)
        self.nvars = nvars
        self.budget = budget
        self.nodes = 0
        self.domains = [self.masks.full] * nvars
        # adj[v] = list of (other, table_for_v_given_other, reverse key)
        self.adj: list[list[tuple[int, str]]] = [[] for _ in range(nvars)]
        for a, b, kind in edges:
            if a == b:
                allowed = 0
                per = self.masks.right_of if kind == "R" else self.masks.below_of
                for i in range(self.masks.k):
                    if per[i] >> i & 1:
                        allowed |= 1 << i
                self.domains[a] &= allowed
                continue
            if kind == "R":
                self.adj[a].append((b, "right_of"))
                self.adj[b].append((a, "left_of"))
            else:
                self.adj[a].append((b, "below_of"))
                self.adj[b].append((a, "above_of"))

    def _revise_from(self, start: int, trail: list[tuple[int, int]]) -> bool:
        queue = [start]
        while queue:
            v = queue.pop()
            dom_v = self.domains[v]
            for u, table_key in self.adj[v]:
                table = self.tables[table_key]
                new = self.domains[u] & table[dom_v]
                if new != self.domains[u]:
                    trail.append((u, self.domains[u]))
                    self.domains[u] = new
                    if new == 0:
                        return False
                    queue.append(u)
        return True

    def solve(self) -> list[int] | None:
        pre: list[tuple[int, int]] = []
        for v in range(self.nvars):
            if self.domains[v] == 0 or not self._revise_from(v, pre):
                return None
        n = self.nvars
        assignment = [-1] * n
        rem_stack: list[int] = []
        trail_stack: list[list[tuple[int, int]]] = []
        pos = 0
        while pos < n:
            if len(rem_stack) == pos:
                rem_stack.append(self.domains[pos])
                trail_stack.append([])
            else:
                # back from a failed attempt at this variable: undo it
                assignment[pos] = -1
                for var, old in reversed(trail_stack[pos]):
                    self.domains[var] = old
                trail_stack[pos] = []
            rem = rem_stack[pos]
            if rem == 0:
                rem_stack.pop()
                trail_stack.pop()
                pos -= 1
                if pos < 0:
                    return None
                continue
            low = rem & (-rem)
            rem_stack[pos] = rem ^ low
            self.nodes += 1
            if self.budget is not None and self.nodes > self.budget:
                raise BudgetExceeded(self.budget)
            trail = [(pos, self.domains[pos])]
            self.domains[pos] = low
            assignment[pos] = low.bit_length() - 1
            trail_stack[pos] = trail
            if self._revise_from(pos, trail):
                pos += 1
            # otherwise stay; the loop top undoes and tries the next value
        return assignment


def _grid_edges(width: int, height: int, wrap: bool) -> list[tuple[int, int, str]]:
    edges = []
    cell = lambda x, y: y * width + x
    for y in range(height):
        for x in range(width):
            if x + 1 < width:
                edges.append((cell(x, y), cell(x + 1, y), "R"))
            elif wrap:
                edges.append((cell(x, y), cell(0, y), "R"))
            if y + 1 < height:
                edges.append((cell(x, y), cell(x, y + 1), "D"))
            elif wrap:
                edges.append((cell(x, y), cell(x, 0), "D"))
    return edges


def _solve_grid(
    ts: Tileset, width: int, height: int, wrap: bool, budget: int | None
) -> TileAssignment | None:
    if width < 1 or height < 1:
        raise ValueError("dimensions must be >= 1")
    solver = _Solver(ts, width * height, _grid_edges(width, height, wrap), budget)
    assignment = solver.solve()
    if assignment is None:
        return None
    cells = {
        (x, y): ts.tiles[assignment[y * width + x]]
        for y in range(height)
        for x in range(width)
    }
    result = TileAssignment(width, height, cells, wrap)
    assert validate_assignment(ts, result)
    return result


def tile_rectangle(
    ts: Tileset, width: int, height: int, budget: int | None = None
) -> TileAssignment | None:
    """A valid non-wrapping assignment, or None when search proves absence."""
    return _solve_grid(ts, width, height, wrap=False, budget=budget)


def tile_torus(
    ts: Tileset, width: int, height: int, budget: int | None = None
) -> TileAssignment | None:
    """A valid wrapping assignment, or None when search proves absence.

    A wrapping assignment of a width x height torus is exactly a doubly
    periodic tiling of the plane with those periods.
    """
    return _solve_grid(ts, width, height, wrap=True, budget=budget)


@dataclass
class TorusSurvey:
    """Torus tilability for every size up to maxdim; witnesses kept."""

    maxdim: int
    entries: dict[tuple[int, int], TileAssignment | str]

    @property
    def all_absent(self) -> bool:
        return all(v == "absent" for v in self.entries.values())

    def to_text(self) -> str:
        lines = []
        for (w, h), entry in sorted(self.entries.items()):
            if isinstance(entry, TileAssignment):
                lines.append(f"{w}x{h} present: " + entry.to_text().replace("\n", " / "))
            else:
                lines.append(f"{w}x{h} {entry}")
        return "\n".join(lines)


def aperiodicity_report(
    ts: Tileset, maxdim: int, budget_per_cell: int | None = None
) -> TorusSurvey:
    """Torus-tilability table over all sizes up to maxdim.

    All entries absent is bounded aperiodicity evidence; a present entry
    carries its witness, a blown budget is recorded per cell as "timeout".
    """
    if maxdim < 1:
        raise ValueError("maxdim must be >= 1")
    entries: dict[tuple[int, int], TileAssignment | str] = {}
    for w in range(1, maxdim + 1):
        for h in range(1, maxdim + 1):
            try:
                result = tile_torus(ts, w, h, budget=budget_per_cell)
            except BudgetExceeded:
                entries[(w, h)] = "timeout"
                continue
            entries[(w, h)] = result if result is not None else "absent"
    return TorusSurvey(maxdim, entries)


def coloring_exists_for_structure(
    s: Structure, ts: Tileset, budget: int | None = None
) -> dict[int, str] | None:
    """One tile per element satisfying compatibility along R and D tuples.

    Decides whether a structure's skeleton admits the tile-coloring layer:
    elements are variables, every R tuple imposes hrel, every D tuple
    imposes vrel.  Returns an element-to-tile map or None when absent.
    """
    edges = [(a, b, "R") for a, b in s.tuples("R")]
    edges += [(a, b, "D") for a, b in s.tuples("D")]
    solver = _Solver(ts, s.size, edges, budget)
    assignment = solver.solve()
    if assignment is None:
        return None
    return {v: ts.tiles[assignment[v]] for v in range(s.size)}


def attach_coloring(s: Structure, ts: Tileset, coloring: dict[int, str]) -> Structure:
    """Structure with one color relation per tile, set from the coloring."""
    additions: dict[str, list[tuple[int, ...]]] = {
        color_relation(t): [] for t in ts.tiles
    }
    for v, tile in coloring.items():
        additions[color_relation(tile)].append((v,))
    return s.with_additions(
        additions, declare=tuple((color_relation(t), 1) for t in ts.tiles)
    )
