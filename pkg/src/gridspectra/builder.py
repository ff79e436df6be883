"""Canonical model constructions: grids, counters, tori, unions, cylinders.

Also houses the neighborhood-type machinery (canonical codes for radius-r
balls, capped type histograms, repeating-column windows) used to transplant
grid columns into a cylinder without changing the capped histogram.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    DIRECTIONS,
    GRID_SIGNATURE,
    GridWitness,
    Structure,
    recognize_grid,
)
from .errors import GridRequired, SignatureMismatch, WindowInvalid

COUNTER_ROW = "B_V"  # row-index counter, written along each row
COUNTER_COL = "B_H"  # column-index counter, written along each column


def build_grid(width: int, height: int) -> Structure:
    """Plain width x height rectangular grid with exactly the grid tuples."""
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be >= 1")
    s = Structure(width * height)
    idx = lambda x, y: y * width + x
    for y in range(height):
        for x in range(width):
            e = idx(x, y)
            if x > 0:
                s.add("L", e, idx(x - 1, y))
            if x < width - 1:
                s.add("R", e, idx(x + 1, y))
            if y > 0:
                s.add("U", e, idx(x, y - 1))
            if y < height - 1:
                s.add("D", e, idx(x, y + 1))
    return s.freeze()


def counter_capacity_ok(width: int, height: int) -> bool:
    """Dimensions whose forced counter values avoid both overflow guards.

    Determined empirically by exhaustive checking (see docs and tests):
    the row counter needs height <= 2**(width-1) and the column counter
    needs width <= 2**(height-1).
    """
    return height <= 2 ** (width - 1) and width <= 2 ** (height - 1)


def attach_counters(s: Structure) -> Structure:
    """Add both index counters to a grid.

    Row y spells y little-endian along the row (least significant bit at
    the leftmost cell); column x spells width-1-x little-endian upward
    (least significant bit at the bottom cell).  Values are truncated to
    the available bits, so the construction never fails: on grids that are
    too narrow the overflow guard axiom reports the violation instead.
    """
    wit = recognize_grid(s)
    if wit is None:
        raise GridRequired("attach_counters needs a grid-recognizable structure")
    w, h = wit.width, wit.height
    row_bits = []
    col_bits = []
    for y in range(h):
        value = y % (1 << w)
        for x in range(w):
            if (value >> x) & 1:
                row_bits.append((wit.cells[(x, y)],))
    for x in range(w):
        value = (w - 1 - x) % (1 << h)
        for p in range(h):
            if (value >> p) & 1:
                col_bits.append((wit.cells[(x, h - 1 - p)],))
    return s.with_additions(
        {COUNTER_ROW: row_bits, COUNTER_COL: col_bits},
        declare=((COUNTER_ROW, 1), (COUNTER_COL, 1)),
    )


def row_counter_values(s: Structure) -> list[int]:
    """Decoded row-counter value b_y for each row of a grid, top to bottom."""
    wit = recognize_grid(s)
    if wit is None:
        raise GridRequired("row_counter_values needs a grid")
    values = []
    for y in range(wit.height):
        v = 0
        for x in range(wit.width):
            if s.holds(COUNTER_ROW, wit.cells[(x, y)]):
                v |= 1 << x
        values.append(v)
    return values


def build_torus(width: int, height: int) -> Structure:
    """Grid with cyclic rows and columns; every element has all four neighbors.

    Both counter relations are declared but left empty, which satisfies the
    counter axioms: with no boundary anywhere, no bit is ever forced.
    """
    if width < 1 or height < 1:
        raise ValueError("torus dimensions must be >= 1")
    s = Structure(
        width * height,
        GRID_SIGNATURE.extended((COUNTER_ROW, 1), (COUNTER_COL, 1)),
    )
    idx = lambda x, y: y * width + x
    for y in range(height):
        for x in range(width):
            e = idx(x, y)
            s.add("R", e, idx((x + 1) % width, y))
            s.add("L", e, idx((x - 1) % width, y))
            s.add("D", e, idx(x, (y + 1) % height))
            s.add("U", e, idx(x, (y - 1) % height))
    return s.freeze()


def disjoint_union(a: Structure, b: Structure) -> Structure:
    """Union with b's elements shifted past a's; signatures must match."""
    if set(a.signature.relations) != set(b.signature.relations):
        raise SignatureMismatch("disjoint_union requires identical signatures")
    out = Structure(a.size + b.size, a.signature)
    for name in a.signature.names():
        for tup in a.tuples(name):
            out.add(name, *tup)
        for tup in b.tuples(name):
            out.add(name, *(e + a.size for e in tup))
    return out.freeze()


def swap_axes(s: Structure) -> Structure:
    """Mirror across the anti-diagonal by renaming relations.

    Swaps L with D and R with U, and the two counters with each other, so
    row-counter satisfaction on the input corresponds to column-counter
    satisfaction on the output.
    """
    rename = {"L": "D", "D": "L", "R": "U", "U": "R",
              COUNTER_ROW: COUNTER_COL, COUNTER_COL: COUNTER_ROW}
    sig = s.signature.extended(
        *(
            (rename[name], arity)
            for name, arity in s.signature.relations
            if name in rename
        )
    )
    out = Structure(s.size, sig)
    for name in s.signature.names():
        target = rename.get(name, name)
        for tup in s.tuples(name):
            out.add(target, *tup)
    return out.freeze()


# -- neighborhood types ----------------------------------------------------

TypeCode = bytes


def _ball(s: Structure, v: int, r: int) -> list[int]:
    """Elements within undirected distance r of v, over every binary relation."""
    dist = {v: 0}
    frontier = [v]
    for d in range(r):
        nxt = []
        for u in frontier:
            for rel in s.signature.binary_names():
                for w in s.successors(rel, u) + s.predecessors(rel, u):
                    if w not in dist:
                        dist[w] = d + 1
                        nxt.append(w)
        frontier = nxt
    return sorted(dist)


def _refine(
    colors: list[int],
    out_edges: list[list[tuple[str, int]]],
    in_edges: list[list[tuple[str, int]]],
) -> list[int]:
    """Iterated color refinement; stable and relabeling-invariant."""
    n = len(colors)
    while True:
        keys = []
        for v in range(n):
            keys.append(
                (
                    colors[v],
                    tuple(sorted((rel, colors[w]) for rel, w in out_edges[v])),
                    tuple(sorted((rel, colors[w]) for rel, w in in_edges[v])),
                )
            )
        order = {key: i for i, key in enumerate(sorted(set(keys)))}
        new = [order[k] for k in keys]
        if new == colors:
            return colors
        colors = new


def _canonical_code(
    labels: list[tuple[str, ...]],
    out_edges: list[list[tuple[str, int]]],
    root: int | None,
) -> bytes:
    """Canonical serialization of a vertex- and edge-labeled digraph.

    Color refinement seeded by the vertex labels (the root, when given, is
    distinguished), with backtracking individualization on the first
    non-singleton class; the minimum serialization over all branches is
    canonical.
    """
    n = len(labels)
    in_edges: list[list[tuple[str, int]]] = [[] for _ in range(n)]
    for v, edges in enumerate(out_edges):
        for rel, w in edges:
            in_edges[w].append((rel, v))
    seed_keys = [(v == root, labels[v]) for v in range(n)]
    order = {key: i for i, key in enumerate(sorted(set(seed_keys)))}
    start = [order[k] for k in seed_keys]

    def serialize(colors: list[int]) -> bytes:
        rank = sorted(range(n), key=lambda v: colors[v])
        pos = {v: i for i, v in enumerate(rank)}
        parts = [str(n), str(pos[root]) if root is not None else "-"]
        parts.append(";".join(",".join(labels[v]) for v in rank))
        edge_list = sorted(
            (rel, pos[v], pos[w]) for v, edges in enumerate(out_edges) for rel, w in edges
        )
        parts.append(";".join(f"{rel}:{a}>{b}" for rel, a, b in edge_list))
        return "|".join(parts).encode()

    def search(colors: list[int]) -> bytes:
        colors = _refine(colors, out_edges, in_edges)
        counts: dict[int, list[int]] = {}
        for v in range(n):
            counts.setdefault(colors[v], []).append(v)
        target = None
        for c in sorted(counts):
            if len(counts[c]) > 1:
                target = counts[c]
                break
        if target is None:
            return serialize(colors)
        best = None
        bump = max(colors) + 1
        for v in target:
            branched = list(colors)
            branched[v] = bump
            code = search(branched)
            if best is None or code < best:
                best = code
        return best

    return search(start)


def neighborhood_type(s: Structure, v: int, r: int) -> TypeCode:
    """Canonical code of the radius-r neighborhood of v, rooted at v.

    Codes are equal exactly when the induced neighborhoods are isomorphic
    as labeled structures (relation names label edges, unary memberships
    label vertices) by an isomorphism mapping root to root.
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    ball = _ball(s, v, r)
    index = {e: i for i, e in enumerate(ball)}
    labels = [
        tuple(sorted(u for u in s.signature.unary_names() if s.holds(u, e)))
        for e in ball
    ]
    out_edges: list[list[tuple[str, int]]] = [[] for _ in ball]
    for rel in s.signature.binary_names():
        for a, b in s.tuples(rel):
            if a in index and b in index:
                out_edges[index[a]].append((rel, index[b]))
    return _canonical_code(labels, out_edges, index[v])


def canonical_form(s: Structure) -> bytes:
    """Canonical code of a whole structure; equal codes mean isomorphic."""
    labels = [
        tuple(sorted(u for u in s.signature.unary_names() if s.holds(u, e)))
        for e in range(s.size)
    ]
    out_edges: list[list[tuple[str, int]]] = [[] for _ in range(s.size)]
    for rel in s.signature.binary_names():
        for a, b in s.tuples(rel):
            out_edges[a].append((rel, b))
    return _canonical_code(labels, out_edges, None)


@dataclass(frozen=True)
class TypeHistogram:
    """Counts of neighborhood types, each capped at M."""

    r: int
    cap: int
    counts: dict[TypeCode, int]

    def __eq__(self, other):
        if not isinstance(other, TypeHistogram):
            return NotImplemented
        return self.r == other.r and self.cap == other.cap and self.counts == other.counts


def type_histogram(s: Structure, r: int, cap: int) -> TypeHistogram:
    if cap < 1:
        raise ValueError("cap must be >= 1")
    counts: dict[TypeCode, int] = {}
    for v in range(s.size):
        code = neighborhood_type(s, v, r)
        counts[code] = counts.get(code, 0) + 1
    return TypeHistogram(r, cap, {c: min(cap, k) for c, k in counts.items()})


def _column_types(s: Structure, wit: GridWitness, r: int) -> list[tuple[TypeCode, ...]]:
    return [
        tuple(neighborhood_type(s, wit.cells[(x, y)], r) for y in range(wit.height))
        for x in range(wit.width)
    ]


def _window_ok(
    s: Structure,
    wit: GridWitness,
    col_types: list[tuple[TypeCode, ...]],
    full_counts: dict[TypeCode, int],
    r: int,
    cap: int,
    x1: int,
    x2: int,
) -> bool:
    w = wit.width
    if not (0 <= x1 < x2 < w):
        return False
    # Margins keep the window clear of the left boundary and wide enough
    # that wrapping the copied columns cannot create new ball shapes: a
    # circumference below 2r+2 would let a radius-r ball meet itself.
    if x1 < 2 * r + 1 or x2 + r > w - 1:
        return False
    if x2 - x1 < 2 * r + 2:
        return False
    for i in range(-r, r + 1):
        if col_types[x1 + i] != col_types[x2 + i]:
            return False
    for x in range(x1, x2 + 1):
        for code in col_types[x]:
            if full_counts[code] < cap:
                return False
    return True


def find_repeating_window(
    s: Structure, r: int, cap: int
) -> tuple[int, int] | None:
    """First (x1, x2) whose surrounding column types repeat and are frequent.

    Column type vectors must agree at every offset in [-r, r], every type
    occurring in columns x1..x2 must occur at least `cap` times overall,
    and the window must be wide enough (and far enough from the left edge)
    for the cylinder construction to preserve the capped histogram.
    """
    wit = recognize_grid(s)
    if wit is None:
        raise GridRequired("find_repeating_window needs a grid")
    col_types = _column_types(s, wit, r)
    full_counts: dict[TypeCode, int] = {}
    for col in col_types:
        for code in col:
            full_counts[code] = full_counts.get(code, 0) + 1
    for x1 in range(wit.width):
        for x2 in range(x1 + 1, wit.width):
            if _window_ok(s, wit, col_types, full_counts, r, cap, x1, x2):
                return (x1, x2)
    return None


def build_hanf_cylinder(s: Structure, r: int, cap: int, x1: int, x2: int) -> Structure:
    """Adjoin a (x2-x1)-circumference cylinder copying columns x1..x2-1.

    The new component has cyclic rows, the original vertical wiring, and
    column-wise copies of every unary relation; the window must satisfy
    the repeating-window conditions for (r, cap).
    """
    wit = recognize_grid(s)
    if wit is None:
        raise GridRequired("build_hanf_cylinder needs a grid")
    col_types = _column_types(s, wit, r)
    full_counts: dict[TypeCode, int] = {}
    for col in col_types:
        for code in col:
            full_counts[code] = full_counts.get(code, 0) + 1
    if not _window_ok(s, wit, col_types, full_counts, r, cap, x1, x2):
        raise WindowInvalid(f"window ({x1}, {x2}) fails the repetition conditions")
    width, height = wit.width, wit.height
    circumference = x2 - x1
    out = Structure(s.size + circumference * height, s.signature)
    for name in s.signature.names():
        for tup in s.tuples(name):
            out.add(name, *tup)
    new = lambda x, y: s.size + (x - x1) * height + y
    for x in range(x1, x2):
        for y in range(height):
            e = new(x, y)
            right = x1 + (x - x1 + 1) % circumference
            left = x1 + (x - x1 - 1) % circumference
            out.add("R", e, new(right, y))
            out.add("L", e, new(left, y))
            if y > 0:
                out.add("U", e, new(x, y - 1))
            if y < height - 1:
                out.add("D", e, new(x, y + 1))
            for u in s.signature.unary_names():
                if s.holds(u, wit.cells[(x, y)]):
                    out.add(u, e)
    return out.freeze()
