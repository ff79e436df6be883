import itertools

import pytest

from gridspectra.builder import build_grid, build_torus
from gridspectra.core import Structure
from gridspectra.errors import BudgetExceeded, StructureFormatError
from gridspectra.tiling import (
    TileAssignment,
    Tileset,
    aperiodicity_report,
    attach_coloring,
    coloring_exists_for_structure,
    format_tileset,
    parse_tileset,
    tile_rectangle,
    tile_torus,
    validate_assignment,
)

SINGLE = Tileset(("t",), frozenset({("t", "t")}), frozenset({("t", "t")}))
CHECKER = Tileset(
    ("a", "b"),
    frozenset({("a", "b"), ("b", "a")}),
    frozenset({("a", "b"), ("b", "a")}),
)


def brute_force_tilable(ts, w, h, wrap):
    for combo in itertools.product(ts.tiles, repeat=w * h):
        cells = {(x, y): combo[y * w + x] for y in range(h) for x in range(w)}
        if validate_assignment(ts, TileAssignment(w, h, cells, wrap)):
            return True
    return False


def test_single_tile_everywhere():
    for w, h in ((1, 1), (3, 2), (4, 4)):
        asg = tile_rectangle(SINGLE, w, h)
        assert asg is not None and set(asg.cells.values()) == {"t"}
    assert tile_torus(SINGLE, 3, 3) is not None


def test_incompatible_pair_absent():
    ts = Tileset(("a", "b"), frozenset(), frozenset())
    assert tile_rectangle(ts, 2, 1) is None
    assert tile_rectangle(ts, 1, 1) is not None  # no adjacency constraints at all


def test_checkerboard_parity():
    assert tile_torus(CHECKER, 2, 2) is not None
    assert tile_torus(CHECKER, 3, 3) is None
    assert tile_torus(CHECKER, 2, 3) is None
    assert tile_rectangle(CHECKER, 3, 3) is not None


def test_torus_unrolls_to_rectangles():
    for ts in (SINGLE, CHECKER):
        for w, h in ((1, 1), (2, 2), (2, 1)):
            torus = tile_torus(ts, w, h)
            if torus is None:
                continue
            for k in (1, 2, 3):
                assert tile_rectangle(ts, k * w, k * h) is not None


def test_empty_hrel_degenerate_tori():
    ts = Tileset(("a", "b"), frozenset(), frozenset({("a", "a")}))
    survey = aperiodicity_report(ts, 2)
    assert survey.entries[(1, 1)] == "absent"  # self-adjacency needs hrel too
    assert all(v == "absent" for v in survey.entries.values())
    ts2 = Tileset(("a",), frozenset({("a", "a")}), frozenset({("a", "a")}))
    survey2 = aperiodicity_report(ts2, 3)
    assert not survey2.all_absent
    assert isinstance(survey2.entries[(1, 1)], TileAssignment)


def test_solver_matches_brute_force_on_random_sets():
    import random

    rng = random.Random(12)
    for _ in range(40):
        k = rng.randint(1, 3)
        names = tuple(f"x{i}" for i in range(k))
        hrel = frozenset((a, b) for a in names for b in names if rng.random() < 0.45)
        vrel = frozenset((a, b) for a in names for b in names if rng.random() < 0.45)
        ts = Tileset(names, hrel, vrel)
        w, h = rng.randint(1, 3), rng.randint(1, 3)
        for wrap in (False, True):
            got = (tile_torus if wrap else tile_rectangle)(ts, w, h)
            assert (got is not None) == brute_force_tilable(ts, w, h, wrap)
            if got is not None:
                assert validate_assignment(ts, got)


def test_solver_determinism():
    first = tile_rectangle(CHECKER, 4, 4)
    second = tile_rectangle(CHECKER, 4, 4)
    assert first is not None and first.cells == second.cells


def test_budget_raises():
    ts = Tileset(
        ("a", "b", "c"),
        frozenset((x, y) for x in "abc" for y in "abc" if x != y),
        frozenset((x, y) for x in "abc" for y in "abc" if x != y),
    )
    with pytest.raises(BudgetExceeded):
        tile_rectangle(ts, 6, 6, budget=3)


def test_jr11_rectangles_and_small_tori(jr11):
    assert len(jr11.tiles) == 11
    asg = tile_rectangle(jr11, 5, 5)
    assert asg is not None and validate_assignment(jr11, asg)
    for w in range(1, 6):
        for h in range(1, 6):
            assert tile_torus(jr11, w, h) is None, (w, h)


def test_torus_coloring_absence_by_full_enumeration(jr11):
    """Oracle for the solver's absence proof: try all 11^4 colorings."""
    from gridspectra.builder import build_torus
    from gridspectra.logic import axiom_group, check_axioms

    torus = build_torus(2, 2).reduct()
    group = axiom_group("tiling", tileset=jr11)
    assert len(group.formulas) == 1 + (121 - len(jr11.hrel)) + (121 - len(jr11.vrel))
    for combo in itertools.product(jr11.tiles, repeat=4):
        colored = attach_coloring(torus, jr11, dict(enumerate(combo)))
        report = check_axioms(colored, group)
        assert not report.passed, combo


def test_coloring_on_structures(jr11):
    grid = build_grid(3, 3)
    coloring = coloring_exists_for_structure(grid, jr11)
    assert coloring is not None
    colored = attach_coloring(grid, jr11, coloring)
    from gridspectra.logic import axiom_group, check_axioms

    assert check_axioms(colored, axiom_group("tiling", tileset=jr11)).passed
    torus = build_torus(2, 2)
    assert coloring_exists_for_structure(torus, jr11) is None
    bare = Structure(3).freeze()
    assert coloring_exists_for_structure(bare, jr11) is not None


def test_tileset_text_round_trip(jr11):
    text = format_tileset(jr11)
    assert parse_tileset(text) == jr11
    with pytest.raises(StructureFormatError):
        parse_tileset("tiles a\nhrel (a,zzz)\n")
    with pytest.raises(StructureFormatError):
        parse_tileset("tiles a\nhrel junk\n")
