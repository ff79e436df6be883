import random
from itertools import permutations

import pytest

from gridspectra.builder import (
    attach_counters,
    build_grid,
    build_hanf_cylinder,
    build_torus,
    canonical_form,
    counter_capacity_ok,
    disjoint_union,
    find_repeating_window,
    neighborhood_type,
    row_counter_values,
    type_histogram,
)
from gridspectra.core import Structure, recognize_grid, relabel
from gridspectra.errors import GridRequired, SignatureMismatch, WindowInvalid
from gridspectra.logic import axiom_group, check_axioms, grid_axioms


def test_build_grid_tuple_counts():
    g = build_grid(3, 2)
    assert g.size == 6
    assert len(g.tuples("R")) == 4
    assert len(g.tuples("L")) == 4
    assert len(g.tuples("D")) == 3
    single = build_grid(1, 1)
    assert single.size == 1 and all(not single.tuples(d) for d in "LRUD")
    assert check_axioms(build_grid(2, 2), axiom_group("geometry")).passed


def test_counter_values_follow_row_index():
    for w, h in ((4, 3), (3, 3), (5, 6), (2, 2)):
        g = attach_counters(build_grid(w, h))
        values = row_counter_values(g)
        assert values[0] == 0
        assert all(b == y for y, b in enumerate(values))


def test_counter_bits_of_4x3():
    g = attach_counters(build_grid(4, 3))
    wit = recognize_grid(g)
    rows = [
        "".join("1" if g.holds("B_V", wit.cells[(x, y)]) else "0" for x in range(4))
        for y in range(3)
    ]
    assert rows == ["0000", "1000", "0100"]


def test_counter_overflow_cases():
    g = attach_counters(build_grid(2, 8))
    report = check_axioms(g, axiom_group("counter-v"))
    assert [r.label for r in report.results if not r.passed] == ["overflow"]
    assert check_axioms(g, axiom_group("counter-h")).passed
    assert check_axioms(g, axiom_group("geometry")).passed


def test_capacity_region_empirical():
    for w in range(1, 11):
        for h in range(1, 11):
            g = attach_counters(build_grid(w, h))
            forced = all(check_axioms(g, gp).passed for gp in grid_axioms())
            assert forced == counter_capacity_ok(w, h), (w, h)


def test_torus_properties():
    t = build_torus(3, 3)
    for v in range(t.size):
        assert all(len(t.successors(d, v)) == 1 for d in "LRUD")
    assert all(check_axioms(build_torus(2, 2), g).passed for g in grid_axioms())
    assert recognize_grid(build_torus(2, 2)) is None


def test_disjoint_union():
    a = build_grid(2, 2)
    b = build_torus(2, 2).reduct()
    u = disjoint_union(a, b)
    assert u.size == 8
    assert check_axioms(u, axiom_group("geometry")).passed
    two_grids = disjoint_union(a, build_grid(2, 2))
    assert not check_axioms(two_grids, axiom_group("corner")).passed
    empty = Structure(0).freeze()
    assert disjoint_union(a, empty) == a
    with pytest.raises(SignatureMismatch):
        disjoint_union(a, attach_counters(build_grid(2, 2)))


def test_grid_union_torus_keeps_grid_axioms():
    mixed = disjoint_union(attach_counters(build_grid(2, 2)), build_torus(2, 2))
    assert all(check_axioms(mixed, g).passed for g in grid_axioms())
    assert not check_axioms(mixed, axiom_group("corner")).passed


# -- neighborhood types -------------------------------------------------------


def extract_ball(s, v, r):
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


def balls_isomorphic(s, v1, v2, r):
    """Rooted labeled isomorphism by exhaustive permutation search."""
    b1, b2 = extract_ball(s, v1, r), extract_ball(s, v2, r)
    if len(b1) != len(b2):
        return False
    unaries = s.signature.unary_names()
    binaries = s.signature.binary_names()

    def profile(ball, root):
        labels = {e: tuple(u for u in unaries if s.holds(u, e)) for e in ball}
        edges = {
            rel: {(a, b) for a, b in s.tuples(rel) if a in labels and b in labels}
            for rel in binaries
        }
        return labels, edges, root

    l1, e1, r1 = profile(b1, v1)
    l2, e2, r2 = profile(b2, v2)
    others1 = [e for e in b1 if e != v1]
    others2 = [e for e in b2 if e != v2]
    for perm in permutations(others2):
        mapping = dict(zip(others1, perm))
        mapping[v1] = v2
        if any(l1[e] != l2[mapping[e]] for e in b1):
            continue
        if all(
            {(mapping[a], mapping[b]) for a, b in e1[rel]} == e2[rel]
            for rel in binaries
        ):
            return True
    return False


def test_neighborhood_codes_match_brute_force_isomorphism():
    g = build_grid(4, 3).with_additions({"B_V": [(0,), (5,)]}, declare=(("B_V", 1),))
    codes = [neighborhood_type(g, v, 1) for v in range(g.size)]
    for v1 in range(g.size):
        for v2 in range(v1, g.size):
            same = codes[v1] == codes[v2]
            assert same == balls_isomorphic(g, v1, v2, 1), (v1, v2)


def test_five_grid_has_nine_radius_one_types():
    g = build_grid(5, 5)
    codes = {neighborhood_type(g, v, 1) for v in range(g.size)}
    assert len(codes) == 9  # 4 corners, 4 edge kinds, 1 interior


def test_radius_zero_depends_only_on_labels():
    g = build_grid(3, 2).with_additions({"B_V": [(0,)]}, declare=(("B_V", 1),))
    codes = {neighborhood_type(g, v, 0) for v in range(g.size)}
    assert len(codes) == 2  # labeled element 0 versus everything else


def test_torus_is_vertex_transitive_at_radius_one():
    t = build_torus(4, 4)
    codes = {neighborhood_type(t, v, 1) for v in range(t.size)}
    assert len(codes) == 1


def test_codes_invariant_under_relabeling():
    rng = random.Random(3)
    g = build_grid(3, 3).with_additions({"B_H": [(4,)]}, declare=(("B_H", 1),))
    perm = list(range(g.size))
    rng.shuffle(perm)
    h = relabel(g, perm)
    for v in range(g.size):
        assert neighborhood_type(g, v, 1) == neighborhood_type(h, perm[v], 1)
    hist_g = type_histogram(g, 1, 3)
    hist_h = type_histogram(h, 1, 3)
    assert hist_g == hist_h


def test_histograms_cap_and_total():
    g = build_grid(5, 5)
    hist = type_histogram(g, 1, 3)
    assert sorted(hist.counts.values()) == [1, 1, 1, 1, 3, 3, 3, 3, 3]
    empty = type_histogram(Structure(0).freeze(), 1, 2)
    assert empty.counts == {}


def test_find_repeating_window_cases():
    assert find_repeating_window(build_grid(3, 3), 1, 3) is None
    win = find_repeating_window(build_grid(12, 3), 1, 3)
    assert win is not None
    x1, x2 = win
    assert 1 + 2 <= x1 < x2
    assert find_repeating_window(build_grid(4, 2), 0, 1) == (1, 3)
    assert find_repeating_window(build_grid(3, 2), 0, 1) is None
    with pytest.raises(GridRequired):
        find_repeating_window(build_torus(3, 3), 1, 1)


def test_cylinder_preserves_capped_histogram():
    g = build_grid(12, 3)
    win = find_repeating_window(g, 1, 3)
    cyl = build_hanf_cylinder(g, 1, 3, *win)
    assert cyl.size == g.size + (win[1] - win[0]) * 3
    assert type_histogram(g, 1, 3) == type_histogram(cyl, 1, 3)
    assert recognize_grid(cyl) is None
    with pytest.raises(WindowInvalid):
        build_hanf_cylinder(g, 1, 3, 0, 1)


def test_cylinder_sweep_over_feasible_parameters():
    for w, h, r, cap in ((10, 2, 1, 2), (12, 3, 1, 3), (9, 4, 0, 2), (14, 2, 2, 2)):
        g = build_grid(w, h)
        win = find_repeating_window(g, r, cap)
        if win is None:
            continue
        cyl = build_hanf_cylinder(g, r, cap, *win)
        assert type_histogram(g, r, cap) == type_histogram(cyl, r, cap), (w, h, r, cap)


def test_canonical_form_detects_isomorphism():
    rng = random.Random(9)
    g = build_grid(3, 2)
    perm = list(range(6))
    rng.shuffle(perm)
    assert canonical_form(g) == canonical_form(relabel(g, perm))
    assert canonical_form(g) != canonical_form(build_grid(2, 3))
    assert canonical_form(build_torus(2, 2).reduct()) != canonical_form(build_grid(2, 2))
