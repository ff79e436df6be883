import random

import pytest

from gridspectra.automata import (
    Automaton,
    Run,
    decode_run_from_grid,
    encode_run_on_grid,
    format_automaton,
    format_run,
    next_row_choices,
    parse_automaton,
    parse_run,
    search_accepting_run,
    search_filling_run,
    simulate,
    validate_run,
    verify_run_axioms,
)
from gridspectra.builder import build_grid
from gridspectra.core import Structure
from gridspectra.errors import BudgetExceeded, DimensionMismatch


def rule110_reference(row):
    """Independent recomputation of one rule-110 step on 0/1 ints."""
    out = []
    for i in range(len(row)):
        l = row[i - 1] if i > 0 else 0
        r = row[i + 1] if i + 1 < len(row) else 0
        pattern = (l << 2) | (row[i] << 1) | r
        out.append((110 >> pattern) & 1)
    return out


def test_automaton_validation():
    with pytest.raises(ValueError):
        Automaton(("a",), frozenset(), "b")  # final not in alphabet
    with pytest.raises(ValueError):
        Automaton(("a", "#"), frozenset(), "a")  # boundary inside alphabet
    with pytest.raises(ValueError):
        Automaton(("a",), frozenset({("a", "a", "a", "#")}), "a")  # writes boundary


def test_identity_machine_constant_rows(machines):
    ident = machines["identity"]
    run = Run((("0", "1", "0"),) * 4)
    ok, violation = validate_run(ident, run)
    assert ok and violation is None


def test_rule110_trace_against_reference(machines):
    m = machines["rule110"]
    start = [1, 0, 0, 1, 1, 0, 1, 0]
    rows = [start]
    for _ in range(3):
        rows.append(rule110_reference(rows[-1]))
    run = Run(tuple(tuple(str(b) for b in row) for row in rows))
    ok, _ = validate_run(m, run)
    assert ok
    sim = simulate(m, run.rows[0], 3)
    assert sim == run
    flipped = [list(r) for r in run.rows]
    flipped[2][4] = "1" if flipped[2][4] == "0" else "0"
    ok2, violation = validate_run(m, Run(tuple(tuple(r) for r in flipped)))
    assert not ok2 and violation is not None


def test_parity_machine(machines):
    parity = machines["parity"]
    assert search_accepting_run(parity, "110", 8) is not None
    assert search_accepting_run(parity, "100", 10) is None
    assert search_accepting_run(parity, "0", 4) is not None
    assert search_accepting_run(parity, "1", 8) is None


def test_parity_absence_by_enumeration(machines):
    """Oracle: enumerate every run of height <= 5 on input 100."""
    parity = machines["parity"]
    frontier = [("1", "0", "0")]
    seen = set(frontier)
    found_final = False
    for _ in range(4):
        nxt = []
        for row in frontier:
            choices = next_row_choices(parity, row)
            if not all(choices):
                continue
            import itertools

            for new in itertools.product(*choices):
                if new in seen:
                    continue
                seen.add(new)
                nxt.append(new)
                found_final = found_final or "F" in new
        frontier = nxt
    assert not found_final
    assert search_accepting_run(parity, "100", 5) is None


def test_accepting_run_shapes(machines):
    acceptall = machines["acceptall"]
    run = search_accepting_run(acceptall, ("0", "1"), 5)
    assert run is not None and run.time == 2
    run_f = search_accepting_run(acceptall, ("F",), 5)
    assert run_f is not None and run_f.time == 1
    unreachable = Automaton(("0", "F"), frozenset({("#", "0", "#", "0")}), "F")
    assert search_accepting_run(unreachable, ("0",), 6) is None


def test_deterministic_search_matches_simulation(machines):
    for name in ("identity", "rule110", "parity", "acceptall"):
        m = machines[name]
        assert m.is_deterministic()
        for text in ("0110", "11", "101"):
            run = search_accepting_run(m, text, 6)
            if run is None:
                continue
            sim = simulate(m, tuple(text), run.time - 1)
            assert run == sim, name


def test_search_filling_run(machines):
    acceptall = machines["acceptall"]
    run = search_filling_run(acceptall, ("1", "0", "1"), 5)
    assert run is not None and run.time == 5
    ok, _ = validate_run(acceptall, run)
    assert ok and run.contains("F")
    parity = machines["parity"]
    assert search_filling_run(parity, ("1", "0", "0"), 6) is None
    with pytest.raises(BudgetExceeded):
        search_filling_run(machines["branch"], ("0",) * 6, 6, budget=2)


def test_encode_decode_round_trip(machines):
    m = machines["rule110"]
    run = simulate(m, ("1", "0", "1", "1"), 3)
    grid = build_grid(4, 4)
    encoded = encode_run_on_grid(grid, run, "run")
    assert decode_run_from_grid(encoded, m, "run") == run
    assert verify_run_axioms(encoded, m, "run") == run.contains("1")
    with pytest.raises(DimensionMismatch):
        encode_run_on_grid(build_grid(4, 3), run)


def test_exactly_one_symbol_violations(machines):
    m = machines["identity"]
    run = Run((("0", "1"), ("0", "1")))
    encoded = encode_run_on_grid(build_grid(2, 2), run, "run")
    doubled = encoded.with_additions({"run.0": [(1,)]})
    assert verify_run_axioms(doubled, m, "run") is False
    assert verify_run_axioms(build_grid(2, 2), m, "run") is False
    assert verify_run_axioms(Structure(2).freeze(), m, "run") is False


def test_random_valid_runs_round_trip(machines):
    rng = random.Random(99)
    for name, machine in machines.items():
        done = 0
        while done < 20:
            S, T = rng.randint(1, 6), rng.randint(1, 6)
            rows = [tuple(rng.choice(machine.alphabet) for _ in range(S))]
            stuck = False
            for _ in range(T - 1):
                choices = next_row_choices(machine, rows[-1])
                if not all(choices):
                    stuck = True
                    break
                rows.append(tuple(rng.choice(c) for c in choices))
            if stuck:
                continue
            run = Run(tuple(rows))
            ok, _ = validate_run(machine, run)
            assert ok
            encoded = encode_run_on_grid(build_grid(S, T), run, "run")
            assert verify_run_axioms(encoded, machine, "run") == run.contains(
                machine.final
            ), name
            done += 1


def test_boundary_symbol_never_written(machines):
    for machine in machines.values():
        for _, _, _, d in machine.rules:
            assert d != machine.boundary


def test_text_round_trips(machines):
    for machine in machines.values():
        assert parse_automaton(format_automaton(machine)) == machine
    run = Run((("0", "1"), ("1", "1")))
    assert parse_run(format_run(run)) == run
