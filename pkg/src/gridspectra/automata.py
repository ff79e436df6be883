"""Nondeterministic one-dimensional cellular automata.

A machine is (alphabet, rule set, final symbol) plus a reserved boundary
symbol that stands in for missing neighbors: a cell's successor symbol d
is licensed when (left, cell, right, d) is a rule, where left/right read
as the boundary at the ends of the row.  The machine accepts a run when
the final symbol appears in some cell.  Runs are encoded onto grids with
time flowing upward, so the bottom row is the initial tape.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from itertools import product

from .core import Structure, recognize_grid
from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    GridRequired,
    StructureFormatError,
)
from .logic import symbol_relation

_RULE_RE = re.compile(r"\(\s*([^\s,()]+)\s*,\s*([^\s,()]+)\s*,\s*([^\s,()]+)\s*,\s*([^\s,()]+)\s*\)")


@dataclass(frozen=True)
class Automaton:
    alphabet: tuple[str, ...]
    rules: frozenset[tuple[str, str, str, str]]
    final: str
    boundary: str = "#"
    blank: str | None = None

    def __post_init__(self):
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("duplicate alphabet symbols")
        if self.final not in self.alphabet:
            raise ValueError("final symbol must be in the alphabet")
        if self.boundary in self.alphabet:
            raise ValueError("boundary symbol must not be in the alphabet")
        if self.blank is not None and self.blank not in self.alphabet:
            raise ValueError("blank symbol must be in the alphabet")
        extended = set(self.alphabet) | {self.boundary}
        for l, c, r, d in self.rules:
            if l not in extended or r not in extended:
                raise ValueError(f"rule ({l},{c},{r},{d}) has a bad side symbol")
            if c not in self.alphabet or d not in self.alphabet:
                raise ValueError(f"rule ({l},{c},{r},{d}) writes outside the alphabet")

    @cached_property
    def _succ(self) -> dict[tuple[str, str, str], tuple[str, ...]]:
        table: dict[tuple[str, str, str], list[str]] = {}
        for l, c, r, d in self.rules:
            table.setdefault((l, c, r), []).append(d)
        return {k: tuple(sorted(v)) for k, v in table.items()}

    def successors(self, left: str, cell: str, right: str) -> tuple[str, ...]:
        return self._succ.get((left, cell, right), ())

    def is_deterministic(self) -> bool:
        return all(len(v) == 1 for v in self._succ.values())


@dataclass(frozen=True)
class Run:
    """T rows of S symbols; row 0 is the initial tape."""

    rows: tuple[tuple[str, ...], ...]

    @property
    def time(self) -> int:
        return len(self.rows)

    @property
    def space(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def cell(self, x: int, y: int) -> str:
        return self.rows[y][x]

    def contains(self, symbol: str) -> bool:
        return any(symbol in row for row in self.rows)


def next_row_choices(a: Automaton, row: tuple[str, ...]) -> list[tuple[str, ...]]:
    """Per-cell successor candidates; empty at any cell means a stuck row."""
    out = []
    for x, c in enumerate(row):
        left = row[x - 1] if x > 0 else a.boundary
        right = row[x + 1] if x + 1 < len(row) else a.boundary
        out.append(a.successors(left, c, right))
    return out


def validate_run(a: Automaton, run: Run) -> tuple[bool, tuple[int, int] | None]:
    """Whether every step is licensed; on failure, the first bad cell (x, y+1)."""
    for y in range(run.time - 1):
        row = run.rows[y]
        for x in range(run.space):
            left = row[x - 1] if x > 0 else a.boundary
            right = row[x + 1] if x + 1 < run.space else a.boundary
            if (left, row[x], right, run.rows[y + 1][x]) not in a.rules:
                return False, (x, y + 1)
    return True, None


def simulate(a: Automaton, input_row: tuple[str, ...], steps: int) -> Run:
    """Forward simulation; the machine must be deterministic and never stuck."""
    if not a.is_deterministic():
        raise ValueError("simulate needs a deterministic machine")
    rows = [tuple(input_row)]
    for _ in range(steps):
        choices = next_row_choices(a, rows[-1])
        if any(len(c) != 1 for c in choices):
            raise ValueError("machine is stuck or branching during simulation")
        rows.append(tuple(c[0] for c in choices))
    return Run(tuple(rows))


def search_accepting_run(
    a: Automaton,
    input_row: tuple[str, ...] | list[str] | str,
    time_bound: int,
    budget: int | None = None,
) -> Run | None:
    """Shortest accepting run from the input within the height bound.

    Breadth-first over row configurations with duplicate rows pruned at
    their earliest time, so exhaustion is a proof of absence.  Expansion
    order is lexicographic, making the returned run deterministic; for
    deterministic machines it coincides with forward simulation.
    """
    row0 = tuple(input_row)
    if time_bound < 1 or not row0:
        raise ValueError("need time_bound >= 1 and a nonempty input row")
    for sym in row0:
        if sym not in a.alphabet:
            raise ValueError(f"input symbol {sym!r} not in alphabet")
    if a.final in row0:
        return Run((row0,))
    parent: dict[tuple[str, ...], tuple[str, ...] | None] = {row0: None}
    frontier = [row0]
    generated = 0
    for _depth in range(time_bound - 1):
        nxt: list[tuple[str, ...]] = []
        for row in frontier:
            choices = next_row_choices(a, row)
            if any(not c for c in choices):
                continue
            for new_row in product(*choices):
                generated += 1
                if budget is not None and generated > budget:
                    raise BudgetExceeded(budget)
                if new_row in parent:
                    continue
                parent[new_row] = row
                if a.final in new_row:
                    chain = [new_row]
                    while (prev := parent[chain[-1]]) is not None:
                        chain.append(prev)
                    return Run(tuple(reversed(chain)))
                nxt.append(new_row)
        if not nxt:
            return None
        frontier = nxt
    return None


def search_filling_run(
    a: Automaton,
    input_row: tuple[str, ...] | list[str] | str,
    height: int,
    budget: int | None = None,
) -> Run | None:
    """An accepting run of exactly `height` rows, or None.

    Depth-first with memoized failures on (row, accepted, remaining), used
    when a run has to fill a whole grid rather than stop at acceptance.
    """
    row0 = tuple(input_row)
    if height < 1 or not row0:
        raise ValueError("need height >= 1 and a nonempty input row")
    failed: set[tuple[tuple[str, ...], bool, int]] = set()
    counter = [0]

    def extend(row: tuple[str, ...], accepted: bool, remaining: int) -> list | None:
        if remaining == 0:
            return [] if accepted else None
        key = (row, accepted, remaining)
        if key in failed:
            return None
        choices = next_row_choices(a, row)
        if all(choices):
            for new_row in product(*choices):
                counter[0] += 1
                if budget is not None and counter[0] > budget:
                    raise BudgetExceeded(budget)
                tail = extend(new_row, accepted or a.final in new_row, remaining - 1)
                if tail is not None:
                    return [new_row] + tail
        failed.add(key)
        return None

    tail = extend(row0, a.final in row0, height - 1)
    if tail is None:
        return None
    return Run(tuple([row0] + tail))


def encode_run_on_grid(s: Structure, run: Run, prefix: str = "run") -> Structure:
    """Add one unary relation per symbol, placing run row y at grid row h-1-y."""
    wit = recognize_grid(s)
    if wit is None:
        raise GridRequired("encode_run_on_grid needs a grid")
    if wit.width != run.space or wit.height != run.time:
        raise DimensionMismatch(
            f"grid is {wit.width}x{wit.height}, run is {run.space}x{run.time}"
        )
    symbols = sorted({sym for row in run.rows for sym in row})
    additions: dict[str, list[tuple[int, ...]]] = {
        symbol_relation(prefix, sym): [] for sym in symbols
    }
    for y in range(run.time):
        for x in range(run.space):
            sym = run.cell(x, y)
            additions[symbol_relation(prefix, sym)].append(
                (wit.cells[(x, wit.height - 1 - y)],)
            )
    return s.with_additions(
        additions, declare=tuple((rel, 1) for rel in additions)
    )


def decode_run_from_grid(
    s: Structure, a: Automaton, prefix: str = "run"
) -> Run | None:
    """Read the symbol relations back into a run; None unless exactly one
    alphabet symbol holds at every cell of a grid-recognizable structure."""
    wit = recognize_grid(s)
    if wit is None:
        return None
    rows = []
    for y in range(wit.height - 1, -1, -1):
        row = []
        for x in range(wit.width):
            e = wit.cells[(x, y)]
            hits = [
                sym
                for sym in a.alphabet
                if s.signature.has(symbol_relation(prefix, sym))
                and s.holds(symbol_relation(prefix, sym), e)
            ]
            if len(hits) != 1:
                return None
            row.append(hits[0])
        rows.append(tuple(row))
    return Run(tuple(rows))


def verify_run_axioms(s: Structure, a: Automaton, prefix: str = "run") -> bool:
    """Symbol relations spell a valid accepting run on the grid reduct."""
    run = decode_run_from_grid(s, a, prefix)
    if run is None:
        return False
    ok, _ = validate_run(a, run)
    return ok and run.contains(a.final)


# -- text formats ------------------------------------------------------------


def parse_automaton(text: str) -> Automaton:
    """Parse the machine format.

    Because '#' is the usual boundary symbol, comments are whole lines
    starting with '#', never trailing.
    """
    alphabet: list[str] = []
    rules: set[tuple[str, str, str, str]] = set()
    final: str | None = None
    boundary = "#"
    blank: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(None, 1)
        kind, rest = fields[0], fields[1] if len(fields) > 1 else ""
        if kind == "alphabet":
            alphabet.extend(rest.split())
        elif kind == "boundary":
            boundary = rest.strip()
        elif kind == "final":
            final = rest.strip()
        elif kind == "blank":
            blank = rest.strip()
        elif kind == "rule":
            matched = _RULE_RE.findall(rest)
            leftover = _RULE_RE.sub("", rest).strip()
            if not matched or leftover:
                raise StructureFormatError(f"bad rule text {rest!r}", lineno)
            rules.update(tuple(m) for m in matched)
        else:
            raise StructureFormatError(f"unknown directive {kind!r}", lineno)
    if final is None:
        raise StructureFormatError("missing final directive")
    try:
        return Automaton(tuple(alphabet), frozenset(rules), final, boundary, blank)
    except ValueError as exc:
        raise StructureFormatError(str(exc)) from exc


def format_automaton(a: Automaton) -> str:
    lines = ["alphabet " + " ".join(a.alphabet)]
    lines.append(f"boundary {a.boundary}")
    lines.append(f"final {a.final}")
    if a.blank is not None:
        lines.append(f"blank {a.blank}")
    for rule in sorted(a.rules):
        lines.append("rule (" + ",".join(rule) + ")")
    return "\n".join(lines) + "\n"


def parse_run(text: str) -> Run:
    space: int | None = None
    time: int | None = None
    rows: list[tuple[str, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "space" and space is None:
            space = int(fields[1])
        elif fields[0] == "time" and time is None:
            time = int(fields[1])
        else:
            rows.append(tuple(fields))
    if space is None or time is None:
        raise StructureFormatError("missing space/time header")
    if len(rows) != time or any(len(r) != space for r in rows):
        raise StructureFormatError("row shape does not match the space/time header")
    return Run(tuple(rows))


def format_run(run: Run) -> str:
    lines = [f"space {run.space}", f"time {run.time}"]
    for row in run.rows:
        lines.append(" ".join(row))
    return "\n".join(lines) + "\n"
