"""Full-cardinality model assembly and the exhaustive small-model oracle.

`assemble_model` builds an n-element structure out of a grid with both
counters and a tile coloring, an encoded accepting machine run, u extra
slack elements paired with the bottom of the leftmost column, the slack
counter, the four number encodings on the initial tape, and the wiring
that moves the width encoding onto the tape.  `check_spectrum_axioms`
re-derives all of that from the structure alone, group by group.

`enumerate_models` is the brute-force oracle: it enumerates direction
skeletons up to isomorphism (partial injective maps with inverse and
diagonal-closure propagation), then decides per skeleton whether the
requested unary layers (counters, tile colors) can be filled in.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from .automata import Automaton, Run, encode_run_on_grid, search_filling_run, verify_run_axioms
from .builder import (
    COUNTER_COL,
    COUNTER_ROW,
    attach_counters,
    build_grid,
    canonical_form,
    counter_capacity_ok,
)
from .core import Structure, is_connected, new_structure, recognize_grid
from .errors import (
    BudgetExceeded,
    CapacityExceeded,
    MissingParam,
    NoAcceptingRun,
    SlackTooLarge,
    TilingUnavailable,
    Underflow,
)
from .logic import (
    AxiomGroup,
    axiom_group,
    check_axioms,
    digit_relation,
    end_relation,
    evaluate,
)
from .tiling import Tileset, attach_coloring, coloring_exists_for_structure, tile_rectangle

MACHINE_PREFIX = "run"
VERIFIER_PREFIX = "chk"
SLACK_COUNTER = "B_U"


@dataclass(frozen=True)
class SpectrumParams:
    """Target cardinality n split as n = t*s + u with 0 <= u < t."""

    n: int
    t: int
    s: int
    u: int


def derive_params(n: int, t: int, s: int) -> SpectrumParams:
    if t < 1 or s < 1:
        raise ValueError("need t, s >= 1")
    if t * s > n:
        raise Underflow(f"t*s = {t * s} exceeds n = {n}")
    u = n - t * s
    if u >= t:
        raise SlackTooLarge(f"u = {u} is not below t = {t}")
    return SpectrumParams(n, t, s, u)


def _bits(value: int) -> list[int]:
    return [p for p in range(value.bit_length()) if value >> p & 1]


def binary_input_row(n: int, width: int, blank: str | None) -> tuple[str, ...]:
    """Little-endian digits of n as symbols, padded to width with the blank."""
    digits = ["1" if n >> x & 1 else "0" for x in range(n.bit_length())]
    if len(digits) > width:
        raise NoAcceptingRun(f"binary encoding of {n} does not fit in width {width}")
    if len(digits) < width:
        if blank is None:
            raise NoAcceptingRun("machine declares no blank symbol for padding")
        digits.extend([blank] * (width - len(digits)))
    return tuple(digits)


def verifier_input_row(
    width: int, n_bits: set[int], s_bits: set[int], t_bits: set[int], u_bits: set[int]
) -> tuple[str, ...]:
    """Tape flags for the arithmetic verifier: one 4-bit symbol per cell,
    reading the n, s, t, u digit relations in that order."""
    return tuple(
        "".join(
            "1" if x in bits else "0" for bits in (n_bits, s_bits, t_bits, u_bits)
        )
        for x in range(width)
    )


def assemble_model(
    params: SpectrumParams,
    machine: Automaton,
    tileset: Tileset,
    verifier: Automaton | None = None,
    budget: int | None = None,
) -> Structure:
    """The n-element model for these parameters, or a targeted error.

    Grid width is s and height is t; the u slack elements sit outside the
    grid, bijectively tied to the u bottommost leftmost-column cells.
    """
    n, w, h, u = params.n, params.s, params.t, params.u
    if not counter_capacity_ok(w, h):
        raise CapacityExceeded(f"counters cannot index a {w}x{h} grid")

    grid = attach_counters(build_grid(w, h))
    cell = lambda x, y: y * w + x

    assignment = tile_rectangle(tileset, w, h, budget=budget)
    if assignment is None:
        raise TilingUnavailable(f"no {w}x{h} tiling with this tileset")
    grid = attach_coloring(
        grid, tileset, {cell(x, y): t for (x, y), t in assignment.cells.items()}
    )

    input_row = binary_input_row(n, w, machine.blank)
    run = search_filling_run(machine, input_row, h, budget=budget)
    if run is None:
        raise NoAcceptingRun(f"no accepting run of height {h} on {''.join(input_row)}")
    grid = encode_run_on_grid(grid, run, MACHINE_PREFIX)

    s_val, t_val = w - 1, h - 1
    n_bits, s_bits, t_bits, u_bits = (
        set(_bits(n)),
        set(_bits(s_val)),
        set(_bits(t_val)),
        set(_bits(u)),
    )

    if verifier is not None:
        vrow = verifier_input_row(w, n_bits, s_bits, t_bits, u_bits)
        vrun = search_filling_run(verifier, vrow, h, budget=budget)
        if vrun is None:
            raise NoAcceptingRun("the arithmetic verifier has no accepting run")
        grid = encode_run_on_grid(grid, vrun, VERIFIER_PREFIX)

    additions: dict[str, list[tuple[int, ...]]] = {}
    declare: list[tuple[str, int]] = []

    # Slack counter: rows below the first slack row each add one.
    declare.append((SLACK_COUNTER, 1))
    additions[SLACK_COUNTER] = []
    for y in range(h):
        value = max(0, y - (h - u) + 1) if u else 0
        for x in _bits(value):
            additions[SLACK_COUNTER].append((cell(x, y),))

    # Number encodings on the initial tape, with end markers to the right.
    tape = h - 1
    for name, bits in (("n", n_bits), ("t", t_bits), ("u", u_bits)):
        declare += [(digit_relation(name), 1), (end_relation(name), 1)]
        additions[digit_relation(name)] = [(cell(x, tape),) for x in sorted(bits)]
        first_free = max(bits) + 1 if bits else 0
        additions[end_relation(name)] = [
            (cell(x, tape),) for x in range(first_free, w)
        ]

    # Width encoding: anchored on the leftmost column, carried by wires.
    declare += [(digit_relation("s"), 1), (end_relation("s"), 1), ("W", 2)]
    ds_cells: set[tuple[int, int]] = set()
    for p in range(h):
        if p in s_bits:
            ds_cells.add((0, h - 1 - p))
    wires: list[list[tuple[int, int]]] = []
    for p in range(1, s_val.bit_length()):
        path = [(x, h - 1 - p) for x in range(p + 1)]
        path += [(p, y) for y in range(h - p, h)]
        wires.append(path)
        if p in s_bits:
            ds_cells.update(path)
    additions[digit_relation("s")] = [(cell(x, y),) for x, y in sorted(ds_cells)]
    first_free = max(s_bits) + 1 if s_bits else 0
    additions[end_relation("s")] = [(cell(x, tape),) for x in range(first_free, w)]
    additions["W"] = []
    for path in wires:
        for (x1, y1), (x2, y2) in zip(path, path[1:]):
            additions["W"].append((cell(x1, y1), cell(x2, y2)))
            additions["W"].append((cell(x2, y2), cell(x1, y1)))

    layered = grid.with_additions(additions, declare=tuple(declare))

    # Extend the universe with the slack elements and tie them down.
    sig = layered.signature.extended(("P", 1), ("Q", 1), ("B", 2))
    full = Structure(n, sig)
    for name in layered.signature.names():
        for tup in layered.tuples(name):
            full.add(name, *tup)
    for i in range(u):
        extra = w * h + i
        anchor = cell(0, h - 1 - i)
        full.add("P", extra)
        full.add("Q", anchor)
        full.add("B", extra, anchor)
    return full.freeze()


@dataclass(frozen=True)
class GroupResult:
    index: int
    group_id: str
    passed: bool
    detail: str = ""
    counterexample: dict | None = None

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.counterexample}" if self.counterexample else ""
        note = f" ({self.detail})" if self.detail else ""
        return f"{status} group {self.index} {self.group_id}{note}{extra}"


def _nonslack_part(s: Structure) -> Structure:
    keep = [v for v in range(s.size) if not (s.signature.has("P") and s.holds("P", v))]
    sub, _ = s.induced(keep)
    return sub


def _decode_tape_value(s: Structure, wit, name: str) -> int:
    rel = digit_relation(name)
    if not s.signature.has(rel):
        return 0
    value = 0
    for x in range(wit.width):
        if s.holds(rel, wit.cells[(x, wit.height - 1)]):
            value |= 1 << x
    return value


def check_spectrum_axioms(
    s: Structure,
    machine: Automaton,
    tileset: Tileset,
    verifier: Automaton | None = None,
) -> list[GroupResult]:
    """Pass/fail for the nine assembled-model axiom groups."""
    results: list[GroupResult] = []

    def from_report(index: int, group: AxiomGroup, detail: str = "") -> None:
        report = check_axioms(s, group)
        failure = next((r for r in report.results if not r.passed), None)
        results.append(
            GroupResult(
                index,
                group.group_id,
                report.passed,
                detail or (f"first failure: {failure.label}" if failure else ""),
                failure.counterexample if failure else None,
            )
        )

    sub = _nonslack_part(s)
    from_report(1, axiom_group("embedded-grid", tileset=tileset))
    ok = verify_run_axioms(sub, machine, MACHINE_PREFIX)
    results.append(
        GroupResult(2, "machine-run", ok, "delegated to the run verifier")
    )
    from_report(3, axiom_group("slack-bijection"))
    from_report(4, axiom_group("slack-shape"))
    from_report(5, axiom_group("slack-counter"))
    from_report(6, axiom_group("wiring"))
    from_report(7, axiom_group("height-digits"))
    from_report(8, axiom_group("end-markers"))
    if verifier is not None:
        ok = verify_run_axioms(sub, verifier, VERIFIER_PREFIX)
        results.append(
            GroupResult(9, "size-verifier", ok, "delegated to the run verifier")
        )
    else:
        wit = recognize_grid(sub)
        if wit is None:
            results.append(
                GroupResult(9, "size-verifier", False, "non-slack part is not a grid")
            )
        else:
            n_hat = _decode_tape_value(sub, wit, "n")
            s_hat = _decode_tape_value(sub, wit, "s")
            t_hat = _decode_tape_value(sub, wit, "t")
            u_hat = _decode_tape_value(sub, wit, "u")
            slack = s.members("P") if s.signature.has("P") else ()
            slack_counter_bottom = 0
            if sub.signature.has(SLACK_COUNTER):
                for x in range(wit.width):
                    if sub.holds(SLACK_COUNTER, wit.cells[(x, wit.height - 1)]):
                        slack_counter_bottom |= 1 << x
            ok = (
                n_hat == (s_hat + 1) * (t_hat + 1) + u_hat
                and u_hat == len(slack)
                and u_hat == slack_counter_bottom
            )
            results.append(
                GroupResult(
                    9,
                    "size-verifier",
                    ok,
                    f"delegated-direct: n={n_hat} s={s_hat} t={t_hat} u={u_hat}",
                )
            )
    return results


def spectrum_report_text(results: list[GroupResult]) -> str:
    return "\n".join(r.to_text() for r in results)


def square_scheme(n: int) -> list[tuple[int, int]]:
    """Default dimension rule: t = s = floor(sqrt(n))."""
    root = isqrt(n)
    return [(root, root)] if root >= 1 else []


def spectrum_member(
    n: int,
    machine: Automaton,
    tileset: Tileset,
    verifier: Automaton | None = None,
    scheme=square_scheme,
    budget: int | None = None,
) -> bool:
    """Whether some admissible (t, s) yields a fully checked n-element model."""
    for t, s in scheme(n):
        try:
            params = derive_params(n, t, s)
        except (SlackTooLarge, Underflow):
            continue
        try:
            model = assemble_model(params, machine, tileset, verifier, budget=budget)
        except (NoAcceptingRun, TilingUnavailable, CapacityExceeded):
            continue
        results = check_spectrum_axioms(model, machine, tileset, verifier)
        if all(r.passed for r in results):
            return True
    return False


# -- exhaustive small-model enumeration --------------------------------------

_UNSET, _NOTHING = -2, -1
_R, _L, _D, _U = 0, 1, 2, 3
_PAIRS = ((_R, _D), (_R, _U), (_L, _D), (_L, _U))


class _SkeletonSearch:
    """All direction skeletons on n elements, generated up to relabeling.

    Ports are decided element by element; setting a port keeps the inverse
    port in step, which enforces partial injectivity structurally, and a
    propagation pass closes diagonal squares so geometry violations prune
    early.  Fresh labels may only be introduced in order, which cuts the
    label-permutation symmetry; exact isomorphism reduction happens later
    via canonical forms.
    """

    def __init__(self, n: int, connected: bool, budget: int | None):
        self.n = n
        self.connected = connected
        self.budget = budget
        self.nodes = 0
        self.exhausted = True
        self.ports = [[_UNSET] * n for _ in range(4)]
        self.results: list[Structure] = []

    def run(self) -> None:
        try:
            self._dfs(0, 0)
        except BudgetExceeded:
            self.exhausted = False

    # ports: _R = out-right, _L = out-left (inverse of _R), _D, _U likewise
    def _mirror(self, d: int) -> int:
        return d ^ 1

    def _set(self, x: int, d: int, y: int, trail: list) -> bool:
        cur = self.ports[d][x]
        if cur != _UNSET:
            return cur == y
        trail.append((d, x))
        self.ports[d][x] = y
        if y >= 0:
            m = self._mirror(d)
            back = self.ports[m][y]
            if back == _UNSET:
                trail.append((m, y))
                self.ports[m][y] = x
            elif back != x:
                return False
        return True

    def _propagate(self, trail: list) -> bool:
        changed = True
        while changed:
            changed = False
            for x in range(self.n):
                for h, v in _PAIRS:
                    a = self.ports[h][x]
                    b = self.ports[v][x]
                    if a < 0 or b < 0:
                        continue
                    u = self.ports[h][b]
                    w = self.ports[v][a]
                    if u == _NOTHING or w == _NOTHING:
                        return False
                    if u >= 0 and w >= 0:
                        if u != w:
                            return False
                    elif u >= 0:
                        if not self._set(a, v, u, trail):
                            return False
                        changed = True
                    elif w >= 0:
                        if not self._set(b, h, w, trail):
                            return False
                        changed = True
        return True

    def _isolated(self, x: int) -> bool:
        return all(self.ports[d][x] == _NOTHING for d in range(4))

    def _dfs(self, slot: int, seen: int) -> None:
        while slot < 4 * self.n and self.ports[slot % 4][slot // 4] != _UNSET:
            if self.connected and self.n > 1 and slot % 4 == 3:
                if self._isolated(slot // 4):
                    return
            slot += 1
        if slot == 4 * self.n:
            self._emit()
            return
        x, d = slot // 4, slot % 4
        seen = max(seen, x)
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise BudgetExceeded(self.budget)
        for y in [_NOTHING] + list(range(min(seen + 2, self.n))):
            trail: list = []
            ok = self._set(x, d, y, trail) and self._propagate(trail)
            if ok and self.connected and self.n > 1 and d == 3 and self._isolated(x):
                ok = False
            if ok:
                self._dfs(slot + 1, max(seen, y))
            for pd, px in reversed(trail):
                self.ports[pd][px] = _UNSET
        return

    def _emit(self) -> None:
        s = Structure(self.n)
        for x in range(self.n):
            r = self.ports[_R][x]
            if r >= 0:
                s.add("R", x, r)
                s.add("L", r, x)
            dn = self.ports[_D][x]
            if dn >= 0:
                s.add("D", x, dn)
                s.add("U", dn, x)
        s.freeze()
        if self.connected and not is_connected(s):
            return
        self.results.append(s)


def _counter_assignment(
    s: Structure, prev: str, lsbward: str, zero_guard: str, over_guard: str
) -> set[int] | None:
    """Smallest bit set satisfying one counter's three axioms, or None.

    Exhausts all 2^n assignments; the axioms for the two counters never
    share a relation, so checking them separately covers every combined
    assignment.
    """
    n = s.size
    if n > 22:
        raise ValueError("exhaustive counter search is limited to small universes")
    prev_s = [s.successors(prev, v) for v in range(n)]
    lsb_s = [s.successors(lsbward, v) for v in range(n)]
    zero_v = [v for v in range(n) if not s.successors(zero_guard, v)]
    over_v = [v for v in range(n) if not s.successors(over_guard, v)]
    for mask in range(1 << n):
        if any(mask >> v & 1 for v in zero_v):
            continue
        if any(mask >> v & 1 for v in over_v):
            continue
        ok = True
        for v in range(n):
            if not prev_s[v]:
                continue
            flip = (mask >> v & 1) != any(mask >> u & 1 for u in prev_s[v])
            first = not lsb_s[v]
            carry = any(
                not (mask >> m & 1) and any(mask >> w & 1 for w in prev_s[m])
                for m in lsb_s[v]
            )
            if flip != (first or carry):
                ok = False
                break
        if ok:
            return {v for v in range(n) if mask >> v & 1}
    return None


def counters_satisfiable(s: Structure) -> tuple[set[int], set[int]] | None:
    """Bit sets satisfying both counters' axioms on this skeleton, or None."""
    row = _counter_assignment(s, "U", "L", "U", "R")
    if row is None:
        return None
    col = _counter_assignment(s, "R", "D", "R", "U")
    if col is None:
        return None
    return row, col


@dataclass
class EnumerationResult:
    structures: list[Structure]
    exhaustive: bool


_ENUMERABLE = {"geometry", "counter-v", "counter-h", "tiling", "corner"}


def enumerate_models(
    groups: list[AxiomGroup],
    n: int,
    budget: int | None = None,
    connected: bool = False,
    verify: bool = False,
) -> EnumerationResult:
    """All satisfiable skeletons up to isomorphism, one witness each.

    Two phases: enumerate direction skeletons satisfying the geometry
    axioms, then decide per skeleton whether the requested unary layers
    exist (counters by exhaustive bit search, colors by the tiling
    solver).  With verify=True every returned structure is re-checked
    against the reference evaluator.
    """
    ids = [g.group_id for g in groups]
    unknown = set(ids) - _ENUMERABLE
    if unknown:
        raise MissingParam(f"enumeration does not support groups {sorted(unknown)}")
    if "geometry" not in ids:
        raise MissingParam("enumeration assumes the geometry group")
    tileset: Tileset | None = None
    for g in groups:
        if g.group_id == "tiling":
            (tileset,) = g.params

    declare: list[tuple[str, int]] = []
    if "counter-v" in ids:
        declare.append((COUNTER_ROW, 1))
    if "counter-h" in ids:
        declare.append((COUNTER_COL, 1))
    if tileset is not None:
        from .logic import color_relation

        declare += [(color_relation(t), 1) for t in tileset.tiles]

    if n == 0:
        empty = new_structure(0)
        empty = empty.with_additions({}, declare=tuple(declare))
        ok = all(evaluate(empty, nf.formula) for g in groups for nf in g.formulas)
        return EnumerationResult([empty] if ok else [], True)

    search = _SkeletonSearch(n, connected, budget)
    search.run()
    unique: dict[bytes, Structure] = {}
    for skel in search.results:
        code = canonical_form(skel)
        if code not in unique:
            unique[code] = skel

    out: list[Structure] = []
    for code in sorted(unique):
        skel = unique[code]
        if "corner" in ids:
            corners = [
                v
                for v in range(skel.size)
                if not skel.successors("L", v) and not skel.successors("U", v)
            ]
            if len(corners) != 1:
                continue
        additions: dict[str, list[tuple[int, ...]]] = {}
        if "counter-v" in ids:
            row = _counter_assignment(skel, "U", "L", "U", "R")
            if row is None:
                continue
            additions[COUNTER_ROW] = [(v,) for v in sorted(row)]
        if "counter-h" in ids:
            col = _counter_assignment(skel, "R", "D", "R", "U")
            if col is None:
                continue
            additions[COUNTER_COL] = [(v,) for v in sorted(col)]
        witness = skel.with_additions(additions, declare=tuple(declare))
        if tileset is not None:
            coloring = coloring_exists_for_structure(witness, tileset, budget=budget)
            if coloring is None:
                continue
            witness = attach_coloring(witness, tileset, coloring)
        if verify:
            for g in groups:
                for nf in g.formulas:
                    if not evaluate(witness, nf.formula):
                        raise AssertionError(
                            f"witness fails {g.group_id}/{nf.label}"
                        )
        out.append(witness)
    return EnumerationResult(out, search.exhausted)
