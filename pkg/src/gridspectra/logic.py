"""First-order formulas over grid structures: AST, DSL, evaluator, axioms.

The evaluator is the slow reference semantics (naive quantifier expansion
over the universe).  `check_axioms` runs hand-written linear scans that
agree with the evaluator formula-by-formula on arbitrary structures; the
agreement is what the oracle-equivalence tests pin down.

DSL grammar (whitespace-insensitive):

    formula := ('forall'|'exists') IDENT '.' formula | iff
    iff     := imp ('<->' imp)*
    imp     := or ['->' or]
    or      := and ('|' and)*
    and     := lit ('&' lit)*
    lit     := '!' lit | '(' formula ')' | atom
    atom    := IDENT '(' IDENT (',' IDENT)* ')'
             | IDENT '=' IDENT
             | 'exactone' '{' IDENT (',' IDENT)* '}' '(' IDENT ')'

Variables must not shadow each other on any root-to-leaf path.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import DIRECTIONS, Structure
from .errors import (
    ArityError,
    FormulaSyntaxError,
    MissingParam,
    UnknownRelation,
)

# -- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Equal:
    left: str
    right: str


@dataclass(frozen=True)
class ExactlyOne:
    """Exactly one of the listed unary relations holds of the term."""

    rels: tuple[str, ...]
    arg: str


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Atom | Equal | ExactlyOne | Not | And | Or | Implies | Iff | Forall | Exists


# -- parser ------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op><->|->|[().,={}|&!]))"
)
_KEYWORDS = {"forall", "exists", "exactone"}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items: list[tuple[str, str, int, int]] = []
        line, col, pos = 1, 1, 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None or m.end() == pos:
                rest = text[pos:].lstrip()
                skipped = len(text[pos:]) - len(rest)
                for ch in text[pos : pos + skipped]:
                    line, col = (line + 1, 1) if ch == "\n" else (line, col + 1)
                if not rest:
                    break
                raise FormulaSyntaxError(f"unexpected character {rest[0]!r}", line, col)
            for ch in text[pos : m.start(m.lastgroup)]:
                line, col = (line + 1, 1) if ch == "\n" else (line, col + 1)
            value = m.group(m.lastgroup)
            kind = "ident" if m.lastgroup == "ident" else "op"
            self.items.append((kind, value, line, col))
            col += len(value)
            pos = m.end()
        self.i = 0

    def peek(self) -> tuple[str, str, int, int] | None:
        return self.items[self.i] if self.i < len(self.items) else None

    def next(self) -> tuple[str, str, int, int]:
        item = self.peek()
        if item is None:
            last = self.items[-1] if self.items else ("", "", 1, 1)
            raise FormulaSyntaxError("unexpected end of input", last[2], last[3])
        self.i += 1
        return item

    def expect(self, value: str) -> None:
        kind, got, line, col = self.next()
        if got != value:
            raise FormulaSyntaxError(f"expected {value!r}, found {got!r}", line, col)


def parse_formula(text: str) -> Formula:
    """Parse the DSL; rejects shadowed variables and trailing garbage."""
    toks = _Tokens(text)
    f = _parse_formula(toks, frozenset())
    extra = toks.peek()
    if extra is not None:
        raise FormulaSyntaxError(f"unexpected trailing {extra[1]!r}", extra[2], extra[3])
    return f


def _parse_formula(toks: _Tokens, bound: frozenset[str]) -> Formula:
    item = toks.peek()
    if item and item[0] == "ident" and item[1] in ("forall", "exists"):
        _, quant, line, col = toks.next()
        kind, var, vline, vcol = toks.next()
        if kind != "ident" or var in _KEYWORDS:
            raise FormulaSyntaxError("expected a variable name", vline, vcol)
        if var in bound:
            raise FormulaSyntaxError(f"variable {var!r} is already bound", vline, vcol)
        toks.expect(".")
        body = _parse_formula(toks, bound | {var})
        return (Forall if quant == "forall" else Exists)(var, body)
    return _parse_iff(toks, bound)


def _parse_iff(toks: _Tokens, bound: frozenset[str]) -> Formula:
    f = _parse_imp(toks, bound)
    while (item := toks.peek()) and item[1] == "<->":
        toks.next()
        f = Iff(f, _parse_imp(toks, bound))
    return f


def _parse_imp(toks: _Tokens, bound: frozenset[str]) -> Formula:
    f = _parse_or(toks, bound)
    if (item := toks.peek()) and item[1] == "->":
        toks.next()
        return Implies(f, _parse_or(toks, bound))
    return f


def _parse_or(toks: _Tokens, bound: frozenset[str]) -> Formula:
    parts = [_parse_and(toks, bound)]
    while (item := toks.peek()) and item[1] == "|":
        toks.next()
        parts.append(_parse_and(toks, bound))
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def _parse_and(toks: _Tokens, bound: frozenset[str]) -> Formula:
    parts = [_parse_lit(toks, bound)]
    while (item := toks.peek()) and item[1] == "&":
        toks.next()
        parts.append(_parse_lit(toks, bound))
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _parse_lit(toks: _Tokens, bound: frozenset[str]) -> Formula:
    kind, value, line, col = toks.next()
    if value == "!":
        return Not(_parse_lit(toks, bound))
    if value == "(":
        f = _parse_formula(toks, bound)
        toks.expect(")")
        return f
    if kind != "ident":
        raise FormulaSyntaxError(f"unexpected {value!r}", line, col)
    if value == "exactone":
        toks.expect("{")
        rels = [_expect_ident(toks)]
        while (item := toks.peek()) and item[1] == ",":
            toks.next()
            rels.append(_expect_ident(toks))
        toks.expect("}")
        toks.expect("(")
        arg = _expect_ident(toks)
        toks.expect(")")
        return ExactlyOne(tuple(rels), arg)
    if value in _KEYWORDS:
        raise FormulaSyntaxError(f"quantifier {value!r} needs parentheses here", line, col)
    nxt = toks.peek()
    if nxt and nxt[1] == "(":
        toks.next()
        args = [_expect_ident(toks)]
        while (item := toks.peek()) and item[1] == ",":
            toks.next()
            args.append(_expect_ident(toks))
        toks.expect(")")
        return Atom(value, tuple(args))
    if nxt and nxt[1] == "=":
        toks.next()
        return Equal(value, _expect_ident(toks))
    raise FormulaSyntaxError(f"dangling identifier {value!r}", line, col)


def _expect_ident(toks: _Tokens) -> str:
    kind, value, line, col = toks.next()
    if kind != "ident" or value in _KEYWORDS:
        raise FormulaSyntaxError("expected an identifier", line, col)
    return value


# -- printer -----------------------------------------------------------------


def format_formula(f: Formula) -> str:
    """Render back into the DSL; parse(format(f)) == f for DSL-expressible f."""
    return _fmt(f, 0)


_LEVELS = {"quant": 0, "iff": 1, "imp": 2, "or": 3, "and": 4, "lit": 5}


def _fmt(f: Formula, level: int) -> str:
    if isinstance(f, (Forall, Exists)):
        word = "forall" if isinstance(f, Forall) else "exists"
        text = f"{word} {f.var}. {_fmt(f.body, 0)}"
        mine = 0
    elif isinstance(f, Iff):
        text = f"{_fmt(f.left, 1)} <-> {_fmt(f.right, 2)}"
        mine = 1
    elif isinstance(f, Implies):
        text = f"{_fmt(f.left, 3)} -> {_fmt(f.right, 3)}"
        mine = 2
    elif isinstance(f, Or):
        text = " | ".join(_fmt(p, 4) for p in f.parts)
        mine = 3
    elif isinstance(f, And):
        text = " & ".join(_fmt(p, 5) for p in f.parts)
        mine = 4
    elif isinstance(f, Not):
        return "!" + _fmt(f.body, 5)
    elif isinstance(f, Atom):
        return f"{f.rel}({', '.join(f.args)})"
    elif isinstance(f, Equal):
        return f"{f.left} = {f.right}"
    elif isinstance(f, ExactlyOne):
        return f"exactone{{{','.join(f.rels)}}}({f.arg})"
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({text})" if mine < level else text


# -- evaluator ---------------------------------------------------------------


def evaluate(s: Structure, f: Formula) -> bool:
    """Reference truth value by naive expansion; f must be closed."""
    return _eval(s, f, {})


def _eval(s: Structure, f: Formula, env: dict[str, int]) -> bool:
    if isinstance(f, Atom):
        arity = s.signature.arity(f.rel)
        if arity != len(f.args):
            raise ArityError(
                f"relation {f.rel} expects {arity} argument(s), got {len(f.args)}"
            )
        return s.holds(f.rel, *(_lookup(env, a) for a in f.args))
    if isinstance(f, Equal):
        return _lookup(env, f.left) == _lookup(env, f.right)
    if isinstance(f, ExactlyOne):
        e = _lookup(env, f.arg)
        hits = 0
        for rel in f.rels:
            if s.signature.arity(rel) != 1:
                raise ArityError(f"relation {rel} is not unary")
            if s.holds(rel, e):
                hits += 1
        return hits == 1
    if isinstance(f, Not):
        return not _eval(s, f.body, env)
    if isinstance(f, And):
        return all(_eval(s, p, env) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval(s, p, env) for p in f.parts)
    if isinstance(f, Implies):
        return (not _eval(s, f.left, env)) or _eval(s, f.right, env)
    if isinstance(f, Iff):
        return _eval(s, f.left, env) == _eval(s, f.right, env)
    if isinstance(f, Forall):
        if f.var in env:
            raise ValueError(f"variable {f.var!r} rebound")
        for e in range(s.size):
            env[f.var] = e
            if not _eval(s, f.body, env):
                del env[f.var]
                return False
        env.pop(f.var, None)
        return True
    if isinstance(f, Exists):
        if f.var in env:
            raise ValueError(f"variable {f.var!r} rebound")
        for e in range(s.size):
            env[f.var] = e
            if _eval(s, f.body, env):
                del env[f.var]
                return True
        env.pop(f.var, None)
        return False
    raise TypeError(f"not a formula: {f!r}")


def _lookup(env: dict[str, int], name: str) -> int:
    try:
        return env[name]
    except KeyError:
        raise ValueError(f"formula is not closed: free variable {name!r}") from None


def formula_relations(f: Formula) -> dict[str, int]:
    """Relation names a formula mentions, with the arity each use implies."""
    out: dict[str, int] = {}
    stack: list[Formula] = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out[node.rel] = len(node.args)
        elif isinstance(node, ExactlyOne):
            for rel in node.rels:
                out[rel] = 1
        elif isinstance(node, Not):
            stack.append(node.body)
        elif isinstance(node, (And, Or)):
            stack.extend(node.parts)
        elif isinstance(node, (Implies, Iff)):
            stack.extend((node.left, node.right))
        elif isinstance(node, (Forall, Exists)):
            stack.append(node.body)
    return out


def relativize(f: Formula, guard_rel: str) -> Formula:
    """Restrict every quantifier to elements outside the guard relation."""
    if isinstance(f, Forall):
        return Forall(
            f.var, Implies(Not(Atom(guard_rel, (f.var,))), relativize(f.body, guard_rel))
        )
    if isinstance(f, Exists):
        return Exists(
            f.var, And((Not(Atom(guard_rel, (f.var,))), relativize(f.body, guard_rel)))
        )
    if isinstance(f, Not):
        return Not(relativize(f.body, guard_rel))
    if isinstance(f, And):
        return And(tuple(relativize(p, guard_rel) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(relativize(p, guard_rel) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(relativize(f.left, guard_rel), relativize(f.right, guard_rel))
    if isinstance(f, Iff):
        return Iff(relativize(f.left, guard_rel), relativize(f.right, guard_rel))
    return f


# -- axiom catalog -----------------------------------------------------------


@dataclass(frozen=True)
class NamedFormula:
    label: str
    formula: Formula


@dataclass(frozen=True)
class AxiomGroup:
    """A closed, finite list of labeled formulas checked together."""

    group_id: str
    formulas: tuple[NamedFormula, ...]
    params: tuple = ()

    def labels(self) -> tuple[str, ...]:
        return tuple(nf.label for nf in self.formulas)


def _no_succ(rel: str, var: str, aux: str) -> Formula:
    return Not(Exists(aux, Atom(rel, (var, aux))))


def _geometry_group() -> AxiomGroup:
    formulas: list[NamedFormula] = []
    for x in DIRECTIONS:
        formulas.append(
            NamedFormula(
                f"injective-{x}",
                parse_formula(
                    f"forall a. forall b. forall c. ({x}(a,b) & {x}(a,c)) -> b = c"
                ),
            )
        )
    formulas.append(
        NamedFormula(
            "inverse-RL",
            parse_formula("forall a. forall b. (R(a,b) <-> L(b,a))"),
        )
    )
    formulas.append(
        NamedFormula(
            "inverse-UD",
            parse_formula("forall a. forall b. (U(a,b) <-> D(b,a))"),
        )
    )
    for hor in ("L", "R"):
        for ver in ("U", "D"):
            formulas.append(
                NamedFormula(
                    f"commute-{hor}{ver}",
                    parse_formula(
                        f"forall a. forall b. forall c. "
                        f"(({hor}(a,b) & {ver}(a,c)) -> "
                        f"(exists d. ({hor}(c,d) & {ver}(b,d))))"
                    ),
                )
            )
    return AxiomGroup("geometry", tuple(formulas))


def _counter_formulas(
    bit: str, prev: str, lsbward: str, zero_guard: str, over_guard: str,
    gate: str | None = None,
) -> tuple[NamedFormula, NamedFormula, NamedFormula]:
    """Zero / increment / overflow axioms for one little-endian counter.

    `prev` points at the cell holding the previous value's bit, `lsbward`
    at the within-number neighbor on the less significant side.  A bit
    flips relative to the previous value exactly when it is the least
    significant bit (optionally gated by a unary relation) or its less
    significant neighbor flipped from 1 to 0.
    """
    zero = Forall("a", Implies(_no_succ(zero_guard, "a", "b"), Not(Atom(bit, ("a",)))))
    first: Formula = _no_succ(lsbward, "a", "l")
    if gate is not None:
        first = And((first, Atom(gate, ("a",))))
    carry = Exists(
        "m",
        And(
            (
                Atom(lsbward, ("a", "m")),
                Not(Atom(bit, ("m",))),
                Exists("w", And((Atom(prev, ("m", "w")), Atom(bit, ("w",))))),
            )
        ),
    )
    flip = Not(
        Iff(
            Atom(bit, ("a",)),
            Exists("u", And((Atom(prev, ("a", "u")), Atom(bit, ("u",))))),
        )
    )
    inc = Forall(
        "a",
        Implies(
            Exists("g", Atom(prev, ("a", "g"))),
            Iff(flip, Or((first, carry))),
        ),
    )
    over = Forall("a", Implies(_no_succ(over_guard, "a", "b"), Not(Atom(bit, ("a",)))))
    return (
        NamedFormula("zero", zero),
        NamedFormula("increment", inc),
        NamedFormula("overflow", over),
    )


def _counter_row_group() -> AxiomGroup:
    return AxiomGroup("counter-v", _counter_formulas("B_V", "U", "L", "U", "R"))


def _counter_col_group() -> AxiomGroup:
    return AxiomGroup("counter-h", _counter_formulas("B_H", "R", "D", "R", "U"))


def _corner_group() -> AxiomGroup:
    unique_corner = parse_formula(
        "exists a. ((!(exists p. L(a,p))) & (!(exists q. U(a,q))) & "
        "(forall b. (((!(exists r. L(b,r))) & (!(exists s. U(b,s)))) -> b = a)))"
    )
    return AxiomGroup("corner", (NamedFormula("unique-corner", unique_corner),))


def color_relation(tile: str) -> str:
    return f"C_{tile}"


def _tiling_group(tileset) -> AxiomGroup:
    colors = tuple(color_relation(t) for t in tileset.tiles)
    formulas = [NamedFormula("full", Forall("a", ExactlyOne(colors, "a")))]
    for kind, rel, compat in (("R", "R", tileset.hrel), ("D", "D", tileset.vrel)):
        for t1 in tileset.tiles:
            for t2 in tileset.tiles:
                if (t1, t2) in compat:
                    continue
                body = Exists(
                    "a",
                    And(
                        (
                            Atom(color_relation(t1), ("a",)),
                            Exists(
                                "b",
                                And(
                                    (
                                        Atom(rel, ("a", "b")),
                                        Atom(color_relation(t2), ("b",)),
                                    )
                                ),
                            ),
                        )
                    ),
                )
                formulas.append(NamedFormula(f"compat-{kind}-{t1}-{t2}", Not(body)))
    return AxiomGroup("tiling", tuple(formulas), params=(tileset,))


# assembled-model groups -----------------------------------------------------

ENCODED_NUMBERS = ("n", "s", "t", "u")


def digit_relation(name: str) -> str:
    return f"D_{name}"


def end_relation(name: str) -> str:
    return f"E_{name}"


def symbol_relation(prefix: str, symbol: str) -> str:
    return f"{prefix}.{symbol}"


def _embedded_grid_group(tileset) -> AxiomGroup:
    formulas = []
    for group in anchored_axioms(tileset):
        for nf in group.formulas:
            formulas.append(
                NamedFormula(
                    f"{group.group_id}/{nf.label}", relativize(nf.formula, "P")
                )
            )
    return AxiomGroup("embedded-grid", tuple(formulas), params=(tileset,))


def _machine_run_group(machine, prefix: str, guard: str | None = None) -> AxiomGroup:
    """Local validity, full symbol coverage, and acceptance for a run.

    Time flows upward: the cell above holds the next-step symbol, and a
    missing left/right neighbor reads as the boundary symbol.
    """
    syms = tuple(symbol_relation(prefix, a) for a in machine.alphabet)
    cover: Formula = Forall("a", ExactlyOne(syms, "a"))
    if guard is not None:
        cover = relativize(cover, guard)
    formulas = [NamedFormula("symbols", cover)]

    def side_ctx(var: str, rel: str, sym: str, aux: str) -> Formula:
        if sym == machine.boundary:
            return _no_succ(rel, var, aux)
        return Exists(
            aux, And((Atom(rel, (var, aux)), Atom(symbol_relation(prefix, sym), (aux,))))
        )

    extended = machine.alphabet + (machine.boundary,)
    for left in extended:
        for mid in machine.alphabet:
            for right in extended:
                for nxt in machine.alphabet:
                    if (left, mid, right, nxt) in machine.rules:
                        continue
                    bad = Exists(
                        "a",
                        And(
                            (
                                Atom(symbol_relation(prefix, mid), ("a",)),
                                Exists(
                                    "b",
                                    And(
                                        (
                                            Atom("U", ("a", "b")),
                                            Atom(symbol_relation(prefix, nxt), ("b",)),
                                        )
                                    ),
                                ),
                                side_ctx("a", "L", left, "p"),
                                side_ctx("a", "R", right, "q"),
                            )
                        ),
                    )
                    formulas.append(
                        NamedFormula(f"step-{left}-{mid}-{right}-{nxt}", Not(bad))
                    )
    formulas.append(
        NamedFormula(
            "accepts",
            Exists("a", Atom(symbol_relation(prefix, machine.final), ("a",))),
        )
    )
    return AxiomGroup("machine-run", tuple(formulas), params=(machine, prefix, guard))


def _slack_bijection_group() -> AxiomGroup:
    return AxiomGroup(
        "slack-bijection",
        (
            NamedFormula(
                "domain",
                parse_formula("forall a. forall b. B(a,b) -> (P(a) & Q(b))"),
            ),
            NamedFormula("total", parse_formula("forall a. P(a) -> (exists b. B(a,b))")),
            NamedFormula(
                "functional",
                parse_formula(
                    "forall a. forall b. forall c. (B(a,b) & B(a,c)) -> b = c"
                ),
            ),
            NamedFormula("onto", parse_formula("forall b. Q(b) -> (exists a. B(a,b))")),
            NamedFormula(
                "injective",
                parse_formula(
                    "forall a. forall b. forall c. (B(a,c) & B(b,c)) -> a = b"
                ),
            ),
        ),
    )


def _slack_shape_group() -> AxiomGroup:
    return AxiomGroup(
        "slack-shape",
        (
            NamedFormula("not-extra", parse_formula("forall a. Q(a) -> !P(a)")),
            NamedFormula(
                "leftmost", parse_formula("forall a. Q(a) -> !(exists b. L(a,b))")
            ),
            NamedFormula(
                "down-closed",
                parse_formula("forall a. forall b. (Q(a) & D(a,b)) -> Q(b)"),
            ),
        ),
    )


def _slack_counter_group() -> AxiomGroup:
    return AxiomGroup(
        "slack-counter", _counter_formulas("B_U", "U", "L", "U", "R", gate="Q")
    )


def _wire_link(var: str, rel: str, aux: str) -> Formula:
    return Exists(aux, And((Atom(rel, (var, aux)), Atom("W", (var, aux)))))


def _wiring_case(var: str, case: str, aux_base: str) -> Formula:
    """One of the allowed wire-joint shapes at a vertex."""
    links = {
        d: _wire_link(var, d, f"{aux_base}{d.lower()}") for d in DIRECTIONS
    }
    no = {d: Not(links[d]) for d in DIRECTIONS}
    if case == "a":
        return And(
            (links["R"], no["L"], no["U"], no["D"], _no_succ("L", var, f"{aux_base}n"))
        )
    if case == "b":
        return And((links["L"], links["R"], no["U"], no["D"]))
    if case == "c":
        return And((links["L"], links["D"], no["R"], no["U"]))
    if case == "d":
        return And((links["U"], links["D"], no["L"], no["R"]))
    if case == "e":
        return And(
            (links["U"], no["L"], no["R"], no["D"], _no_succ("D", var, f"{aux_base}n"))
        )
    return And((no["L"], no["R"], no["U"], no["D"]))


def _wiring_group() -> AxiomGroup:
    ds = digit_relation("s")
    carries = Forall(
        "a",
        Forall(
            "b",
            Implies(And((Atom("W", ("a", "b")), Atom(ds, ("a",)))), Atom(ds, ("b",))),
        ),
    )
    symmetric = parse_formula("forall a. forall b. W(a,b) -> W(b,a)")
    on_edges = parse_formula(
        "forall a. forall b. W(a,b) -> (L(a,b) | R(a,b) | U(a,b) | D(a,b))"
    )
    cases = Forall(
        "a", Or(tuple(_wiring_case("a", c, f"x{c}") for c in "abcdef"))
    )
    corner_bl = And((_no_succ("L", "l", "p1"), _no_succ("D", "l", "p2")))
    staircase = Forall(
        "a",
        Implies(
            _wiring_case("a", "c", "y"),
            Exists(
                "d",
                And(
                    (
                        Atom("D", ("a", "d")),
                        Exists(
                            "l",
                            And(
                                (
                                    Atom("L", ("d", "l")),
                                    Or((_wiring_case("l", "c", "z"), corner_bl)),
                                )
                            ),
                        ),
                    )
                ),
            ),
        ),
    )
    anchor = Forall(
        "a",
        Implies(
            _no_succ("L", "a", "b"),
            Iff(Atom(ds, ("a",)), Atom("B_H", ("a",))),
        ),
    )
    source = Forall(
        "a",
        Implies(
            And(
                (
                    _no_succ("L", "a", "b"),
                    Atom(ds, ("a",)),
                    Exists("c", Atom("D", ("a", "c"))),
                )
            ),
            _wiring_case("a", "a", "w"),
        ),
    )
    return AxiomGroup(
        "wiring",
        (
            NamedFormula("carries-digits", carries),
            NamedFormula("symmetric", symmetric),
            NamedFormula("on-grid-edges", on_edges),
            NamedFormula("joint-shapes", cases),
            NamedFormula("staircase", staircase),
            NamedFormula("column-anchor", anchor),
            NamedFormula("wire-source", source),
        ),
    )


def _height_digits_group() -> AxiomGroup:
    dt = digit_relation("t")
    f = Forall(
        "a",
        Iff(
            Atom(dt, ("a",)),
            And((Atom("B_V", ("a",)), _no_succ("D", "a", "b"))),
        ),
    )
    return AxiomGroup("height-digits", (NamedFormula("bottom-row-copy", f),))


def _end_markers_group() -> AxiomGroup:
    formulas = []
    for name in ENCODED_NUMBERS:
        ea, da = end_relation(name), digit_relation(name)
        f = Forall(
            "a",
            Implies(
                Atom(ea, ("a",)),
                And(
                    (
                        Not(Atom(da, ("a",))),
                        Forall("b", Implies(Atom("R", ("a", "b")), Atom(ea, ("b",)))),
                    )
                ),
            ),
        )
        formulas.append(NamedFormula(f"marker-{name}", f))
    return AxiomGroup("end-markers", tuple(formulas))


def axiom_group(group_id: str, tileset=None, machine=None, prefix: str = "run",
                guard: str | None = None) -> AxiomGroup:
    """Construct one axiom group by name.

    Groups: geometry, counter-v (row-index counter), counter-h
    (column-index counter), corner, tiling, embedded-grid, machine-run,
    slack-bijection, slack-shape, slack-counter, wiring, height-digits,
    end-markers.
    """
    if group_id == "geometry":
        return _geometry_group()
    if group_id == "counter-v":
        return _counter_row_group()
    if group_id == "counter-h":
        return _counter_col_group()
    if group_id == "corner":
        return _corner_group()
    if group_id == "tiling":
        if tileset is None:
            raise MissingParam("tiling group needs a tileset")
        return _tiling_group(tileset)
    if group_id == "embedded-grid":
        if tileset is None:
            raise MissingParam("embedded-grid group needs a tileset")
        return _embedded_grid_group(tileset)
    if group_id == "machine-run":
        if machine is None:
            raise MissingParam("machine-run group needs an automaton")
        return _machine_run_group(machine, prefix, guard)
    if group_id == "slack-bijection":
        return _slack_bijection_group()
    if group_id == "slack-shape":
        return _slack_shape_group()
    if group_id == "slack-counter":
        return _slack_counter_group()
    if group_id == "wiring":
        return _wiring_group()
    if group_id == "height-digits":
        return _height_digits_group()
    if group_id == "end-markers":
        return _end_markers_group()
    raise MissingParam(f"unknown axiom group {group_id!r}")


def grid_axioms() -> list[AxiomGroup]:
    """Geometry plus both index counters."""
    return [axiom_group("geometry"), axiom_group("counter-v"), axiom_group("counter-h")]


def tiled_axioms(tileset) -> list[AxiomGroup]:
    """Grid axioms plus the tile-coloring constraints."""
    return grid_axioms() + [axiom_group("tiling", tileset=tileset)]


def anchored_axioms(tileset) -> list[AxiomGroup]:
    """Tiled axioms plus the unique-corner anchor."""
    return tiled_axioms(tileset) + [axiom_group("corner")]


# -- report ------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    label: str
    passed: bool
    counterexample: dict[str, int] | None = None
    note: str = ""


@dataclass(frozen=True)
class Report:
    group_id: str
    results: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(r for r in self.results if not r.passed)

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            extra = f"  {r.counterexample}" if r.counterexample else ""
            lines.append(f"{status} {self.group_id}/{r.label}{extra}")
        return "\n".join(lines)


# -- direct checkers ---------------------------------------------------------
#
# Each checker mirrors the boolean structure of the corresponding formula
# with set lookups instead of quantifier loops, so it agrees with
# `evaluate` on arbitrary structures, including garbage ones.


def check_axioms(s: Structure, group: AxiomGroup) -> Report:
    checker = _CHECKERS.get(group.group_id)
    if checker is None:
        # No specialized scan; fall back to the reference evaluator.
        results = tuple(
            CheckResult(nf.label, evaluate(s, nf.formula), note="via evaluator")
            for nf in group.formulas
        )
        return Report(group.group_id, results)
    return Report(group.group_id, tuple(checker(s, group)))


def check_all(s: Structure, groups: list[AxiomGroup]) -> list[Report]:
    return [check_axioms(s, g) for g in groups]


def all_passed(reports: list[Report]) -> bool:
    return all(r.passed for r in reports)


def _check_geometry(s: Structure, group: AxiomGroup):
    results = []
    for d in DIRECTIONS:
        cex = None
        for v in range(s.size):
            succ = s.successors(d, v)
            if len(succ) > 1:
                cex = {"a": v, "b": succ[0], "c": succ[1]}
                break
        results.append(CheckResult(f"injective-{d}", cex is None, cex))
    for label, fwd, bwd in (("inverse-RL", "R", "L"), ("inverse-UD", "U", "D")):
        cex = None
        for a, b in s.tuples(fwd):
            if not s.holds(bwd, b, a):
                cex = {"a": a, "b": b}
                break
        if cex is None:
            for b, a in s.tuples(bwd):
                if not s.holds(fwd, a, b):
                    cex = {"a": a, "b": b}
                    break
        results.append(CheckResult(label, cex is None, cex))
    for hor in ("L", "R"):
        for ver in ("U", "D"):
            cex = None
            for a, b in s.tuples(hor):
                for c in s.successors(ver, a):
                    if not (set(s.successors(hor, c)) & set(s.successors(ver, b))):
                        cex = {"a": a, "b": b, "c": c}
                        break
                if cex:
                    break
            results.append(CheckResult(f"commute-{hor}{ver}", cex is None, cex))
    return results


def _guard_fail(s: Structure, bit: str, guard_rel: str):
    for v in range(s.size):
        if not s.successors(guard_rel, v) and s.holds(bit, v):
            return {"a": v}
    return None


def _check_counter(
    s: Structure, bit: str, prev: str, lsbward: str, zero_guard: str,
    over_guard: str, gate: str | None = None,
):
    results = [CheckResult("zero", (cex := _guard_fail(s, bit, zero_guard)) is None, cex)]
    cex = None
    for v in range(s.size):
        prevs = s.successors(prev, v)
        if not prevs:
            continue
        flip = s.holds(bit, v) != any(s.holds(bit, u) for u in prevs)
        lsbs = s.successors(lsbward, v)
        first = not lsbs
        if gate is not None:
            first = first and s.holds(gate, v)
        carry = any(
            not s.holds(bit, m) and any(s.holds(bit, w) for w in s.successors(prev, m))
            for m in lsbs
        )
        if flip != (first or carry):
            cex = {"a": v}
            break
    results.append(CheckResult("increment", cex is None, cex))
    cex = _guard_fail(s, bit, over_guard)
    results.append(CheckResult("overflow", cex is None, cex))
    return results


def _check_counter_row(s: Structure, group: AxiomGroup):
    return _check_counter(s, "B_V", "U", "L", "U", "R")


def _check_counter_col(s: Structure, group: AxiomGroup):
    return _check_counter(s, "B_H", "R", "D", "R", "U")


def _check_slack_counter(s: Structure, group: AxiomGroup):
    return _check_counter(s, "B_U", "U", "L", "U", "R", gate="Q")


def _check_corner(s: Structure, group: AxiomGroup):
    corners = [
        v
        for v in range(s.size)
        if not s.successors("L", v) and not s.successors("U", v)
    ]
    ok = len(corners) == 1
    cex = None if ok else {"corners": len(corners)}
    return [CheckResult("unique-corner", ok, cex)]


def _check_tiling(s: Structure, group: AxiomGroup):
    (tileset,) = group.params
    colors = {t: color_relation(t) for t in tileset.tiles}
    results = []
    cex = None
    for v in range(s.size):
        hits = sum(1 for t in tileset.tiles if s.holds(colors[t], v))
        if hits != 1:
            cex = {"a": v, "colors": hits}
            break
    results.append(CheckResult("full", cex is None, cex))
    for kind, rel, compat in (("R", "R", tileset.hrel), ("D", "D", tileset.vrel)):
        violated: dict[tuple[str, str], dict[str, int]] = {}
        for a, b in s.tuples(rel):
            for t1 in tileset.tiles:
                if not s.holds(colors[t1], a):
                    continue
                for t2 in tileset.tiles:
                    if (t1, t2) not in compat and s.holds(colors[t2], b):
                        violated.setdefault((t1, t2), {"a": a, "b": b})
        for t1 in tileset.tiles:
            for t2 in tileset.tiles:
                if (t1, t2) in compat:
                    continue
                cex = violated.get((t1, t2))
                results.append(CheckResult(f"compat-{kind}-{t1}-{t2}", cex is None, cex))
    return results


def _check_embedded_grid(s: Structure, group: AxiomGroup):
    (tileset,) = group.params
    if s.signature.has("P"):
        keep = [v for v in range(s.size) if not s.holds("P", v)]
    else:
        keep = list(range(s.size))
    sub, old_of_new = s.induced(keep)
    results = []
    for g in anchored_axioms(tileset):
        for res in check_axioms(sub, g).results:
            cex = None
            if res.counterexample is not None:
                cex = {
                    k: (old_of_new[v] if k in ("a", "b", "c") else v)
                    for k, v in res.counterexample.items()
                }
            results.append(CheckResult(f"{g.group_id}/{res.label}", res.passed, cex))
    return results


def _check_machine_run(s: Structure, group: AxiomGroup):
    machine, prefix, guard = group.params
    syms = {a: symbol_relation(prefix, a) for a in machine.alphabet}
    results = []
    cex = None
    for v in range(s.size):
        if guard is not None and s.signature.has(guard) and s.holds(guard, v):
            continue
        hits = sum(1 for rel in syms.values() if s.holds(rel, v))
        if hits != 1:
            cex = {"a": v, "symbols": hits}
            break
    results.append(CheckResult("symbols", cex is None, cex))

    def side_syms(v: int, rel: str) -> set[str]:
        out = set()
        neighbors = s.successors(rel, v)
        if not neighbors:
            out.add(machine.boundary)
        for u in neighbors:
            for a, srel in syms.items():
                if s.holds(srel, u):
                    out.add(a)
        return out

    violated: dict[tuple[str, str, str, str], dict[str, int]] = {}
    for v, u in s.tuples("U"):
        mids = [a for a, srel in syms.items() if s.holds(srel, v)]
        nxts = [a for a, srel in syms.items() if s.holds(srel, u)]
        if not mids or not nxts:
            continue
        lefts = side_syms(v, "L")
        rights = side_syms(v, "R")
        for mid in mids:
            for nxt in nxts:
                for left in lefts:
                    for right in rights:
                        quad = (left, mid, right, nxt)
                        if quad not in machine.rules:
                            violated.setdefault(quad, {"a": v, "b": u})
    extended = machine.alphabet + (machine.boundary,)
    for left in extended:
        for mid in machine.alphabet:
            for right in extended:
                for nxt in machine.alphabet:
                    if (left, mid, right, nxt) in machine.rules:
                        continue
                    cex = violated.get((left, mid, right, nxt))
                    results.append(
                        CheckResult(f"step-{left}-{mid}-{right}-{nxt}", cex is None, cex)
                    )
    accept = any(s.holds(syms[machine.final], v) for v in range(s.size))
    results.append(CheckResult("accepts", accept, None))
    return results


def _check_slack_bijection(s: Structure, group: AxiomGroup):
    results = []
    cex = None
    for a, b in s.tuples("B"):
        if not (s.holds("P", a) and s.holds("Q", b)):
            cex = {"a": a, "b": b}
            break
    results.append(CheckResult("domain", cex is None, cex))
    cex = None
    for a in range(s.size):
        if s.holds("P", a) and not s.successors("B", a):
            cex = {"a": a}
            break
    results.append(CheckResult("total", cex is None, cex))
    cex = None
    for a in range(s.size):
        succ = s.successors("B", a)
        if len(succ) > 1:
            cex = {"a": a, "b": succ[0], "c": succ[1]}
            break
    results.append(CheckResult("functional", cex is None, cex))
    cex = None
    for b in range(s.size):
        if s.holds("Q", b) and not s.predecessors("B", b):
            cex = {"b": b}
            break
    results.append(CheckResult("onto", cex is None, cex))
    cex = None
    for b in range(s.size):
        pred = s.predecessors("B", b)
        if len(pred) > 1:
            cex = {"a": pred[0], "b": pred[1], "c": b}
            break
    results.append(CheckResult("injective", cex is None, cex))
    return results


def _check_slack_shape(s: Structure, group: AxiomGroup):
    results = []
    cex = None
    for a in range(s.size):
        if s.holds("Q", a) and s.holds("P", a):
            cex = {"a": a}
            break
    results.append(CheckResult("not-extra", cex is None, cex))
    cex = None
    for a in range(s.size):
        if s.holds("Q", a) and s.successors("L", a):
            cex = {"a": a}
            break
    results.append(CheckResult("leftmost", cex is None, cex))
    cex = None
    for a in range(s.size):
        if s.holds("Q", a):
            for b in s.successors("D", a):
                if not s.holds("Q", b):
                    cex = {"a": a, "b": b}
                    break
        if cex:
            break
    results.append(CheckResult("down-closed", cex is None, cex))
    return results


def _wire_links(s: Structure, v: int) -> dict[str, bool]:
    return {
        d: any(s.holds("W", v, u) for u in s.successors(d, v)) for d in DIRECTIONS
    }


def _joint_case(s: Structure, v: int) -> str | None:
    """Which allowed joint shape v matches, or None."""
    links = _wire_links(s, v)
    pattern = tuple(links[d] for d in ("L", "R", "U", "D"))
    if pattern == (False, True, False, False) and not s.successors("L", v):
        return "a"
    if pattern == (True, True, False, False):
        return "b"
    if pattern == (True, False, False, True):
        return "c"
    if pattern == (False, False, True, True):
        return "d"
    if pattern == (False, False, True, False) and not s.successors("D", v):
        return "e"
    if pattern == (False, False, False, False):
        return "f"
    return None


def _check_wiring(s: Structure, group: AxiomGroup):
    ds = digit_relation("s")
    has_ds = s.signature.has(ds)
    holds_ds = (lambda v: s.holds(ds, v)) if has_ds else (lambda v: False)
    results = []
    cex = None
    for a, b in s.tuples("W"):
        if holds_ds(a) and not holds_ds(b):
            cex = {"a": a, "b": b}
            break
    results.append(CheckResult("carries-digits", cex is None, cex))
    cex = None
    for a, b in s.tuples("W"):
        if not s.holds("W", b, a):
            cex = {"a": a, "b": b}
            break
    results.append(CheckResult("symmetric", cex is None, cex))
    cex = None
    for a, b in s.tuples("W"):
        if not any(s.holds(d, a, b) for d in DIRECTIONS):
            cex = {"a": a, "b": b}
            break
    results.append(CheckResult("on-grid-edges", cex is None, cex))
    cex = None
    for v in range(s.size):
        if _joint_case(s, v) is None:
            cex = {"a": v}
            break
    results.append(CheckResult("joint-shapes", cex is None, cex))
    cex = None
    for v in range(s.size):
        if _joint_case(s, v) != "c":
            continue
        ok = False
        for d in s.successors("D", v):
            for l in s.successors("L", d):
                if _joint_case(s, l) == "c" or (
                    not s.successors("L", l) and not s.successors("D", l)
                ):
                    ok = True
        if not ok:
            cex = {"a": v}
            break
    results.append(CheckResult("staircase", cex is None, cex))
    cex = None
    has_bh = s.signature.has("B_H")
    for v in range(s.size):
        if not s.successors("L", v):
            bh = s.holds("B_H", v) if has_bh else False
            if holds_ds(v) != bh:
                cex = {"a": v}
                break
    results.append(CheckResult("column-anchor", cex is None, cex))
    cex = None
    for v in range(s.size):
        if (
            not s.successors("L", v)
            and holds_ds(v)
            and s.successors("D", v)
            and _joint_case(s, v) != "a"
        ):
            cex = {"a": v}
            break
    results.append(CheckResult("wire-source", cex is None, cex))
    return results


def _check_height_digits(s: Structure, group: AxiomGroup):
    dt = digit_relation("t")
    has_dt = s.signature.has(dt)
    has_bv = s.signature.has("B_V")
    cex = None
    for v in range(s.size):
        left = s.holds(dt, v) if has_dt else False
        right = (s.holds("B_V", v) if has_bv else False) and not s.successors("D", v)
        if left != right:
            cex = {"a": v}
            break
    return [CheckResult("bottom-row-copy", cex is None, cex)]


def _check_end_markers(s: Structure, group: AxiomGroup):
    results = []
    for name in ENCODED_NUMBERS:
        ea, da = end_relation(name), digit_relation(name)
        has_ea, has_da = s.signature.has(ea), s.signature.has(da)
        cex = None
        for v in range(s.size):
            if not (has_ea and s.holds(ea, v)):
                continue
            if has_da and s.holds(da, v):
                cex = {"a": v}
                break
            bad = next((w for w in s.successors("R", v) if not s.holds(ea, w)), None)
            if bad is not None:
                cex = {"a": v, "b": bad}
                break
        results.append(CheckResult(f"marker-{name}", cex is None, cex))
    return results


_CHECKERS = {
    "geometry": _check_geometry,
    "counter-v": _check_counter_row,
    "counter-h": _check_counter_col,
    "corner": _check_corner,
    "tiling": _check_tiling,
    "embedded-grid": _check_embedded_grid,
    "machine-run": _check_machine_run,
    "slack-bijection": _check_slack_bijection,
    "slack-shape": _check_slack_shape,
    "slack-counter": _check_slack_counter,
    "wiring": _check_wiring,
    "height-digits": _check_height_digits,
    "end-markers": _check_end_markers,
}
