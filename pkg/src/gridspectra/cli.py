"""Command-line front end.

Exit codes: 0 success or a positive answer, 1 a negative answer (absent,
failed check), 2 usage or input errors, 3 exhausted search budget.
Tileset and machine arguments take a file path, or the name of a bundled
data file (jr11; acceptall, identity, rule110, parity, branch).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import builder, spectrum
from .automata import (
    encode_run_on_grid,
    format_run,
    parse_automaton,
    parse_run,
    search_accepting_run,
    validate_run,
)
from .builder import (
    attach_counters,
    build_grid,
    build_hanf_cylinder,
    build_torus,
    find_repeating_window,
    type_histogram,
)
from .core import recognize_grid, structure_from_text, structure_to_text
from .data import data_text
from .errors import BudgetExceeded, WorkbenchError
from .logic import anchored_axioms, axiom_group, check_axioms, evaluate, grid_axioms, parse_formula, tiled_axioms
from .spectrum import (
    assemble_model,
    check_spectrum_axioms,
    derive_params,
    enumerate_models,
    spectrum_member,
    spectrum_report_text,
)
from .tiling import aperiodicity_report, parse_tileset, tile_rectangle, tile_torus

_BUNDLED_SUFFIX = {"tileset": ".tiles", "machine": ".ca"}


def _load_named(kind: str, name: str) -> str:
    path = Path(name)
    if path.exists():
        return path.read_text()
    try:
        return data_text(name + _BUNDLED_SUFFIX[kind])
    except FileNotFoundError:
        raise WorkbenchError(f"no {kind} file or bundled {kind} named {name!r}") from None


def _tileset(name: str):
    return parse_tileset(_load_named("tileset", name))


def _machine(name: str):
    return parse_automaton(_load_named("machine", name))


def _structure(path: str):
    return structure_from_text(Path(path).read_text())


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _groups_for(name: str, tileset_arg: str | None):
    bundles = {"grid": grid_axioms, "tiled": tiled_axioms, "anchored": anchored_axioms}
    if name in bundles:
        if name == "grid":
            return bundles[name]()
        if tileset_arg is None:
            raise WorkbenchError(f"bundle {name!r} needs --tileset")
        return bundles[name](_tileset(tileset_arg))
    if name == "tiling":
        if tileset_arg is None:
            raise WorkbenchError("group 'tiling' needs --tileset")
        return [axiom_group("tiling", tileset=_tileset(tileset_arg))]
    return [axiom_group(name)]


def _cmd_grid(args) -> int:
    if args.grid_cmd == "build":
        s = build_torus(args.width, args.height) if args.torus else build_grid(args.width, args.height)
        if args.counters:
            s = attach_counters(s)
        _write_or_print(structure_to_text(s), args.output)
        return 0
    s = _structure(args.structure)
    wit = recognize_grid(s)
    if wit is None:
        print("not a grid")
        return 1
    print(f"grid {wit.width}x{wit.height}")
    return 0


def _cmd_check(args) -> int:
    from .logic import formula_relations

    s = _structure(args.structure)
    groups = _groups_for(args.group, args.tileset)
    needed: dict[str, int] = {}
    for group in groups:
        for nf in group.formulas:
            needed.update(formula_relations(nf.formula))
    missing = tuple(
        (rel, arity) for rel, arity in sorted(needed.items()) if not s.signature.has(rel)
    )
    if missing:
        s = s.with_additions({}, declare=missing)
    ok = True
    for group in groups:
        report = check_axioms(s, group)
        for r in report.results:
            if not r.passed or args.verbose:
                extra = f"  {r.counterexample}" if r.counterexample else ""
                print(f"{'PASS' if r.passed else 'FAIL'} {report.group_id}/{r.label}{extra}")
        ok = ok and report.passed
    print("all axioms hold" if ok else "some axioms fail")
    return 0 if ok else 1


def _cmd_eval(args) -> int:
    s = _structure(args.structure)
    value = evaluate(s, parse_formula(args.formula))
    print("true" if value else "false")
    return 0 if value else 1


def _cmd_tile(args) -> int:
    ts = _tileset(args.tileset)
    if args.tile_cmd == "report":
        survey = aperiodicity_report(ts, args.maxdim, args.budget)
        print(survey.to_text())
        print("no torus tiling up to maxdim" if survey.all_absent else "some torus tiles")
        return 0 if survey.all_absent else 1
    solve = tile_rectangle if args.tile_cmd == "rect" else tile_torus
    result = solve(ts, args.width, args.height, budget=args.budget)
    if result is None:
        print("proven absent")
        return 1
    _write_or_print(result.to_text(), args.output)
    return 0


def _cmd_ca(args) -> int:
    if args.ca_cmd == "validate":
        machine = _machine(args.machine)
        run = parse_run(Path(args.run).read_text())
        ok, violation = validate_run(machine, run)
        print("valid" if ok else f"invalid at cell {violation}")
        return 0 if ok else 1
    if args.ca_cmd == "search":
        machine = _machine(args.machine)
        symbols = args.input.split() if " " in args.input else list(args.input)
        run = search_accepting_run(machine, tuple(symbols), args.time, budget=args.budget)
        if run is None:
            print("proven absent")
            return 1
        _write_or_print(format_run(run), args.output)
        return 0
    run = parse_run(Path(args.run).read_text())
    grid = build_grid(run.space, run.time)
    encoded = encode_run_on_grid(grid, run, args.prefix)
    _write_or_print(structure_to_text(encoded), args.output)
    return 0


def _cmd_hanf(args) -> int:
    s = _structure(args.structure)
    if args.hanf_cmd == "histogram":
        hist = type_histogram(s, args.radius, args.cap)
        for code, count in sorted(hist.counts.items()):
            print(f"{count}  {code.decode()}")
        return 0
    window = find_repeating_window(s, args.radius, args.cap)
    if window is None:
        print("no repeating window")
        return 1
    if args.hanf_cmd == "window":
        print(f"window {window[0]} {window[1]}")
        return 0
    cylinder = build_hanf_cylinder(s, args.radius, args.cap, *window)
    _write_or_print(structure_to_text(cylinder), args.output)
    return 0


def _cmd_enumerate(args) -> int:
    groups = _groups_for(args.group, args.tileset)
    result = enumerate_models(
        groups, args.size, budget=args.budget, connected=args.connected
    )
    for s in result.structures:
        wit = recognize_grid(s)
        shape = f"grid {wit.width}x{wit.height}" if wit else "not grid-shaped"
        print(f"model of size {s.size}: {shape}")
        if args.verbose:
            print(structure_to_text(s))
    if not result.exhaustive:
        print("search budget exhausted: results are partial", file=sys.stderr)
        return 3
    print(f"{len(result.structures)} model(s) up to isomorphism")
    return 0 if result.structures else 1


def _cmd_spectrum(args) -> int:
    tileset = _tileset(args.tileset)
    machine = _machine(args.machine)
    verifier = _machine(args.verifier) if args.verifier else None
    if args.spectrum_cmd == "assemble":
        params = derive_params(args.size, args.time, args.space)
        model = assemble_model(params, machine, tileset, verifier, budget=args.budget)
        _write_or_print(structure_to_text(model), args.output)
        return 0
    if args.spectrum_cmd == "check":
        s = _structure(args.structure)
        results = check_spectrum_axioms(s, machine, tileset, verifier)
        print(spectrum_report_text(results))
        return 0 if all(r.passed for r in results) else 1
    member = spectrum_member(args.size, machine, tileset, verifier, budget=args.budget)
    print(f"{args.size} is {'' if member else 'not '}realized")
    return 0 if member else 1


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="gridspectra", description=__doc__)
    top.add_argument("--seed", type=int, default=0, help="seed for randomized modes (none by default)")
    top.add_argument("--threads", type=int, default=1, help="parallelism cap (current operations are sequential)")
    sub = top.add_subparsers(dest="cmd", required=True)

    grid = sub.add_parser("grid", help="build or recognize grids")
    gsub = grid.add_subparsers(dest="grid_cmd", required=True)
    gb = gsub.add_parser("build")
    gb.add_argument("-w", "--width", type=int, required=True)
    gb.add_argument("-H", "--height", type=int, required=True)
    gb.add_argument("--counters", action="store_true")
    gb.add_argument("--torus", action="store_true")
    gb.add_argument("-o", "--output")
    gr = gsub.add_parser("recognize")
    gr.add_argument("structure")

    check = sub.add_parser("check", help="run axiom groups against a structure")
    check.add_argument("-g", "--group", required=True,
                       help="grid | tiled | anchored | geometry | counter-v | counter-h | corner | tiling")
    check.add_argument("--tileset")
    check.add_argument("-v", "--verbose", action="store_true")
    check.add_argument("structure")

    ev = sub.add_parser("eval", help="evaluate a formula on a structure")
    ev.add_argument("-f", "--formula", required=True)
    ev.add_argument("structure")

    tile = sub.add_parser("tile", help="tile rectangles and tori")
    tsub = tile.add_subparsers(dest="tile_cmd", required=True)
    for name in ("rect", "torus"):
        tp = tsub.add_parser(name)
        tp.add_argument("--tileset", required=True)
        tp.add_argument("-w", "--width", type=int, required=True)
        tp.add_argument("-H", "--height", type=int, required=True)
        tp.add_argument("--budget", type=int)
        tp.add_argument("-o", "--output")
    tr = tsub.add_parser("report")
    tr.add_argument("--tileset", required=True)
    tr.add_argument("--maxdim", type=int, required=True)
    tr.add_argument("--budget", type=int)

    ca = sub.add_parser("ca", help="validate, search, and encode automaton runs")
    csub = ca.add_subparsers(dest="ca_cmd", required=True)
    cv = csub.add_parser("validate")
    cv.add_argument("--machine", required=True)
    cv.add_argument("--run", required=True)
    cs = csub.add_parser("search")
    cs.add_argument("--machine", required=True)
    cs.add_argument("--input", required=True)
    cs.add_argument("-T", "--time", type=int, required=True)
    cs.add_argument("--budget", type=int)
    cs.add_argument("-o", "--output")
    ce = csub.add_parser("encode")
    ce.add_argument("--run", required=True)
    ce.add_argument("--prefix", default="run")
    ce.add_argument("-o", "--output")

    hanf = sub.add_parser("hanf", help="neighborhood types, windows, cylinders")
    hsub = hanf.add_subparsers(dest="hanf_cmd", required=True)
    for name in ("window", "cylinder", "histogram"):
        hp = hsub.add_parser(name)
        hp.add_argument("-r", "--radius", type=int, required=True)
        hp.add_argument("-M", "--cap", type=int, required=True)
        if name == "cylinder":
            hp.add_argument("-o", "--output")
        hp.add_argument("structure")

    en = sub.add_parser("enumerate", help="all models of a bundle up to isomorphism")
    en.add_argument("-g", "--group", required=True)
    en.add_argument("-n", "--size", type=int, required=True)
    en.add_argument("--tileset")
    en.add_argument("--connected", action="store_true")
    en.add_argument("--budget", type=int)
    en.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("spectrum", help="assemble and check full-cardinality models")
    ssub = sp.add_subparsers(dest="spectrum_cmd", required=True)
    sa = ssub.add_parser("assemble")
    sa.add_argument("-n", "--size", type=int, required=True)
    sa.add_argument("-t", "--time", type=int, required=True)
    sa.add_argument("-s", "--space", type=int, required=True)
    sa.add_argument("--machine", required=True)
    sa.add_argument("--tileset", required=True)
    sa.add_argument("--verifier")
    sa.add_argument("--budget", type=int)
    sa.add_argument("-o", "--output")
    sc = ssub.add_parser("check")
    sc.add_argument("structure")
    sc.add_argument("--machine", required=True)
    sc.add_argument("--tileset", required=True)
    sc.add_argument("--verifier")
    sm = ssub.add_parser("member")
    sm.add_argument("-n", "--size", type=int, required=True)
    sm.add_argument("--machine", required=True)
    sm.add_argument("--tileset", required=True)
    sm.add_argument("--verifier")
    sm.add_argument("--budget", type=int)

    return top


_HANDLERS = {
    "grid": _cmd_grid,
    "check": _cmd_check,
    "eval": _cmd_eval,
    "tile": _cmd_tile,
    "ca": _cmd_ca,
    "hanf": _cmd_hanf,
    "enumerate": _cmd_enumerate,
    "spectrum": _cmd_spectrum,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.cmd](args)
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 3
    except (WorkbenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
