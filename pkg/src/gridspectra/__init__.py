"""Workbench for grid axiomatizations, Wang tilings, 1D cellular automata,
and exhaustive small-model enumeration."""

from .core import (
    GRID_SIGNATURE,
    GridWitness,
    Signature,
    Structure,
    is_connected,
    new_structure,
    partial_fn,
    recognize_grid,
    relabel,
    structure_from_text,
    structure_to_text,
)
from .logic import (
    AxiomGroup,
    CheckResult,
    Report,
    anchored_axioms,
    axiom_group,
    check_axioms,
    evaluate,
    format_formula,
    grid_axioms,
    parse_formula,
    tiled_axioms,
)
from .builder import (
    TypeHistogram,
    attach_counters,
    build_grid,
    build_hanf_cylinder,
    build_torus,
    canonical_form,
    counter_capacity_ok,
    disjoint_union,
    find_repeating_window,
    neighborhood_type,
    type_histogram,
)
from .tiling import (
    TileAssignment,
    Tileset,
    aperiodicity_report,
    coloring_exists_for_structure,
    parse_tileset,
    tile_rectangle,
    tile_torus,
)
from .automata import (
    Automaton,
    Run,
    encode_run_on_grid,
    parse_automaton,
    parse_run,
    search_accepting_run,
    simulate,
    validate_run,
    verify_run_axioms,
)
from .spectrum import (
    EnumerationResult,
    SpectrumParams,
    assemble_model,
    check_spectrum_axioms,
    counters_satisfiable,
    derive_params,
    enumerate_models,
    spectrum_member,
)

__all__ = [name for name in dir() if not name.startswith("_")]
