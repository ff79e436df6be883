"""Bundled tilesets and machines, loadable by short name."""

from importlib import resources

from ..automata import Automaton, parse_automaton
from ..tiling import Tileset, parse_tileset


def data_text(filename: str) -> str:
    return resources.files(__package__).joinpath(filename).read_text()


def load_tileset(name: str) -> Tileset:
    """Bundled tileset by name, e.g. 'jr11'."""
    return parse_tileset(data_text(f"{name}.tiles"))


def load_machine(name: str) -> Automaton:
    """Bundled machine by name, e.g. 'acceptall', 'parity', 'rule110'."""
    return parse_automaton(data_text(f"{name}.ca"))
