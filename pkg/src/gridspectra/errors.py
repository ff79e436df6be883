"""Exception types shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for all gridspectra errors."""


class NotFunctional(WorkbenchError):
    """A binary relation has two outgoing tuples where one was required.

    Signals a violation of the partial-injectivity axiom at a queried
    element, not a programming error.
    """


class SignatureMismatch(WorkbenchError):
    """Two structures or declarations disagree on relation names/arities."""


class UnknownRelation(WorkbenchError):
    """A relation name is not part of the structure's signature."""


class ArityError(WorkbenchError):
    """A relation was used with the wrong number of arguments."""


class StructureFormatError(WorkbenchError):
    """Malformed structure/tileset/automaton text input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormulaSyntaxError(WorkbenchError):
    """Formula DSL parse error, with position information."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class MissingParam(WorkbenchError):
    """An axiom group was requested without a parameter it needs."""


class BudgetExceeded(WorkbenchError):
    """A search ran out of its node budget before producing a proof.

    Distinct from a proven-absent answer: callers that receive this must
    not report absence.
    """

    def __init__(self, budget: int, message: str = ""):
        self.budget = budget
        super().__init__(message or f"search budget of {budget} nodes exhausted")


class GridRequired(WorkbenchError):
    """An operation needed a grid-recognizable structure."""


class DimensionMismatch(WorkbenchError):
    """Run dimensions do not match the target grid."""


class WindowInvalid(WorkbenchError):
    """The given column window does not satisfy the repetition conditions."""


class NoAcceptingRun(WorkbenchError):
    """The machine has no accepting run on the given input within bounds."""


class TilingUnavailable(WorkbenchError):
    """No valid tile coloring exists for the requested rectangle."""


class CapacityExceeded(WorkbenchError):
    """Grid dimensions exceed what the binary counters can index."""


class SlackTooLarge(WorkbenchError):
    """Cardinality parameters leave slack u >= t."""


class Underflow(WorkbenchError):
    """Cardinality parameters require t*s <= n."""
