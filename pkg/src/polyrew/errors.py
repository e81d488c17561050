"""Exception hierarchy shared by all polyrew modules."""


class PolyError(Exception):
    """Base class for every error raised by this package."""


class CircuitError(PolyError):
    """Structural problem with a circuit: bad wiring, arity clash, cycles."""


class ParseError(PolyError):
    """Syntax error in a textual format, with source location."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class TermError(PolyError):
    """Ill-formed term, term family, or term rewriting rule."""


class RewriteError(PolyError):
    """Problem while building or applying a rewriting rule."""


class InterpError(PolyError):
    """Problem evaluating an interpretation, e.g. an operator with no entry."""


class DataFormatError(PolyError):
    """Semantic problem in a data file that parsed but does not make sense."""


class SimulationError(PolyError):
    """A step simulation could not be carried out or closed."""


class PresetError(PolyError):
    """A named preset is missing or fails its self-checks on load."""
