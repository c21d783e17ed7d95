"""Exception types shared across the package."""


class FdesError(Exception):
    """Base class for all package errors."""


class ParseError(FdesError):
    """Malformed model file or degree literal."""


class ModelError(FdesError):
    """Structural contract violation (dimension mismatch, bad arguments to core ops)."""


class InputError(FdesError):
    """Bad runtime input: unknown event or state names, nonsensical bounds."""


class AssumptionError(FdesError):
    """The bounded-silent-run assumption does not hold for the requested analysis.

    Carries a witness: a cycle of states connected by events that the
    reference-event projection erases, from which an erased-then-kept
    continuation exists.
    """

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness
