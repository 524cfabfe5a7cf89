"""Exception hierarchy; the CLI maps these to exit codes."""


class GeometryError(ValueError):
    """Input geometry violates a precondition (exit code 2)."""


class AdmissibilityError(GeometryError):
    """An affine function is not positive on the polytope."""


class PropernessError(GeometryError):
    """The origin is not an interior point, so the soliton potential is not proper."""


class ReebConeError(GeometryError):
    """A Reeb vector lies on or outside the Reeb cone."""


class ConvergenceError(RuntimeError):
    """A solver exhausted its budget (exit code 3)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
