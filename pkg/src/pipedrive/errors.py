class InvalidSpecError(ValueError):
    """A parameter set violates a physical or geometric invariant.

    ``field`` names the offending parameter.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class InconsistentSoilError(InvalidSpecError):
    """Soil wave speeds are not ordered a > b."""


class MeshError(ValueError):
    """A mesh cannot be built for the requested parameters."""


class StabilityError(ValueError):
    """The time step exceeds an explicit-scheme stability bound."""


class DivergenceError(RuntimeError):
    """The explicit solution blew up (NaN or divergence guard exceeded)."""


class ResonanceError(ValueError):
    """Pulse frequency coincides with the pipe-soil natural frequency."""


class SchemeInconsistencyError(RuntimeError):
    """A contact-complementarity check failed during time stepping."""


class FitError(ValueError):
    """Least-squares problem is degenerate."""


class ConfigError(ValueError):
    """Configuration document is malformed."""
