"""Exception types shared across the package."""


class InvalidGridError(ValueError):
    """Grid resolution or box size violates the grid constraints."""


class ZeroModeError(ValueError):
    """An operator with a singular zero-mode multiplier got nonzero mean content."""


class DecompositionError(ValueError):
    """A field expected to be +helical is not, beyond tolerance."""


class DivergenceError(FloatingPointError):
    """Non-finite values appeared while time stepping.

    Attributes
    ----------
    t_last_good : float
        Time of the last state that was still finite.
    trajectory : list
        Output samples collected before the failure.
    """

    def __init__(self, message, t_last_good=0.0, trajectory=None):
        super().__init__(message)
        self.t_last_good = t_last_good
        self.trajectory = trajectory if trajectory is not None else []


class GridTooLargeError(ValueError):
    """The O(N^6) direct evaluator refuses grids above its size limit."""


class DomainError(ValueError):
    """Argument lies outside the domain where a formula is defined."""


class ConfinementError(ValueError):
    """Axisymmetric profile does not decay inside the radial domain."""


class AssemblyError(FloatingPointError):
    """A term of an assembled right-hand side became non-finite.

    Attributes
    ----------
    term : int
        One-based index of the offending term.
    """

    def __init__(self, message, term):
        super().__init__(message)
        self.term = term


class ConstraintError(ValueError):
    """Input violates a parity or structural constraint."""


class ScalingError(ValueError):
    """Rescaled spectrum does not fit into the target grid."""


class StationarySolverError(RuntimeError):
    """The stationary solver hit a non-finite or non-confined iterate."""


class InsufficientDataError(ValueError):
    """A trajectory diagnostic needs more samples than were given."""


class ConfigError(ValueError):
    """Configuration text failed validation.

    Attributes
    ----------
    errors : list of str
        Every problem found, each with a line reference where available.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class SnapshotError(ValueError):
    """Base class for snapshot read failures."""


class SnapshotFormatError(SnapshotError):
    """Bad magic bytes or unreadable header."""


class SnapshotTruncatedError(SnapshotError):
    """Payload shorter than the header promises."""

    def __init__(self, expected, actual):
        self.expected = expected
        self.actual = actual
        super().__init__(f"truncated snapshot payload: expected {expected} bytes, got {actual}")


class SnapshotKindError(SnapshotError):
    """Snapshot holds a different kind of field than requested."""
