"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when an argument falls outside an operation's physical domain."""


class NoFinitePathError(DomainError):
    """Raised when no finite path length can produce the requested attenuation."""


class CalibrationError(DomainError):
    """Raised when the calibration equations have no physical solution."""


class ScenarioError(ValueError):
    """Raised when a scenario file fails to parse or validate.

    The message names the offending section/field (and line number for
    syntax errors) so the CLI can report actionable diagnostics.
    """
