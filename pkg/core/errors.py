class QMomentsError(Exception):
    """Base class for every error raised by the qmoments core."""


class ModelError(QMomentsError, ValueError):
    """Oscillator parameters violate the model invariants."""


class DomainError(QMomentsError, ArithmeticError):
    """The stiffness factor X dropped to zero or below."""

    def __init__(self, message: str, x: float | None = None, q: float | None = None):
        super().__init__(message)
        self.x = x
        self.q = q


class RangeError(QMomentsError, ValueError):
    """An index, parity or jet length is outside the supported range."""


class UnsupportedOrderError(QMomentsError):
    """The requested expansion order has no closed-form solution here."""


class SingularLeadingTerm(QMomentsError, ArithmeticError):
    """The coefficient of the highest derivative is below the configured floor."""


class ConsistencyError(QMomentsError, AssertionError):
    """An internal identity failed beyond its tolerance."""


class EmptyOverlap(QMomentsError, ValueError):
    """Two trajectories share no common time range."""


class IntegrationFailure(QMomentsError):
    """A numerical integration stopped before reaching its end time.

    Attributes:
        time: time of failure (crossing time for X <= 0)
        reason: short machine-friendly reason ("domain", "nan", "uncertainty",
            "step_underflow", "max_steps")
        trajectory: samples accepted before the failure, if any
    """

    def __init__(self, message: str, time: float, reason: str, trajectory=None):
        super().__init__(message)
        self.time = time
        self.reason = reason
        self.trajectory = trajectory


class ConfigError(QMomentsError):
    """Base class for configuration problems (exit code 3)."""


class ParseError(ConfigError):
    """The configuration document is not well-formed."""


class ValidationError(ConfigError, ValueError):
    """The configuration is well-formed but semantically invalid.

    Attributes:
        issues: list of (key_path, reason) pairs
    """

    def __init__(self, issues: list[tuple[str, str]]):
        self.issues = list(issues)
        lines = [f"{path}: {reason}" for path, reason in self.issues]
        super().__init__("; ".join(lines))
