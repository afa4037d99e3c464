"""Exception types raised across the package."""


class LoopsensError(Exception):
    """Base class for all package-specific errors."""


class NoRoots(LoopsensError):
    """Root finding requested on a degree-0 polynomial."""


class RootFindingFailed(LoopsensError):
    """Root residuals exceeded tolerance after polishing."""

    def __init__(self, message, roots=None, residuals=None):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


class PoleOnAxis(LoopsensError):
    """Frequency response requested at an imaginary-axis pole."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class ImproperSystem(LoopsensError):
    """Operation requires a proper transfer function."""


class DegeneratePlant(LoopsensError):
    """A perturbation produced an unusable plant."""


class MarginallyStableLoop(LoopsensError):
    """1 + G(jw) vanished on the imaginary axis."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class InvalidBlaschkeFactor(LoopsensError):
    """All-pass factor requested for a root not in the open RHP."""


class DegenerateCompensation(LoopsensError):
    """Compensator pole coincides with a closed-loop pole."""


class UnresolvedClosedLoopPoles(LoopsensError):
    """Pade root count and winding-number count disagree."""

    def __init__(self, message, pade_count=None, winding_count=None):
        super().__init__(message)
        self.pade_count = pade_count
        self.winding_count = winding_count


class SingularCoincidence(LoopsensError):
    """Singular point coincides with an alpha/beta root."""


class AxisZeroDetected(LoopsensError):
    """|g(jw)| = 0 persisted on quadrature nodes after refinement."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class NonconvergentIntegral(LoopsensError):
    """The requested improper integral does not converge (or refinement gave up)."""


class NoCrossover(LoopsensError):
    """|g| never crosses unity on the sweep."""


class LowFrequencyAmplification(LoopsensError):
    """|g| starts above unity at the low end of the sweep."""


class InvalidTruncation(LoopsensError):
    """Bode bound requested with omega_l <= omega_c."""


class ConditionNotMet(LoopsensError):
    """Sign condition of a sensitivity inequality is violated."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class UnknownCase(LoopsensError):
    """Requested built-in case does not exist."""


class CaseFileError(LoopsensError):
    """Malformed case file."""

    def __init__(self, message, line=None, field=None):
        parts = [message]
        if line is not None:
            parts.append(f"(line {line})")
        if field is not None:
            parts.append(f"[field: {field}]")
        super().__init__(" ".join(parts))
        self.line = line
        self.field = field
