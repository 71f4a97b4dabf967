"""Exception types shared across the package."""


class DegenerateHypothesisError(ValueError):
    """An update annihilated the hypothesis vector (norm below 1e-300)."""


class ProtocolError(RuntimeError):
    """The predict-before-reveal protocol was violated."""


class MalformedRecordError(ValueError):
    """A dataset file contains an unparseable or inconsistent record."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class NoConvergenceError(RuntimeError):
    """Iterative whitening failed to certify isotropy within its budget.

    Carries the last isotropy report so callers can see how close it got.
    """

    def __init__(self, message: str, last_report=None):
        self.last_report = last_report
        super().__init__(message)


class InfeasibleParametersError(ValueError):
    """Monte-Carlo estimation is hopeless at these parameters."""


class RegimeError(ValueError):
    """A tail bound's parameter regime is violated; message names the inequality."""
