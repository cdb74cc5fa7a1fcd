"""Exception hierarchy for qagree."""


class QAgreeError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(QAgreeError, ValueError):
    pass


class KindMismatch(QAgreeError, TypeError):
    pass


class InvariantViolation(QAgreeError, ValueError):
    """A value failed a named structural invariant.

    Parameters
    ----------
    invariant : str
        Short name of the violated invariant, e.g. ``"completeness"``.
    deviation : float, optional
        Measured deviation from the invariant (max-entry norm), if numeric.
    detail : str, optional
        Extra context such as the offending field.
    """

    def __init__(self, invariant, deviation=None, detail=""):
        self.invariant = invariant
        self.deviation = deviation
        self.detail = detail
        msg = f"invariant {invariant!r} violated"
        if deviation is not None:
            msg += f" (deviation {deviation:.3g})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class CompletenessViolation(InvariantViolation):
    """Kraus operators do not resolve the identity."""

    def __init__(self, deviation, detail=""):
        super().__init__("completeness", deviation, detail)


class OutcomeImpossible(QAgreeError, ValueError):
    """Conditioning on an outcome whose probability is below the floor."""

    def __init__(self, outcome, probability):
        self.outcome = outcome
        self.probability = probability
        super().__init__(
            f"outcome {outcome} has probability {probability:.3g}; post-measurement state undefined"
        )


class PreconditionViolated(QAgreeError):
    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class ScenarioSyntaxError(QAgreeError, ValueError):
    """Scenario file is not parseable JSON."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
