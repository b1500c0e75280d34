"""Exception hierarchy. CLI exit codes are attached to the classes."""


class MicrogridError(Exception):
    exit_code = 1


class MalformedGraphError(MicrogridError, ValueError):
    exit_code = 2


class ScenarioParseError(MicrogridError, ValueError):
    exit_code = 2


class AssumptionViolation(MicrogridError):
    """A standing modelling assumption does not hold for the given network."""

    exit_code = 3

    def __init__(self, assumption, message):
        self.assumption = assumption
        super().__init__(f"{assumption} violated: {message}")


class UnsupportedRegimeError(AssumptionViolation):
    def __init__(self, message):
        super().__init__("stability regime", message)


class NumericalAbort(MicrogridError, FloatingPointError):
    exit_code = 4
