class RhgtError(Exception):
    """Base class for every error raised by the toolkit."""


class WordSyntaxError(RhgtError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownSymbolError(RhgtError):
    """A generator or subgroup name that the presentation does not declare."""


class IdentityLetterError(RhgtError):
    """A subgroup token that evaluates to the identity."""


class ForeignLetterError(RhgtError):
    """A letter outside the alphabet of the group it was given to."""


class GroupConfigError(RhgtError):
    """An unsupported or inconsistent group definition."""


class CapExceededError(RhgtError):
    def __init__(self, cap: str, value: int, detail: str = ""):
        message = f"cap {cap}={value} exceeded"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
        self.cap = cap
        self.value = value


class ExactnessUnavailableError(RhgtError):
    """An operation needs a certified relative distance and none is available."""


class OutsideTruncationError(RhgtError):
    """An endpoint lies outside the truncated Cayley graph."""


class CapabilityAbsentError(RhgtError):
    """The oracle does not provide an optional capability."""


class PreconditionError(RhgtError):
    """Inputs violate an operation's precondition; reported as a diagnostic, not a violation."""
