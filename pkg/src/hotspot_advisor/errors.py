"""Exception hierarchy. Everything raised on bad input derives from AdvisorError."""


class AdvisorError(Exception):
    """Base class for all validation, parse and domain errors."""


class ValidationError(AdvisorError, ValueError):
    pass


class ParseError(AdvisorError, ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class FormatError(AdvisorError, ValueError):
    pass


class CoincidentPoints(AdvisorError, ValueError):
    pass


class OutOfRange(AdvisorError, ValueError):
    pass


class RadiusMismatch(AdvisorError, ValueError):
    pass


class NoNodes(AdvisorError, LookupError):
    pass


class InvalidParams(AdvisorError, ValueError):
    pass


class ClipMismatch(AdvisorError, ValueError):
    pass
