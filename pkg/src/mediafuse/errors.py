"""Exception hierarchy shared across the package."""


class MediaFuseError(Exception):
    """Base class for every error raised by mediafuse."""


class InputError(MediaFuseError):
    """Bad user input: malformed files, unknown names, invalid configs."""


class InvalidDomain(InputError):
    pass


class UnknownLabel(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class EmptyResponse(InputError):
    pass


class InvalidConfig(InputError):
    pass


class ConfigError(InvalidConfig):
    pass


class ShapeError(MediaFuseError, ValueError):
    pass


class NumericError(MediaFuseError, ArithmeticError):
    pass


class NoPositivePairs(MediaFuseError):
    pass


class EmptyContext(MediaFuseError):
    pass


class DegenerateLabels(MediaFuseError):
    pass


class NoData(MediaFuseError):
    pass


class NoPredictions(MediaFuseError):
    pass


class StratificationWarning(UserWarning):
    """A class is too small to be spread over every split."""


class ClippedActionWarning(UserWarning):
    pass
