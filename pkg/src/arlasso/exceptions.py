class ARLError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ARLError, ValueError):
    pass


class DegenerateSignalError(ARLError, ValueError):
    pass


class PreconditionError(ARLError, ValueError):
    pass


class NoUsableSubsetsError(ARLError, RuntimeError):
    pass


class GroupTooLargeError(ARLError, ValueError):
    pass
