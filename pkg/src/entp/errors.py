"""Exception hierarchy.

Every error raised by the library derives from :class:`EnTPError`.  The three
intermediate classes map one-to-one onto CLI exit codes (input, config,
internal invariant).
"""


class EnTPError(Exception):
    exit_code = 1


class InputError(EnTPError, ValueError):
    """Bad or inconsistent input data."""

    exit_code = 2


class ConfigError(EnTPError, ValueError):
    """Bad parameters or configuration."""

    exit_code = 3


class InvariantViolation(EnTPError, AssertionError):
    """An internal invariant did not hold; always a bug."""

    exit_code = 4


class MalformedFile(InputError):
    def __init__(self, path, lineno, reason):
        self.path = str(path)
        self.lineno = lineno
        self.reason = reason
        where = f"{self.path}:{lineno}" if lineno else self.path
        super().__init__(f"{where}: {reason}")


class _TestIdError(InputError):
    _what = "test"

    def __init__(self, test, detail=""):
        self.test = test
        msg = f"{self._what}: {test!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class MissingTest(_TestIdError):
    _what = "missing test"


class DuplicateTest(_TestIdError):
    _what = "duplicate test"


class UnknownTest(_TestIdError):
    _what = "unknown test"


class MissingCost(_TestIdError):
    _what = "no cost for test"


class NonPositiveCost(_TestIdError):
    _what = "non-positive cost for test"


class EmptyTrace(_TestIdError):
    _what = "empty trace for test"


class MissingTraces(InputError):
    pass


class EmptyDelta(InputError):
    def __init__(self, msg="change set (delta) is empty"):
        super().__init__(msg)


class EmptyDeltaWarning(UserWarning):
    pass


class SuiteMismatch(InputError):
    pass


class SingletonEnsemble(InputError):
    def __init__(self, msg="diversity needs an ensemble of at least 2 rankings"):
        super().__init__(msg)


class NoFailures(InputError):
    def __init__(self, msg="metric undefined without failures"):
        super().__init__(msg)


class TooLarge(ConfigError):
    def __init__(self, n, limit):
        self.n = n
        super().__init__(f"exhaustive search limited to n <= {limit}, got n={n}")


class InvalidParams(ConfigError):
    pass
