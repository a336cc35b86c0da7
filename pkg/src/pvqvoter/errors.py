"""Exception hierarchy shared by all modules."""


class PvqvoterError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(PvqvoterError, ValueError):
    pass


class UnsupportedParameter(PvqvoterError, ValueError):
    pass


class InvalidIndex(PvqvoterError, IndexError):
    pass


class ConstructionFailed(PvqvoterError, RuntimeError):
    """A random layer could not be drawn connected within the retry budget."""

    def __init__(self, seed, attempts: int):
        self.seed = seed
        self.attempts = attempts
        super().__init__(
            f"no connected layer after {attempts} attempts (seed={seed!r})"
        )


class InvalidEnsemble(PvqvoterError, ValueError):
    pass


class ConfigurationError(PvqvoterError, ValueError):
    """Bad configuration value or key; ``key`` names the offender."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class SolverError(PvqvoterError, RuntimeError):
    pass
