class NormalizationError(ValueError):
    """A post-selected ensemble is empty, or interference cancels it exactly."""


class ConfigError(ValueError):
    """An experiment config failed validation.

    ``line`` is the 1-based line in the source document when known.
    """

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        prefix = ""
        if source is not None:
            prefix = f"{source}:{line}: " if line is not None else f"{source}: "
        elif line is not None:
            prefix = f"line {line}: "
        super().__init__(prefix + message)
