"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or input schema.

    The CLI maps this to exit code 2; anything else raised at runtime maps
    to exit code 1.
    """


class StreamFormatError(ConfigError):
    """Malformed event stream or dataset file; carries the offending line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
