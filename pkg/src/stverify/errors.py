"""Exception types shared across the package."""


class ParseError(ValueError):
    """Raised for malformed property text; carries line/column context."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class HorizonError(ValueError):
    """A formula needs more future steps than the trace provides."""

    def __init__(self, required, available):
        super().__init__(
            f"formula requires a trace horizon of {required} steps, "
            f"but only {available} are available")
        self.required = required
        self.available = available


class DataError(ValueError):
    """Invalid or inconsistent input data (ingestion, file formats)."""


class NumericalError(RuntimeError):
    """Numerical failure inside a sampler; names the offending draw."""

    def __init__(self, message, draw_index=None):
        if draw_index is not None:
            message = f"{message} (draw index {draw_index})"
        super().__init__(message)
        self.draw_index = draw_index
