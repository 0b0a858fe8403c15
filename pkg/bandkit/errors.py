# bandkit/errors.py


class BandError(Exception):
    """Root of every error raised by bandkit."""


class ConfigError(BandError):
    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line else message)


class ExpressionError(BandError):
    """Parse error in a field expression; `position` is a byte offset."""

    def __init__(self, position: int, message: str):
        self.position = position
        self.message = message
        super().__init__(f"offset {position}: {message}")


class DensityRangeError(BandError):
    def __init__(self, d: float, lo: float, hi: float):
        self.d = d
        super().__init__(f"density {d!r} outside ({lo!r}, {hi!r}]")


class DepthBudgetError(BandError):
    def __init__(self, level: int, top_level: int, depth: int):
        self.level = level
        super().__init__(
            f"level {level} needs {level - top_level} path bits, depth budget is {depth}"
        )


class ShiftRangeError(BandError):
    def __init__(self, level: int):
        self.level = level
        super().__init__(f"no explicit shift configured for level {level}")


class RasterError(BandError):
    def __init__(self, invalid: int, total: int):
        self.invalid = invalid
        self.total = total
        super().__init__(f"{invalid} of {total} cells have invalid field values")


class PrecisionError(BandError):
    """The parameter is too large for the band spacing at this level."""

    def __init__(self, v: float, level: int):
        self.v = v
        self.level = level
        super().__init__(f"parameter value {v!r} is beyond float precision at level {level}")
