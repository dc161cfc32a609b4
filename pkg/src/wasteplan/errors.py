"""Exception types shared across the package."""


class InputError(ValueError):
    """Caller supplied an argument outside an operation's domain."""


class ValidationError(InputError):
    """A data file failed validation.

    ``line`` and ``column`` point at the offending record when known.
    """

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class NumericalError(ArithmeticError):
    """An objective or model quantity evaluated to a non-finite value."""
