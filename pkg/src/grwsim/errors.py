"""Exception hierarchy."""


class GrwSimError(Exception):
    """Base class for all errors raised by grwsim."""


class ContractViolation(GrwSimError, ValueError):
    """An operation was called with arguments outside its contract."""


class ConfigurationError(GrwSimError, ValueError):
    """A physical or numerical configuration is invalid."""


class DegenerateHitError(GrwSimError, ArithmeticError):
    """Every amplitude underflowed to zero under a sharpening operator."""


class EmptyStatisticsError(GrwSimError, ValueError):
    """A statistic was requested over an empty set of paths."""


class ConfigParseError(GrwSimError, ValueError):
    """Raised by the config parser; carries the offending key and line."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class CsvFormatError(GrwSimError, ValueError):
    """A CSV input file is malformed."""

    def __init__(self, message, path=None, row=None):
        self.path = path
        self.row = row
        where = ", ".join(x for x in (str(path) if path else "", f"row {row}" if row is not None else "") if x)
        super().__init__(f"{where}: {message}" if where else message)
