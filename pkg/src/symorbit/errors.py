"""Exception hierarchy. Each class maps onto one CLI exit-code class."""


class SymorbitError(Exception):
    exit_class = "error"
    exit_code = 1


class ConfigError(SymorbitError, ValueError):
    exit_class = "config"
    exit_code = 2

    def __init__(self, message, *, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class PrecisionError(SymorbitError, ArithmeticError):
    """A comparison could not be certified within the precision budget."""

    exit_class = "precision"
    exit_code = 3


class CapExceededError(SymorbitError, RuntimeError):
    """An enumeration would exceed the configured word-count cap."""

    exit_class = "cap"
    exit_code = 4


class InfeasibleError(SymorbitError, ValueError):
    exit_class = "infeasible"
    exit_code = 5


class SpecificationError(SymorbitError, ValueError):
    """Decomposition or gluing metadata of a shift is missing or wrong."""

    exit_class = "infeasible"
    exit_code = 5


class EmptyLanguageError(SymorbitError, ValueError):
    exit_class = "config"
    exit_code = 2


class AlphabetMismatchError(SymorbitError, ValueError):
    exit_class = "config"
    exit_code = 2


class IndistinguishableError(SymorbitError, ValueError):
    """Two points agree on every symbol available to the comparison."""

    exit_class = "precision"
    exit_code = 3
