"""Exception hierarchy shared by all modules."""


class WorkbenchError(Exception):
    pass


class NetlistError(WorkbenchError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class FormatError(WorkbenchError, ValueError):
    """Malformed generator, config or other text input."""


class ArityError(WorkbenchError, ValueError):
    pass


class ModeError(WorkbenchError, ValueError):
    """Evaluation mode incompatible with the circuit or the operation."""


class CapExceeded(WorkbenchError):
    pass


class TotalityError(WorkbenchError):
    """A function-computing circuit has no non-bottom branch on some input."""


class PreconditionError(WorkbenchError):
    pass


class ContractViolation(WorkbenchError):
    """A construction failed a guarantee that its proof makes unconditional."""


class OracleInconsistency(WorkbenchError):
    pass
