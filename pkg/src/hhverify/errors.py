"""Exception types. Each carries a stable ``code`` string used in CLI output."""


class HHVerifyError(Exception):
    code = "ERROR"


class NonFiniteEntries(HHVerifyError, ValueError):
    code = "NON_FINITE_ENTRIES"


class NotHermitian(HHVerifyError, ValueError):
    code = "NOT_HERMITIAN"


class ConvergenceFailure(HHVerifyError, ArithmeticError):
    code = "CONVERGENCE_FAILURE"


class DimMismatch(HHVerifyError, ValueError):
    code = "DIM_MISMATCH"


class ParameterOutOfRange(HHVerifyError, ValueError):
    code = "PARAMETER_OUT_OF_RANGE"


class BadInterval(HHVerifyError, ValueError):
    code = "BAD_INTERVAL"


class PreconditionFailed(HHVerifyError, ValueError):
    code = "PRECONDITION_FAILED"


class ConfigInvalid(HHVerifyError, ValueError):
    code = "CONFIG_INVALID"


class DomainViolation(HHVerifyError, ValueError):
    code = "DOMAIN_VIOLATION"

    def __init__(self, eigenvalue, domain):
        self.eigenvalue = float(eigenvalue)
        self.domain = (float(domain[0]), float(domain[1]))
        super().__init__(
            f"eigenvalue {self.eigenvalue!r} outside domain "
            f"[{self.domain[0]!r}, {self.domain[1]!r}]"
        )
