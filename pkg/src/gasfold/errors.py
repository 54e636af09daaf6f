"""Exception hierarchy shared by all gasfold modules."""


class GasfoldError(Exception):
    """Base class for every error raised by the package."""


class DomainError(GasfoldError, ValueError):
    """An argument lies outside the declared domain of a model."""


class ReductionError(GasfoldError):
    """The homentropic reduction could not bracket a temperature root."""


class HyperbolicityError(GasfoldError):
    """p'(rho) <= 0 somewhere on the requested density range."""

    def __init__(self, rho, message=None):
        self.rho = float(rho)
        super().__init__(message or f"system is not hyperbolic at rho={self.rho!r} (p'(rho) <= 0)")


class SingularCharacteristic(GasfoldError):
    """A characteristic speed vanishes (u = +/- rho A(rho))."""


class SingularOperator(GasfoldError):
    """rho A(rho) = 0, so the operator A_omega is undefined."""


class DegenerateFamily(GasfoldError):
    """The operation needs lambda != 0."""


class OutsideSupport(GasfoldError):
    """The branch radicand D(rho, t) is negative."""

    def __init__(self, D, message=None):
        self.D = D
        super().__init__(message or f"radicand D(rho, t) = {D!r} < 0; point outside the solution support")


class ContinuationStall(GasfoldError):
    """Newton continuation of a shock front failed to converge."""

    def __init__(self, last_t, message=None, front=None):
        self.last_t = last_t
        self.front = front
        super().__init__(message or f"shock-front continuation stalled after t={last_t!r}")


class OracleError(GasfoldError):
    """An oracle computation could not be carried out reliably."""


class ConfigError(GasfoldError):
    """Malformed or incomplete run configuration."""
