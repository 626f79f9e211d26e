"""Exception types raised by the simulation engine."""


class GateValidationError(ValueError):
    """A matrix handed to :class:`~sineqpe.statevec.Gate` is not unitary."""


class ProbabilityUnderflowError(ArithmeticError):
    """Both outcomes of a measurement have vanishing probability."""


class RegisterSizeError(ValueError):
    """The requested register is too large for exact treatment."""


class LiveRegisterError(RuntimeError):
    """The streaming schedule held more control qubits than allowed."""
