"""Exception hierarchy shared across the package."""


class InvalidInputError(ValueError):
    """Raised for malformed, non-finite or out-of-domain arguments."""


class ChannelValidationError(ValueError):
    """A Kraus set or affine map does not describe a valid qubit channel."""


class TracePreservationError(ChannelValidationError):
    def __init__(self, residual: float, tol: float):
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"Kraus operators are not trace preserving: "
            f"max |sum K^dag K - I| = {residual:.3e} > {tol:.0e}"
        )


class NotCompletelyPositiveError(ChannelValidationError):
    """Raised when a map fails the Choi or tetrahedron test."""


class InconsistencyError(RuntimeError):
    """Two independent computational routes disagree beyond tolerance.

    This signals a broken invariant inside the library, not bad user input.
    """
