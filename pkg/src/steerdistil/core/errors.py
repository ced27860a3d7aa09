"""Error classes for the steerdistil package."""


class SteerDistilError(RuntimeError):
    """Base class for all steerdistil errors."""


##################################################################
## Validation Errors                                            ##
##################################################################
class ValidationError(SteerDistilError, ValueError):
    """Base class for all input validation errors.

    Validation errors are raised when an operator or an assemblage does not
    satisfy the invariants required by an operation.
    """


class NonHermitianInputError(ValidationError):
    """Raised when an operator is not Hermitian within tolerance."""


class NegativeOperatorError(ValidationError):
    """Raised when an operator has eigenvalues below the negativity floor."""


class NonUnitTraceError(ValidationError):
    """Raised when a density operator does not have unit trace."""


class NoSignallingViolationError(ValidationError):
    """Raised when the reduced state of an assemblage depends on the input."""


class DimensionMismatchError(ValidationError):
    """Raised when operands have incompatible shapes."""


class SupportViolationError(ValidationError):
    """Raised when a support inclusion required by an operation fails."""


class ContractionViolationError(ValidationError):
    """Raised when a Kraus operator violates K†K ≤ I."""


class MalformedDistributionError(ValidationError):
    """Raised when a conditional distribution is negative or not normalized."""


class MalformedInstrumentError(ValidationError):
    """Raised when the maps of an instrument do not sum to a channel."""


class DocumentError(ValidationError):
    """Raised when a serialized document cannot be parsed.

    Args:
        msg: Description of the problem.
        position: Location of the problem inside the document, either a
            ``line:column`` pair or a path such as ``elements[0][1]``.
    """

    def __init__(self, msg: str, position: str = "") -> None:
        self.position = position
        super().__init__(f"{position}: {msg}" if position else msg)


##################################################################
## Filter Errors                                                ##
##################################################################
class FilterError(SteerDistilError):
    """Base class for all local filter errors."""


class VanishingSuccessProbabilityError(FilterError, ArithmeticError):
    """Raised when a filter succeeds with (numerically) zero probability."""


class InvalidWitnessError(FilterError):
    """Raised when a unitary does not verify the SEO ordering."""


class EmptyWitnessListError(FilterError, ValueError):
    """Raised when an optimisation over witnesses receives no witness."""


##################################################################
## Solver Errors                                                ##
##################################################################
class SolverError(SteerDistilError):
    """Base class for all semidefinite programming errors."""


class IllFormedProblemError(SolverError, ValueError):
    """Raised when an SDP has inconsistent dimensions or non-Hermitian data."""


class SolverFailureError(SolverError, ArithmeticError):
    """Raised when the solver cannot return an optimal solution.

    Args:
        msg: Description of the failure.
        solution: The last solution object produced by the solver.
    """

    def __init__(self, msg: str, solution: object = None) -> None:
        self.solution = solution
        super().__init__(msg)


##################################################################
## Robustness Errors                                            ##
##################################################################
class RobustnessError(SteerDistilError):
    """Base class for all errors of the robustness measures."""


class TooManyStrategiesError(RobustnessError, ValueError):
    """Raised when the deterministic strategy set is too large to enumerate."""


class UnrepresentableNoiseModelError(RobustnessError, ValueError):
    """Raised when a noise model cannot be written as linear SDP constraints."""


##################################################################
## Certification Errors                                         ##
##################################################################
class CertificationError(SteerDistilError):
    """Raised when a certification suite observes a violated property."""
