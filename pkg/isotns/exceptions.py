"""
Exceptions used throughout the isotns library.
"""
from typing import Iterable, Optional, Sequence, Tuple


class IsoTNSError(Exception):
    """Base exception for all isotns errors."""
    pass


class InvalidDimensionError(IsoTNSError, ValueError):
    """
    Error when a requested dimension cannot be realised.

    This exception is raised when:
    - A unitary of dimension 0 is requested
    - A Gell-Mann basis is requested for chi < 2
    - A Pauli-product basis is requested for a dimension that is not a power of two
    - A second-moment Haar integral is requested for N < 2
    """
    pass


class ShapeMismatchError(IsoTNSError, ValueError):
    """
    Error when tensor legs do not fit together.

    This exception is raised when:
    - Paired legs of a contraction have different dimensions
    - A partial trace is asked for subsystem dimensions that do not factor the operator
    - Environment operators and a unitary have incompatible dimensions

    Attributes:
        legs: Offending (leg_of_a, leg_of_b, dim_a, dim_b) tuples, when known
    """
    def __init__(self, message: str, legs: Optional[Sequence[Tuple[int, int, int, int]]] = None):
        self.legs = list(legs or [])
        super().__init__(message)


class UnsupportedConfigurationError(IsoTNSError, ValueError):
    """
    Error when a network or oracle configuration is outside the supported set.

    This exception is raised when:
    - Trotterized tensors are requested with a bond dimension that is not a power of two
    - The rotation-angle oracle is asked for a non power-of-two tensor dimension
    - An unknown family or construction tag is requested
    - An MPS bond dimension cannot be reached from the left boundary by whole isometries
    """
    pass


class IntegrityError(IsoTNSError):
    """
    Error when a stored tensor violates its isometry or unitarity condition.

    Attributes:
        position: Tensor position whose check failed
        residual: Max-norm residual of the failed check
    """
    def __init__(self, position, residual: float):
        self.position = position
        self.residual = residual
        super().__init__(
            f"Tensor at position {position} is not isometric (residual {residual:.3e})"
        )


class SupportOutOfRangeError(IsoTNSError, IndexError):
    """
    Error when an interaction term does not fit into the lattice.

    This exception is raised when:
    - The support of an MPS interaction term leaves [1, L]
    - A site or tensor position does not exist in the network
    """
    pass


class ConeMembershipError(IsoTNSError, ValueError):
    """
    Error when an environment is requested for a term outside the tensor's causal cone.

    Attributes:
        position: Tensor position
        site: Interaction site that does not depend on the tensor
    """
    def __init__(self, position, site: int):
        self.position = position
        self.site = site
        super().__init__(f"Site {site} is not in the causal cone of tensor {position}")


class PreconditionError(IsoTNSError, ValueError):
    """
    Error when an input violates a documented precondition.

    This exception is raised when:
    - A Hamiltonian term is not traceless or not Hermitian
    - An interaction width does not match the network
    """
    pass


class ResourceLimitError(IsoTNSError):
    """
    Error when a dense representation would exceed the configured size limit.

    Attributes:
        required_dim: Number of rows of the requested dense matrix
        limit: Configured maximum
    """
    def __init__(self, required_dim: int, limit: int):
        self.required_dim = required_dim
        self.limit = limit
        super().__init__(
            f"Dense superoperator needs {required_dim} rows (D^2), limit is {limit}"
        )


class NumericalError(IsoTNSError):
    """
    Error when a numerical routine fails to reach its tolerance.

    This exception is raised when:
    - An eigensolver does not converge
    - Biorthogonal normalisation of eigenvectors fails
    - A self-test identity exceeds its tolerance

    Attributes:
        residual: Residual reported by the failing routine, if any
    """
    def __init__(self, message: str, residual: Optional[float] = None):
        self.residual = residual
        super().__init__(message)


class FitDomainError(IsoTNSError, ValueError):
    """
    Error when a log-linear decay fit cannot be performed.

    This exception is raised when:
    - A record inside the fit window has a non-positive mean
    - Fewer than three records fall inside the fit window

    Attributes:
        positions: Offending layer positions
    """
    def __init__(self, message: str, positions: Iterable[int] = ()):
        self.positions = list(positions)
        super().__init__(message)


class ConfigurationError(IsoTNSError, ValueError):
    """
    Error when an experiment configuration is invalid.

    Attributes:
        violations: Every violated rule, one human-readable line each
    """
    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        joined = "\n  - ".join(self.violations)
        super().__init__(f"Invalid configuration:\n  - {joined}")
