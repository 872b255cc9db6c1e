"""
Dense complex tensor algebra, Haar sampling and operator bases.

Leg conventions: every operator on a composite space is a square matrix whose row
and column indices are row-major flattenings of the subsystem indices, in the order
the subsystems are listed. ``contract`` follows ``numpy.tensordot``: the free legs
of ``a`` come first, then the free legs of ``b``, each in their original order.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .exceptions import (
    InvalidDimensionError,
    PreconditionError,
    ShapeMismatchError,
)

logger = logging.getLogger(__name__)

DenseTensor = npt.NDArray[np.complex128]

# Tolerance for exact algebraic identities
ATOL = 1e-12


def make_rng(seed: int, *counters: int) -> np.random.Generator:
    """
    Create an independent generator for ``(seed, counters...)``.

    Streams for distinct counter tuples are statistically independent and the same
    tuple always reproduces the same stream, whichever process asks for it.
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(c) for c in counters))
    return np.random.Generator(np.random.PCG64(sequence))


def derive_seed(seed: int, *counters: int) -> int:
    """Derive a 64-bit child seed for ``(seed, counters...)``."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(c) for c in counters))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    """A unitary in U(N)."""

    matrix: DenseTensor

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    def residual(self) -> float:
        """Max-norm deviation of U^dagger U from the identity."""
        u = self.matrix
        return max_norm(u.conj().T @ u - np.eye(self.dimension))

    @property
    def dagger(self) -> DenseTensor:
        return self.matrix.conj().T


@dataclass(frozen=True, eq=False)
class IsometryTensor:
    """
    Isometry V = U (1_{N1} (x) |0_{N2}>) obtained by projecting a parent unitary.

    ``matrix`` has shape [N1*N2, N1]; the reference state of the N2 factor is the
    computational basis state with index 0.
    """

    parent: UnitaryMatrix
    input_dim: int
    ancilla_dim: int

    def __post_init__(self):
        if self.input_dim * self.ancilla_dim != self.parent.dimension:
            raise ShapeMismatchError(
                f"Parent unitary of dimension {self.parent.dimension} cannot host an "
                f"isometry {self.input_dim} -> {self.input_dim} x {self.ancilla_dim}"
            )

    @property
    def matrix(self) -> DenseTensor:
        n = self.parent.dimension
        return self.parent.matrix.reshape(n, self.input_dim, self.ancilla_dim)[:, :, 0]

    @property
    def dimension(self) -> int:
        return self.parent.dimension

    def residual(self) -> float:
        """Max-norm deviation of V^dagger V from the identity."""
        v = self.matrix
        return max_norm(v.conj().T @ v - np.eye(self.input_dim))


def haar_unitary(n: int, rng: np.random.Generator) -> UnitaryMatrix:
    """
    Sample a Haar-distributed unitary in U(n).

    QR of a complex standard-Gaussian matrix, with the phases of R's diagonal moved
    into Q so that the distribution is exactly Haar.

    Args:
        n: Dimension
        rng: Seeded generator

    Returns:
        The sampled unitary

    Raises:
        InvalidDimensionError: If n < 1
    """
    if n < 1:
        raise InvalidDimensionError(f"Unitary dimension must be positive, got {n}")
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = scipy.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return UnitaryMatrix(np.ascontiguousarray(q, dtype=np.complex128))


def isometry_from_unitary(parent: UnitaryMatrix, input_dim: int) -> IsometryTensor:
    """Wrap ``parent`` as an isometry from ``input_dim`` into its full space."""
    n = parent.dimension
    if input_dim < 1 or n % input_dim:
        raise InvalidDimensionError(
            f"Input dimension {input_dim} does not divide parent dimension {n}"
        )
    return IsometryTensor(parent=parent, input_dim=input_dim, ancilla_dim=n // input_dim)


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """An operator basis with its normalisation convention."""

    dimension: int
    elements: List[DenseTensor]
    kind: str  # "gell-mann" or "pauli-product"

    def __len__(self) -> int:
        return len(self.elements)

    def gram(self) -> np.ndarray:
        """Hilbert-Schmidt Gram matrix <<A|B>> = Tr(A^dagger B)."""
        flat = np.array([e.reshape(-1) for e in self.elements])
        return flat.conj() @ flat.T


def gell_mann_basis(chi: int) -> OperatorBasis:
    """
    Generalized Gell-Mann matrices of dimension chi.

    Symmetric, antisymmetric and diagonal generators in that order, normalized so that
    Tr(L^a L^b) = 2 delta_ab. For chi = 2 these are the Pauli matrices X, Y, Z.

    Raises:
        InvalidDimensionError: If chi < 2
    """
    if chi < 2:
        raise InvalidDimensionError(f"Gell-Mann basis needs chi >= 2, got {chi}")
    symmetric, antisymmetric, diagonal = [], [], []
    for j, k in itertools.combinations(range(chi), 2):
        s = np.zeros((chi, chi), dtype=np.complex128)
        s[j, k] = s[k, j] = 1.0
        symmetric.append(s)
        a = np.zeros((chi, chi), dtype=np.complex128)
        a[j, k] = -1.0j
        a[k, j] = 1.0j
        antisymmetric.append(a)
    for l in range(1, chi):
        diag = np.zeros(chi, dtype=np.complex128)
        diag[:l] = 1.0
        diag[l] = -l
        diagonal.append(np.sqrt(2.0 / (l * (l + 1))) * np.diag(diag))
    return OperatorBasis(dimension=chi, elements=symmetric + antisymmetric + diagonal, kind="gell-mann")


_PAULIS = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


def pauli_product_basis(n: int) -> OperatorBasis:
    """
    All n-dimensional Pauli strings, for n = 2^k.

    Each element is Hermitian and unitary and Tr(s_m s_n) = n delta_mn. The identity
    string comes first.

    Raises:
        InvalidDimensionError: If n is not a power of two
    """
    if not is_power_of_two(n):
        raise InvalidDimensionError(f"Pauli-product basis needs a power of two, got {n}")
    qubits = n.bit_length() - 1
    elements = []
    for labels in itertools.product(range(4), repeat=qubits):
        op = np.ones((1, 1), dtype=np.complex128)
        for label in labels:
            op = np.kron(op, _PAULIS[label])
        elements.append(op)
    return OperatorBasis(dimension=n, elements=elements, kind="pauli-product")


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """
    A traceless Hermitian interaction term acting on ``width`` consecutive sites.

    ``start`` is the 1-based site of the leftmost factor.
    """

    chi: int
    width: int
    matrix: DenseTensor
    start: int = 1
    hermitian_tol: float = field(default=1e-10, repr=False)

    def __post_init__(self):
        expected = self.chi ** self.width
        if self.matrix.shape != (expected, expected):
            raise ShapeMismatchError(
                f"Interaction matrix has shape {self.matrix.shape}, expected {(expected, expected)}"
            )
        if max_norm(self.matrix - self.matrix.conj().T) > self.hermitian_tol:
            raise PreconditionError("Interaction term is not Hermitian")
        if abs(np.trace(self.matrix)) > self.hermitian_tol * expected:
            raise PreconditionError("Interaction term is not traceless")

    def at(self, start: int) -> "LocalOperator":
        """The same term placed at another site."""
        return LocalOperator(self.chi, self.width, self.matrix, start)

    @property
    def sites(self) -> Tuple[int, ...]:
        return tuple(range(self.start, self.start + self.width))

    def square_trace(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def single_site_partial_traces(self) -> List[DenseTensor]:
        """Reduced operators obtained by tracing out every site but one."""
        dims = [self.chi] * self.width
        return [
            partial_trace(self.matrix, dims, [s for s in range(self.width) if s != keep])
            for keep in range(self.width)
        ]


def build_interaction(chi: int, n: int, start: int = 1) -> LocalOperator:
    """
    Isotropic n-site interaction (2^n (chi^2 - 1))^{-1/2} sum_a L^a (x) ... (x) L^a.

    The result is traceless and Hermitian, has Tr(h^2) = 1 and vanishing single-site
    partial traces.
    """
    if n < 1:
        raise InvalidDimensionError(f"Support width must be positive, got {n}")
    basis = gell_mann_basis(chi)
    total = np.zeros((chi ** n, chi ** n), dtype=np.complex128)
    for element in basis.elements:
        term = element
        for _ in range(n - 1):
            term = np.kron(term, element)
        total += term
    total /= np.sqrt(2.0 ** n * (chi ** 2 - 1))
    return LocalOperator(chi=chi, width=n, matrix=total, start=start)


def contract(a: np.ndarray, b: np.ndarray, pairs: Sequence[Tuple[int, int]]) -> np.ndarray:
    """
    Contract legs ``pairs`` = [(leg_of_a, leg_of_b), ...].

    Raises:
        ShapeMismatchError: If paired legs differ in dimension
    """
    bad = [
        (la, lb, a.shape[la], b.shape[lb])
        for la, lb in pairs
        if a.shape[la] != b.shape[lb]
    ]
    if bad:
        raise ShapeMismatchError(
            "Contracted legs differ in dimension: "
            + ", ".join(f"a[{la}]={da} vs b[{lb}]={db}" for la, lb, da, db in bad),
            legs=bad,
        )
    axes_a = [la for la, _ in pairs]
    axes_b = [lb for _, lb in pairs]
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def _check_dims(op: np.ndarray, dims: Sequence[int]) -> int:
    total = int(np.prod(dims)) if len(dims) else 1
    if op.shape != (total, total):
        raise ShapeMismatchError(
            f"Operator of shape {op.shape} does not factor into subsystems {list(dims)}"
        )
    return total


def partial_trace(op: np.ndarray, dims: Sequence[int], traced: Sequence[int]) -> np.ndarray:
    """
    Trace out the subsystems with indices ``traced``.

    The remaining subsystems keep their relative order.
    """
    _check_dims(op, dims)
    k = len(dims)
    keep = [s for s in range(k) if s not in set(traced)]
    tensor = op.reshape(tuple(dims) * 2)
    # Bring traced row/column legs to the back in matching order
    traced_sorted = sorted(set(traced))
    order = keep + [k + s for s in keep] + traced_sorted + [k + s for s in traced_sorted]
    tensor = tensor.transpose(order)
    keep_dim = int(np.prod([dims[s] for s in keep])) if keep else 1
    traced_dim = int(np.prod([dims[s] for s in traced_sorted])) if traced_sorted else 1
    tensor = tensor.reshape(keep_dim, keep_dim, traced_dim, traced_dim)
    return np.trace(tensor, axis1=2, axis2=3)


def permute_subsystems(op: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder the subsystems of an operator so that new subsystem p is old ``order[p]``."""
    _check_dims(op, dims)
    k = len(dims)
    if sorted(order) != list(range(k)):
        raise ShapeMismatchError(f"Invalid subsystem permutation {list(order)}")
    if list(order) == list(range(k)):
        return op
    tensor = op.reshape(tuple(dims) * 2).transpose(list(order) + [k + s for s in order])
    total = op.shape[0]
    return tensor.reshape(total, total)


def embed_operator(op: np.ndarray, position: int, dims: Sequence[int], width: int = 1) -> np.ndarray:
    """Embed ``op`` acting on subsystems [position, position+width) into the full space."""
    left = int(np.prod(dims[:position])) if position else 1
    right = int(np.prod(dims[position + width:])) if position + width < len(dims) else 1
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product <<a|b>> = Tr(a^dagger b)."""
    return complex(np.vdot(a, b))


def random_hermitian(n: int, rng: np.random.Generator) -> DenseTensor:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + z.conj().T) / 2.0


def random_antihermitian(n: int, rng: np.random.Generator) -> DenseTensor:
    return 1j * random_hermitian(n, rng)


def expm(a: np.ndarray) -> np.ndarray:
    return scipy.linalg.expm(a)


def unitary_residual(u: np.ndarray) -> float:
    return max_norm(u.conj().T @ u - np.eye(u.shape[0]))


