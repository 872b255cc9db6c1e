"""
Riemannian energy gradients on the unitary group and gradient-variance samples.

For a tensor with parent unitary U in U(N) and environments (X, Y), the Riemannian
gradient is

    g = Tr_M(Y U X - U X U^dagger Y U) = G - U G^dagger U,   G = Tr_M(Y U X),

and the per-sample variance estimate is (1/N) Tr(g^dagger g). Gradients are linear in
Y, so environments of many interaction terms are summed before projecting.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from .ansatz import TensorKey, TNSInstance, site_key
from .exceptions import PreconditionError, ShapeMismatchError, UnsupportedConfigurationError
from .expectation import (
    Environment,
    MPSEvaluator,
    evaluator_for,
)
from .tensor_core import (
    DenseTensor,
    LocalOperator,
    OperatorBasis,
    UnitaryMatrix,
    expm,
    is_power_of_two,
    max_norm,
    pauli_product_basis,
)

logger = logging.getLogger(__name__)

TRACELESS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RiemannianGradient:
    """Gradient g of one tensor, on its parent-unitary space."""

    key: Optional[TensorKey]
    matrix: DenseTensor
    unitary: DenseTensor
    spectator_dim: int = 1

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    def tangent_residual(self) -> float:
        """Deviation of U^dagger g from anti-Hermiticity."""
        a = self.unitary.conj().T @ self.matrix
        return max_norm(a + a.conj().T)

    def variance_value(self) -> float:
        """(1/N) Tr(g^dagger g)."""
        return float(np.real(np.vdot(self.matrix, self.matrix))) / self.dimension

    def directional_derivative(self, a: DenseTensor) -> float:
        """d/de E(U exp(e A)) at e = 0 for anti-Hermitian A."""
        return float(np.real(np.vdot(self.matrix, self.unitary @ a)))


@dataclass(frozen=True)
class VarianceSample:
    key: TensorKey
    value: float
    seed: int


def _project(key: Optional[TensorKey], euclidean: DenseTensor, u: DenseTensor, m: int = 1) -> RiemannianGradient:
    g = euclidean - u @ euclidean.conj().T @ u
    return RiemannianGradient(key=key, matrix=g, unitary=u, spectator_dim=m)


def riemannian_gradient(
    envs: Union[Environment, Sequence[Environment]],
    unitary: UnitaryMatrix,
    key: Optional[TensorKey] = None,
) -> RiemannianGradient:
    """
    Riemannian gradient from one environment or a sum of environments.

    Raises:
        ShapeMismatchError: If an environment does not fit the unitary
    """
    if isinstance(envs, Environment):
        envs = [envs]
    u = unitary.matrix
    n = unitary.dimension
    total = np.zeros((n, n), dtype=np.complex128)
    spectators = 1
    for env in envs:
        if env.tensor_dim != n:
            raise ShapeMismatchError(
                f"Environment of {env.key} has tensor dimension {env.tensor_dim}, unitary has {n}"
            )
        total += env.euclidean_gradient(u)
        spectators = max(spectators, env.spectator_dim)
    if key is None and envs:
        key = envs[0].key
    return _project(key, total, u, spectators)


def _check_terms(terms: Iterable[LocalOperator]) -> None:
    for h in terms:
        dim = h.matrix.shape[0]
        if abs(np.trace(h.matrix)) > TRACELESS_TOL * dim:
            raise PreconditionError(f"Interaction term at site {h.start} is not traceless")


def _group_environments(
    instance: TNSInstance,
    keys: Sequence[TensorKey],
    terms: Sequence[LocalOperator],
) -> Dict[TensorKey, List[Environment]]:
    evaluator = evaluator_for(instance)
    if isinstance(evaluator, MPSEvaluator):
        sums = evaluator.ascended_sums(terms)
        return {k: evaluator.environments(k.index, terms, sums) for k in keys}
    return evaluator.environments(keys, terms)


def tensor_gradient(instance: TNSInstance, key: TensorKey, terms: Sequence[LocalOperator]) -> RiemannianGradient:
    """
    Gradient of sum_i <h_i> with respect to the tensor at ``key``.

    For homogeneous instances the tensor is shared, and the gradient sums over every
    position it occupies. For Trotterized instances it is taken with respect to the
    composed brickwall unitary.
    """
    _check_terms(terms)
    group = instance.group_of(key)
    envs = _group_environments(instance, list(group), terms)
    return riemannian_gradient([e for k in group for e in envs[k]], instance.unitary(key), key)


def layer_gradients(
    instance: TNSInstance,
    terms: Sequence[LocalOperator],
    keys: Sequence[TensorKey],
) -> Dict[TensorKey, RiemannianGradient]:
    """
    Gradients of many tensors from one shared ascent of the Hamiltonian.

    Shared (homogeneous) tensors appear once, under the first requested key of their group.
    """
    _check_terms(terms)
    wanted: List[TensorKey] = []
    owners: Dict[TensorKey, TensorKey] = {}
    for key in keys:
        group = instance.group_of(key)
        if key in owners:
            continue
        for member in group:
            owners[member] = key
            wanted.append(member)
    envs = _group_environments(instance, wanted, terms)
    collected: Dict[TensorKey, List[Environment]] = {}
    for member in wanted:
        collected.setdefault(owners[member], []).extend(envs[member])
    return {
        key: riemannian_gradient(collected[key], instance.unitary(key), key)
        for key in collected
    }


def mps_sweep_gradients(instance: TNSInstance, terms: Sequence[LocalOperator]) -> Dict[int, RiemannianGradient]:
    """Gradients of every MPS site from one right-to-left and one left-to-right sweep."""
    if instance.spec.is_hierarchical:
        raise UnsupportedConfigurationError("mps_sweep_gradients needs an MPS instance")
    keys = [site_key(j) for j in range(1, instance.spec.size + 1)]
    return {key.index: g for key, g in layer_gradients(instance, terms, keys).items()}


def term_gradients(instance: TNSInstance, key: TensorKey, terms: Sequence[LocalOperator]) -> List[RiemannianGradient]:
    """One gradient per term, in the order of ``terms``; zero for terms outside the cone."""
    return [tensor_gradient(instance, key, [h]) for h in terms]


def gradient_covariance(instance: TNSInstance, key: TensorKey, terms: Sequence[LocalOperator]) -> np.ndarray:
    """
    Matrix C[a, b] = (1/N) Re Tr(g_a^dagger g_b) of single-term gradients.

    Its total sum equals the variance sample of the summed gradient.
    """
    grads = term_gradients(instance, key, terms)
    flat = np.array([g.matrix.reshape(-1) for g in grads])
    n = instance.unitary(key).dimension
    return np.real(flat.conj() @ flat.T) / n


def variance_sample(instance: TNSInstance, key: TensorKey, terms: Sequence[LocalOperator]) -> VarianceSample:
    """
    One Monte Carlo draw of (1/N) Tr(g^dagger g) for the summed gradient.

    Raises:
        PreconditionError: If a term is not traceless
    """
    g = tensor_gradient(instance, key, terms)
    return VarianceSample(key=key, value=g.variance_value(), seed=instance.seed)


def layer_variance_values(
    instance: TNSInstance,
    terms: Sequence[LocalOperator],
    layers: Sequence[int],
    kind: str,
) -> Dict[int, float]:
    """
    Per-layer variance values of one instance, averaged over all tensors of ``kind``
    in the layer (a homogeneous layer has a single shared tensor).
    """
    spec = instance.spec
    if not spec.is_hierarchical:
        raise UnsupportedConfigurationError("layer_variance_values needs a TTNS or MERA instance")
    keys = [k for tau in layers for k in instance.keys(kind=kind, layer=tau)]
    if not keys:
        raise UnsupportedConfigurationError(f"No {kind} tensors in layers {list(layers)} of {spec.label()}")
    grads = layer_gradients(instance, terms, keys)
    values: Dict[int, List[float]] = {}
    for key, g in grads.items():
        values.setdefault(key.layer, []).append(g.variance_value())
    return {tau: float(np.mean(values[tau])) for tau in layers if tau in values}


def total_energy(instance: TNSInstance, terms: Sequence[LocalOperator]) -> float:
    evaluator = evaluator_for(instance)
    return float(sum(evaluator.expectation(h) for h in terms))


def rotation_angle_derivatives(
    instance: TNSInstance,
    key: TensorKey,
    terms: Sequence[LocalOperator],
    basis: Optional[OperatorBasis] = None,
) -> np.ndarray:
    """
    alpha_n = E(U exp(i pi s_n / 4)) - E(U exp(-i pi s_n / 4)) for every Pauli string s_n.

    Heterogeneous instances reuse the fixed environments of ``key``; only U is rotated.
    Shared tensors re-evaluate the full energy for every rotation.

    Raises:
        UnsupportedConfigurationError: If N is not a power of two
    """
    _check_terms(terms)
    unitary = instance.unitary(key)
    n = unitary.dimension
    if not is_power_of_two(n):
        raise UnsupportedConfigurationError(f"Pauli-product rotations need N = 2^k, got N={n}")
    basis = basis or pauli_product_basis(n)
    if basis.dimension != n:
        raise ShapeMismatchError(f"Basis of dimension {basis.dimension} does not match N={n}")
    u = unitary.matrix
    shared = len(instance.group_of(key)) > 1

    if shared:
        def energy(v: DenseTensor) -> float:
            return total_energy(instance.with_unitary(key, UnitaryMatrix(v)), terms)
    else:
        envs = _group_environments(instance, [key], terms)[key]

        def energy(v: DenseTensor) -> float:
            return sum(env.energy(v) for env in envs)

    alphas = np.empty(len(basis))
    for idx, sigma in enumerate(basis.elements):
        plus = expm(1j * np.pi / 4 * sigma)
        alphas[idx] = energy(u @ plus) - energy(u @ plus.conj().T)
    return alphas
