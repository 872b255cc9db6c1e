"""
Isometric tensor network families and their Haar-random instances.

Positions
---------
MPS tensors are keyed ``TensorKey("site", 0, j)`` with 1-based site ``j``. The site
tensor maps the right bond of site j onto (left bond, physical index), so that
``V_j^dagger V_j = 1`` (left-orthonormal form). All bonds have dimension chi. The right
boundary is the reference vector |0> of the last bond; the left boundary bond is an
environment leg that is traced out, so the reduced state of sites i, i+1, ... is
independent of the tensors left of i.

Hierarchical tensors are keyed ``TensorKey("isometry", tau, k)`` and
``TensorKey("disentangler", tau, k)`` for layer ``tau`` in 1..T. Level ``l`` has
``L / b^l`` sites, labelled 0-based and periodic. Layer ``tau`` maps level ``tau-1`` to
level ``tau``: disentanglers act first (renormalization direction), on the level
``tau-1`` pairs (2k+1, 2k+2) for b=2 and (3k+2, 3k+3) for b=3, then isometry k merges
sites (bk, ..., bk+b-1) into site k. The single top site is projected onto |0_chi>.
"""
import functools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Literal, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, model_validator

from .exceptions import (
    IntegrityError,
    InvalidDimensionError,
    SupportOutOfRangeError,
    UnsupportedConfigurationError,
)
from .families import FamilyInfo, FamilyRegistry
from .tensor_core import (
    DenseTensor,
    IsometryTensor,
    UnitaryMatrix,
    haar_unitary,
    is_power_of_two,
    isometry_from_unitary,
    make_rng,
)

logger = logging.getLogger(__name__)

# Residual above which a stored tensor is reported as corrupted
INTEGRITY_TOL = 1e-10


class TensorKey(NamedTuple):
    kind: str  # "site", "isometry" or "disentangler"
    layer: int
    index: int

    def __str__(self) -> str:
        if self.kind == "site":
            return f"site {self.index}"
        return f"{self.kind}({self.layer},{self.index})"


def site_key(j: int) -> TensorKey:
    return TensorKey("site", 0, j)


def isometry_key(tau: int, k: int) -> TensorKey:
    return TensorKey("isometry", tau, k)


def disentangler_key(tau: int, k: int) -> TensorKey:
    return TensorKey("disentangler", tau, k)


Tensor = Union[UnitaryMatrix, IsometryTensor]


class AnsatzSpec(BaseModel):
    """
    Immutable description of a tensor network family instance.

    ``size`` is the number of sites L for MPS and the number of layers T for
    hierarchical families (L = b^T).
    """

    family: Literal["mps", "ttns", "mera"]
    branching: int = 1
    chi: int
    d: int
    size: int
    homogeneous: bool = False
    trotter_steps: int = 0

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_structure(self) -> "AnsatzSpec":
        if self.chi < 1:
            raise ValueError("chi must be >= 1")
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.size < 1:
            raise ValueError("size must be >= 1")
        if self.trotter_steps < 0:
            raise ValueError("trotter_steps must be >= 0")
        if self.family == "mps":
            if self.branching != 1:
                raise ValueError("mps has branching ratio 1")
            if self.homogeneous or self.trotter_steps:
                raise ValueError("homogeneous and Trotterized variants are defined for ttns/mera only")
        else:
            if self.branching not in (2, 3):
                raise ValueError(f"{self.family} needs branching ratio 2 or 3")
            if self.d != self.chi:
                raise ValueError("hierarchical families use d = chi")
            if self.chi < 2:
                raise ValueError("hierarchical families need chi >= 2")
        return self

    @property
    def is_hierarchical(self) -> bool:
        return self.family != "mps"

    @property
    def layers(self) -> int:
        return self.size if self.is_hierarchical else 0

    @property
    def num_sites(self) -> int:
        return self.branching ** self.size if self.is_hierarchical else self.size

    @property
    def boundary(self) -> str:
        return "periodic" if self.is_hierarchical else "open"

    @property
    def family_key(self) -> str:
        return FamilyRegistry.key_for(self.family, self.branching)

    @property
    def info(self) -> FamilyInfo:
        return FamilyRegistry.get(self.family_key)

    def label(self) -> str:
        variant = "homogeneous" if self.homogeneous else "heterogeneous"
        trotter = f", t={self.trotter_steps}" if self.trotter_steps else ""
        return f"{self.family_key} chi={self.chi} d={self.d} size={self.size} {variant}{trotter}"


def mps_bond_dims(chi: int, d: int, length: int) -> List[int]:
    """Bond dimensions D_0..D_L of a left-orthonormal MPS; D_0 is the traced boundary leg."""
    if chi < 1:
        raise InvalidDimensionError(f"Bond dimension must be positive, got {chi}")
    return [chi] * (length + 1)


# ─────────────────────────────────────────────────────────────────────────
#  Hierarchical geometry
# ─────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ConeTransition:
    """
    One layer of a causal cone, from ``coarse`` sites (level tau) to ``fine`` sites
    (level tau-1).

    ``expanded`` lists the level tau-1 sites produced by the isometries, in isometry
    order; disentanglers act on some of them and everything outside ``fine`` is traced.
    """

    layer: int
    coarse: Tuple[int, ...]
    fine: Tuple[int, ...]
    isometries: Tuple[int, ...]
    disentanglers: Tuple[int, ...]
    expanded: Tuple[int, ...]

    def tensor_keys(self) -> List[TensorKey]:
        keys = [isometry_key(self.layer, k) for k in self.isometries]
        keys += [disentangler_key(self.layer, k) for k in self.disentanglers]
        return keys


@dataclass(frozen=True)
class HierarchicalGeometry:
    """Periodic layer geometry of a binary or ternary TTNS/MERA."""

    branching: int
    layers: int
    disentangled: bool

    def level_size(self, level: int) -> int:
        return self.branching ** (self.layers - level)

    def isometry_outputs(self, layer: int, k: int) -> Tuple[int, ...]:
        n = self.level_size(layer - 1)
        return tuple((self.branching * k + r) % n for r in range(self.branching))

    def disentangler_sites(self, layer: int, k: int) -> Tuple[int, int]:
        n = self.level_size(layer - 1)
        b = self.branching
        first = b * k + (1 if b == 2 else 2)
        return (first % n, (first + 1) % n)

    def disentangler_count(self, layer: int) -> int:
        return self.level_size(layer) if self.disentangled else 0

    def isometry_count(self, layer: int) -> int:
        return self.level_size(layer)

    def _disentangler_of_site(self, layer: int, site: int) -> Optional[int]:
        if not self.disentangled:
            return None
        b, m = self.branching, self.level_size(layer)
        offset = 1 if b == 2 else 2
        for k in ((site - offset) // b % m, (site - offset - 1) // b % m):
            if site in self.disentangler_sites(layer, k):
                return k
        return None

    def transition(self, layer: int, fine: Iterable[int]) -> ConeTransition:
        """Causal cone step from a set of level ``layer-1`` sites up to level ``layer``."""
        fine = tuple(sorted(set(fine)))
        disentanglers = sorted(
            {k for s in fine for k in [self._disentangler_of_site(layer, s)] if k is not None}
        )
        middle = set(fine)
        for k in disentanglers:
            middle.update(self.disentangler_sites(layer, k))
        isometries = sorted({s // self.branching for s in middle})
        expanded = tuple(s for k in isometries for s in self.isometry_outputs(layer, k))
        return ConeTransition(
            layer=layer,
            coarse=tuple(isometries),
            fine=fine,
            isometries=tuple(isometries),
            disentanglers=tuple(disentanglers),
            expanded=expanded,
        )

    @functools.lru_cache(maxsize=None)
    def cone_path(self, sites: Tuple[int, ...]) -> Tuple[ConeTransition, ...]:
        """Transitions for layers 1..T of the cone of the given level-0 sites."""
        path = []
        current = sites
        for layer in range(1, self.layers + 1):
            step = self.transition(layer, current)
            path.append(step)
            current = step.coarse
        return tuple(path)

    def term_sites(self, i: int, width: int) -> Tuple[int, ...]:
        """0-based level-0 sites of the term starting at 1-based site ``i``, in term order."""
        n = self.level_size(0)
        return tuple((i - 1 + r) % n for r in range(width))


def geometry_for(spec: AnsatzSpec) -> HierarchicalGeometry:
    return HierarchicalGeometry(spec.branching, spec.layers, spec.family == "mera")


# ─────────────────────────────────────────────────────────────────────────
#  Trotterized tensors
# ─────────────────────────────────────────────────────────────────────────

# Exchange angle of one Trotter gate. A gate moves the weight of a single-qubit Pauli
# operator onto two-qubit Paulis with probability sin^2(2 theta) / 2 = 1/8
TROTTER_ANGLE = np.pi / 12

_SWAP = np.eye(4, dtype=np.complex128)[[0, 2, 1, 3]]


def exchange_gate(theta: float = TROTTER_ANGLE) -> np.ndarray:
    """exp(-i theta SWAP) on two qubits."""
    return np.cos(theta) * np.eye(4, dtype=np.complex128) - 1j * np.sin(theta) * _SWAP


def sample_trotter_gate(rng: np.random.Generator, theta: float = TROTTER_ANGLE) -> UnitaryMatrix:
    """
    One brickwall gate (a x b) exp(-i theta SWAP) (c x d) with independent Haar
    single-qubit rotations a, b, c, d.

    Products of these gates converge to the Haar measure as the number of steps grows;
    a single gate is close to a product of single-qubit rotations.
    """
    a, b, c, d = (haar_unitary(2, rng).matrix for _ in range(4))
    return UnitaryMatrix(np.kron(a, b) @ exchange_gate(theta) @ np.kron(c, d))


@dataclass(frozen=True, eq=False)
class TrotterLayout:
    """
    Brickwall substructure of one tensor.

    The tensor acts on ``legs`` legs of ``2**qubits_per_leg`` dimensions; qubits are
    numbered leg by leg, most significant first. One Trotter step is a row of gates on
    qubit pairs (0,1), (2,3), ... followed by a row on (1,2), (3,4), ...; steps repeat
    ``steps`` times. ``gates`` are in application order.
    """

    qubits_per_leg: int
    legs: int
    steps: int
    gates: Tuple[Tuple[Tuple[int, int], UnitaryMatrix], ...] = field(default=())

    @property
    def qubits(self) -> int:
        return self.qubits_per_leg * self.legs

    @staticmethod
    def wiring(qubits: int, steps: int) -> List[Tuple[int, int]]:
        pairs = []
        for _ in range(steps):
            pairs += [(q, q + 1) for q in range(0, qubits - 1, 2)]
            pairs += [(q, q + 1) for q in range(1, qubits - 1, 2)]
        return pairs

    def compose(self) -> UnitaryMatrix:
        n = self.qubits
        total = np.eye(2 ** n, dtype=np.complex128)
        for (a, _), gate in self.gates:
            full = np.kron(np.kron(np.eye(2 ** a), gate.matrix), np.eye(2 ** (n - a - 2)))
            total = full @ total
        return UnitaryMatrix(total)


def sample_trotter_layout(chi: int, legs: int, steps: int, rng: np.random.Generator,
                          theta: float = TROTTER_ANGLE) -> TrotterLayout:
    """Brickwall of independently sampled exchange gates in Haar-random local frames."""
    if not is_power_of_two(chi) or chi < 2:
        raise UnsupportedConfigurationError(
            f"Trotterized tensors need chi = 2^q, got chi={chi}"
        )
    q = chi.bit_length() - 1
    pairs = TrotterLayout.wiring(q * legs, steps)
    gates = tuple((pair, sample_trotter_gate(rng, theta)) for pair in pairs)
    return TrotterLayout(qubits_per_leg=q, legs=legs, steps=steps, gates=gates)


# ─────────────────────────────────────────────────────────────────────────
#  Instances
# ─────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class TNSInstance:
    """
    A sampled network: one tensor per position.

    Homogeneous instances map every position of a (layer, kind) class to the same
    tensor object; ``groups`` records which positions share a tensor.
    """

    spec: AnsatzSpec
    seed: int
    tensors: Mapping[TensorKey, Tensor]
    counters: Mapping[TensorKey, int]
    groups: Mapping[TensorKey, Tuple[TensorKey, ...]]
    trotter: Mapping[TensorKey, TrotterLayout] = field(default_factory=dict)
    bond_dims: Tuple[int, ...] = ()
    stream: Tuple[int, ...] = ()

    def tensor(self, key: TensorKey) -> Tensor:
        try:
            return self.tensors[key]
        except KeyError:
            raise SupportOutOfRangeError(f"No tensor at position {key} in {self.spec.label()}")

    def unitary(self, key: TensorKey) -> UnitaryMatrix:
        """The unitary for ``key``; the parent unitary for isometries."""
        t = self.tensor(key)
        return t.parent if isinstance(t, IsometryTensor) else t

    def keys(self, kind: Optional[str] = None, layer: Optional[int] = None) -> List[TensorKey]:
        return [
            k for k in self.tensors
            if (kind is None or k.kind == kind) and (layer is None or k.layer == layer)
        ]

    def group_of(self, key: TensorKey) -> Tuple[TensorKey, ...]:
        return self.groups.get(key, (key,))

    def with_unitary(self, key: TensorKey, unitary: UnitaryMatrix) -> "TNSInstance":
        """
        New instance with the unitary at ``key`` replaced.

        For homogeneous instances every position sharing the tensor is replaced.
        """
        old = self.tensor(key)
        if isinstance(old, IsometryTensor):
            new: Tensor = IsometryTensor(parent=unitary, input_dim=old.input_dim, ancilla_dim=old.ancilla_dim)
        else:
            new = unitary
        tensors = dict(self.tensors)
        for k in self.group_of(key):
            tensors[k] = new
        return TNSInstance(
            spec=self.spec,
            seed=self.seed,
            tensors=tensors,
            counters=self.counters,
            groups=self.groups,
            trotter={k: v for k, v in self.trotter.items() if k not in self.group_of(key)},
            bond_dims=self.bond_dims,
            stream=self.stream,
        )

    def max_residual(self) -> float:
        return max((t.residual() for t in self.tensors.values()), default=0.0)


def _tensor_plan(spec: AnsatzSpec) -> List[Tuple[TensorKey, int, int]]:
    """(key, parent dimension, input dimension) for every position, in sampling order."""
    plan = []
    if not spec.is_hierarchical:
        dims = mps_bond_dims(spec.chi, spec.d, spec.size)
        for j in range(1, spec.size + 1):
            plan.append((site_key(j), dims[j - 1] * spec.d, dims[j]))
        return plan
    geometry = geometry_for(spec)
    chi, b = spec.chi, spec.branching
    for tau in range(1, spec.layers + 1):
        for k in range(geometry.disentangler_count(tau)):
            plan.append((disentangler_key(tau, k), chi * chi, chi * chi))
        for k in range(geometry.isometry_count(tau)):
            plan.append((isometry_key(tau, k), chi ** b, chi))
    return plan


def _class_key(key: TensorKey) -> TensorKey:
    return TensorKey(key.kind, key.layer, 0)


def sample_instance(spec: AnsatzSpec, seed: int, stream: Tuple[int, ...] = ()) -> TNSInstance:
    """
    Draw a Haar-random instance of ``spec``.

    Every free tensor gets its own stream ``make_rng(seed, *stream, counter)``, so Monte
    Carlo sample s passes ``stream=(s,)`` and is reproducible on its own; homogeneous
    instances draw one tensor per (layer, kind) class, using the stream of the class's
    first position. Trotterized tensors are brickwall products of exchange gates in
    Haar-random local frames (see :func:`sample_trotter_gate`).

    Raises:
        UnsupportedConfigurationError: If Trotterization is requested with chi != 2^q
    """
    if spec.trotter_steps and not is_power_of_two(spec.chi):
        raise UnsupportedConfigurationError(
            f"Trotterized tensors need chi = 2^q, got chi={spec.chi}"
        )
    plan = _tensor_plan(spec)
    tensors: Dict[TensorKey, Tensor] = {}
    counters: Dict[TensorKey, int] = {}
    trotter: Dict[TensorKey, TrotterLayout] = {}
    shared: Dict[TensorKey, Tuple[Tensor, Optional[TrotterLayout]]] = {}
    members: Dict[TensorKey, List[TensorKey]] = {}

    for counter, (key, parent_dim, input_dim) in enumerate(plan):
        counters[key] = counter
        cls = _class_key(key)
        if spec.homogeneous and cls in shared:
            tensor, layout = shared[cls]
        else:
            rng = make_rng(seed, *stream, counter)
            layout = None
            if spec.trotter_steps:
                legs = round(np.log(parent_dim) / np.log(spec.chi))
                layout = sample_trotter_layout(spec.chi, legs, spec.trotter_steps, rng)
                unitary = layout.compose()
            else:
                unitary = haar_unitary(parent_dim, rng)
            tensor = unitary if key.kind == "disentangler" else isometry_from_unitary(unitary, input_dim)
            if spec.homogeneous:
                shared[cls] = (tensor, layout)
        tensors[key] = tensor
        if layout is not None:
            trotter[key] = layout
        members.setdefault(cls, []).append(key)

    groups: Dict[TensorKey, Tuple[TensorKey, ...]] = {}
    if spec.homogeneous:
        for keys in members.values():
            for key in keys:
                groups[key] = tuple(keys)

    bond_dims = tuple(mps_bond_dims(spec.chi, spec.d, spec.size)) if not spec.is_hierarchical else ()
    logger.debug("Sampled %s with seed %d (%d tensors)", spec.label(), seed, len(tensors))
    return TNSInstance(
        spec=spec,
        seed=seed,
        stream=tuple(stream),
        tensors=tensors,
        counters=counters,
        groups=groups,
        trotter=trotter,
        bond_dims=bond_dims,
    )


def mps_left_orthonormal_form(instance: TNSInstance, tol: float = INTEGRITY_TOL) -> TNSInstance:
    """
    Verify that every MPS site tensor satisfies V_j^dagger V_j = 1.

    Sampled instances are left-orthonormal by construction, so this returns the
    instance unchanged.

    Raises:
        IntegrityError: Naming the first site whose residual exceeds ``tol``
    """
    if instance.spec.family != "mps":
        raise UnsupportedConfigurationError("Left-orthonormal form applies to MPS only")
    for j in range(1, instance.spec.size + 1):
        residual = instance.tensor(site_key(j)).residual()
        if residual > tol:
            raise IntegrityError(site_key(j), residual)
    return instance


def causal_cone_sites(instance: TNSInstance, key: TensorKey, width: Optional[int] = None) -> FrozenSet[int]:
    """
    1-based start sites i of the ``width``-site terms whose expectation depends on ``key``.

    For MPS this is {1, ..., min(j, L - width + 1)}; for hierarchical networks it is
    found by walking every term's cone.
    """
    spec = instance.spec
    width = width or spec.info.default_width
    if key not in instance.tensors:
        raise SupportOutOfRangeError(f"No tensor at position {key} in {spec.label()}")
    if not spec.is_hierarchical:
        return frozenset(range(1, min(key.index, spec.size - width + 1) + 1))
    geometry = geometry_for(spec)
    sites = set()
    for i in range(1, spec.num_sites + 1):
        path = geometry.cone_path(geometry.term_sites(i, width))
        if key in path[key.layer - 1].tensor_keys():
            sites.add(i)
    return frozenset(sites)


# ─────────────────────────────────────────────────────────────────────────
#  Statevector oracle
# ─────────────────────────────────────────────────────────────────────────

MAX_STATEVECTOR_DIM = 2 ** 16


def _apply_to_legs(state: np.ndarray, op: np.ndarray, legs: Tuple[int, ...], out_dims: Tuple[int, ...]) -> np.ndarray:
    """Apply ``op`` (out x in) to state legs ``legs``; outputs replace the legs in place."""
    in_dims = tuple(state.shape[l] for l in legs)
    tensor = op.reshape(out_dims + in_dims)
    k = len(legs)
    result = np.tensordot(tensor, state, axes=(list(range(k, 2 * k)), list(legs)))
    # Output legs are now first; move them to where the inputs were
    return np.moveaxis(result, list(range(k)), list(legs))


def statevector(instance: TNSInstance) -> DenseTensor:
    """
    Full state of the network, as a tensor with one leg per physical site.

    MPS states carry the traced left boundary leg as their first leg.

    Raises:
        UnsupportedConfigurationError: If the Hilbert space exceeds the oracle limit
    """
    spec = instance.spec
    dim = spec.d ** spec.num_sites * (1 if spec.is_hierarchical else spec.chi)
    if dim > MAX_STATEVECTOR_DIM:
        raise UnsupportedConfigurationError(
            f"Statevector of dimension {dim} exceeds {MAX_STATEVECTOR_DIM}"
        )
    if not spec.is_hierarchical:
        dims = instance.bond_dims
        # Bond 0 is an open environment leg, not <0|; site reductions trace it out
        psi = np.eye(dims[0], dtype=np.complex128)
        for j in range(1, spec.size + 1):
            v = instance.tensor(site_key(j)).matrix.reshape(dims[j - 1], spec.d, dims[j])
            psi = np.tensordot(psi, v, axes=([psi.ndim - 1], [0]))
        return psi[..., 0]

    geometry = geometry_for(spec)
    chi, b = spec.chi, spec.branching
    state = np.zeros((chi,), dtype=np.complex128)
    state[0] = 1.0
    for tau in range(spec.layers, 0, -1):
        n_fine = geometry.level_size(tau - 1)
        # Isometries: coarse leg k -> fine legs (bk, ..., bk+b-1)
        # Legs: outputs of isometries 0..k-1 in `order`, then the unprocessed coarse legs
        order: List[int] = []
        fine = state
        for k in range(geometry.isometry_count(tau)):
            v = instance.tensor(isometry_key(tau, k)).matrix.reshape((chi,) * b + (chi,))
            leg = len(order)
            fine = np.tensordot(v, fine, axes=([b], [leg]))
            fine = np.moveaxis(fine, list(range(b)), list(range(leg, leg + b)))
            order.extend(geometry.isometry_outputs(tau, k))
        state = fine.transpose([order.index(s) for s in range(n_fine)])
        for k in range(geometry.disentangler_count(tau)):
            u = instance.tensor(disentangler_key(tau, k)).matrix
            state = _apply_to_legs(state, u, geometry.disentangler_sites(tau, k), (chi, chi))
    return state


def statevector_expectation(instance: TNSInstance, op: np.ndarray, sites: Tuple[int, ...]) -> float:
    """<psi| op |psi> with ``op`` acting on the 0-based physical ``sites``, in that order."""
    psi = statevector(instance)
    if not instance.spec.is_hierarchical:
        sites = tuple(s + 1 for s in sites)
    dims = tuple(psi.shape[s] for s in sites)
    phi = _apply_to_legs(psi, op, sites, dims)
    return float(np.real(np.vdot(psi, phi)))


# ─────────────────────────────────────────────────────────────────────────
#  Serialization
# ─────────────────────────────────────────────────────────────────────────

INSTANCE_FORMAT = "isotns-instance/1"


def instance_to_dict(instance: TNSInstance) -> Dict:
    """
    JSON-ready container: spec, seed, and every parent unitary as shape plus real and
    imaginary row-major entries. Trotter gate lists are not stored, only their products.
    """
    tensors = []
    for key, tensor in instance.tensors.items():
        unitary = instance.unitary(key)
        tensors.append({
            "kind": key.kind,
            "layer": key.layer,
            "index": key.index,
            "input_dim": tensor.input_dim if isinstance(tensor, IsometryTensor) else None,
            "shape": list(unitary.matrix.shape),
            "real": unitary.matrix.real.ravel().tolist(),
            "imag": unitary.matrix.imag.ravel().tolist(),
        })
    return {
        "format": INSTANCE_FORMAT,
        "spec": instance.spec.model_dump(),
        "seed": instance.seed,
        "stream": list(instance.stream),
        "tensors": tensors,
    }


def instance_from_dict(data: Mapping) -> TNSInstance:
    """
    Rebuild an instance written by :func:`instance_to_dict`.

    Raises:
        UnsupportedConfigurationError: If the container format is unknown
    """
    if data.get("format") != INSTANCE_FORMAT:
        raise UnsupportedConfigurationError(f"Unknown instance format: {data.get('format')!r}")
    spec = AnsatzSpec(**data["spec"])
    counters = {key: n for n, (key, _, _) in enumerate(_tensor_plan(spec))}
    tensors: Dict[TensorKey, Tensor] = {}
    shared: Dict[TensorKey, Tensor] = {}
    members: Dict[TensorKey, List[TensorKey]] = {}
    for entry in data["tensors"]:
        key = TensorKey(entry["kind"], entry["layer"], entry["index"])
        cls = _class_key(key)
        if spec.homogeneous and cls in shared:
            tensors[key] = shared[cls]
        else:
            matrix = (np.array(entry["real"]) + 1j * np.array(entry["imag"])).reshape(entry["shape"])
            unitary = UnitaryMatrix(matrix.astype(np.complex128))
            tensor: Tensor = unitary if entry["input_dim"] is None else isometry_from_unitary(unitary, entry["input_dim"])
            tensors[key] = shared[cls] = tensor
        members.setdefault(cls, []).append(key)
    groups = (
        {key: tuple(keys) for keys in members.values() for key in keys} if spec.homogeneous else {}
    )
    return TNSInstance(
        spec=spec,
        seed=int(data["seed"]),
        stream=tuple(data.get("stream", ())),
        tensors=tensors,
        counters=counters,
        groups=groups,
        bond_dims=tuple(mps_bond_dims(spec.chi, spec.d, spec.size)) if not spec.is_hierarchical else (),
    )
