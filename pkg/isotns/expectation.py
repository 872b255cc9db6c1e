"""
Causal-cone evaluation of local expectation values and gradient environments.

Every evaluation is a small *program* over a register of labelled legs: attach a
reference ancilla |0>, apply a (parent) unitary to some legs, discard legs. Running a
program forward (Schroedinger picture) descends a density operator through the
cone; running it backward (Heisenberg picture) ascends an operator. The two
directions are Hilbert-Schmidt adjoints of each other.

For a tensor applied at step s, the environment pair is

* X: the register state right before step s, inputs first,
* Y: the backward operator right after step s, outputs first, spectators in the
  same order as in X,

so that the term's energy is Tr(X U^dagger Y U) with U acting on the first factor.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .ansatz import (
    ConeTransition,
    HierarchicalGeometry,
    TensorKey,
    TNSInstance,
    causal_cone_sites,
    disentangler_key,
    geometry_for,
    isometry_key,
    site_key,
)
from .exceptions import (
    ConeMembershipError,
    ShapeMismatchError,
    SupportOutOfRangeError,
    UnsupportedConfigurationError,
)
from .tensor_core import DenseTensor, LocalOperator, build_interaction, partial_trace, permute_subsystems

logger = logging.getLogger(__name__)

Label = Hashable


# ─────────────────────────────────────────────────────────────────────────
#  Labelled register
# ─────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class LabeledOperator:
    """An operator on a register whose legs carry labels."""

    labels: Tuple[Label, ...]
    dims: Tuple[int, ...]
    matrix: DenseTensor

    @classmethod
    def scalar(cls, value: complex = 1.0) -> "LabeledOperator":
        return cls((), (), np.full((1, 1), value, dtype=np.complex128))

    @classmethod
    def reference(cls, label: Label, dim: int) -> "LabeledOperator":
        """|0><0| on a single leg."""
        m = np.zeros((dim, dim), dtype=np.complex128)
        m[0, 0] = 1.0
        return cls((label,), (dim,), m)

    def permuted(self, labels: Sequence[Label]) -> "LabeledOperator":
        labels = tuple(labels)
        if labels == self.labels:
            return self
        if len(labels) != len(self.labels) or set(labels) != set(self.labels):
            raise ShapeMismatchError(f"Cannot align register {self.labels} to {labels}")
        order = [self.labels.index(l) for l in labels]
        return LabeledOperator(
            labels,
            tuple(self.dims[i] for i in order),
            permute_subsystems(self.matrix, self.dims, order),
        )

    def front(self, labels: Sequence[Label]) -> "LabeledOperator":
        """Move ``labels`` to the front, keeping the other legs in their current order."""
        labels = tuple(labels)
        return self.permuted(labels + tuple(l for l in self.labels if l not in labels))

    def dim_of(self, labels: Iterable[Label]) -> int:
        return int(np.prod([self.dims[self.labels.index(l)] for l in labels], dtype=np.int64))

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def __add__(self, other: "LabeledOperator") -> "LabeledOperator":
        other = other.permuted(self.labels)
        return LabeledOperator(self.labels, self.dims, self.matrix + other.matrix)


@dataclass(frozen=True)
class Attach:
    label: Label
    dim: int


@dataclass(frozen=True)
class Apply:
    key: TensorKey
    inputs: Tuple[Label, ...]
    input_dims: Tuple[int, ...]
    outputs: Tuple[Label, ...]
    output_dims: Tuple[int, ...]


@dataclass(frozen=True)
class Discard:
    labels: Tuple[Label, ...]
    dims: Tuple[int, ...]


Step = Union[Attach, Apply, Discard]


@dataclass(frozen=True)
class ConeProgram:
    """Steps taking a register on ``initial`` legs to one on ``final`` legs."""

    initial: Tuple[Label, ...]
    steps: Tuple[Step, ...]
    final: Tuple[Label, ...]

    def keys(self) -> List[TensorKey]:
        return [s.key for s in self.steps if isinstance(s, Apply)]


Unitaries = Mapping[TensorKey, DenseTensor]


def _split(op: LabeledOperator, n_front: int) -> Tuple[int, int]:
    n = int(np.prod(op.dims[:n_front], dtype=np.int64))
    return n, op.matrix.shape[0] // n


def conjugate(u: DenseTensor, op4: np.ndarray) -> np.ndarray:
    """U op U^dagger on the first factor of an (n, m, n, m) block operator."""
    t = np.tensordot(u, op4, axes=(1, 0))
    return np.tensordot(t, u.conj(), axes=(2, 1)).transpose(0, 1, 3, 2)


def adjoint_conjugate(u: DenseTensor, op4: np.ndarray) -> np.ndarray:
    """U^dagger op U on the first factor of an (n, m, n, m) block operator."""
    t = np.tensordot(u.conj(), op4, axes=(0, 0))
    return np.tensordot(t, u, axes=(2, 0)).transpose(0, 1, 3, 2)


def _forward(op: LabeledOperator, step: Step, unitaries: Unitaries) -> LabeledOperator:
    if isinstance(step, Attach):
        ref = LabeledOperator.reference(step.label, step.dim)
        return LabeledOperator(op.labels + ref.labels, op.dims + ref.dims, np.kron(op.matrix, ref.matrix))
    if isinstance(step, Discard):
        traced = [op.labels.index(l) for l in step.labels]
        keep = tuple(i for i in range(len(op.labels)) if i not in traced)
        return LabeledOperator(
            tuple(op.labels[i] for i in keep),
            tuple(op.dims[i] for i in keep),
            partial_trace(op.matrix, op.dims, traced),
        )
    x = op.front(step.inputs)
    u = unitaries[step.key]
    n, m = _split(x, len(step.inputs))
    if u.shape != (n, n):
        raise ShapeMismatchError(f"Tensor {step.key} has shape {u.shape}, register legs need {(n, n)}")
    x4 = x.matrix.reshape(n, m, n, m)
    out = conjugate(u, x4)
    rest = x.labels[len(step.inputs):]
    return LabeledOperator(step.outputs + rest, step.output_dims + x.dims[len(step.inputs):], out.reshape(n * m, n * m))


def _backward(op: LabeledOperator, step: Step, unitaries: Unitaries) -> LabeledOperator:
    if isinstance(step, Attach):
        y = op.front((step.label,))
        c, r = _split(y, 1)
        return LabeledOperator(y.labels[1:], y.dims[1:], y.matrix.reshape(c, r, c, r)[0, :, 0, :].copy())
    if isinstance(step, Discard):
        identity = np.eye(int(np.prod(step.dims, dtype=np.int64)), dtype=np.complex128)
        return LabeledOperator(op.labels + step.labels, op.dims + step.dims, np.kron(op.matrix, identity))
    y = op.front(step.outputs)
    u = unitaries[step.key]
    n, m = _split(y, len(step.outputs))
    y4 = y.matrix.reshape(n, m, n, m)
    out = adjoint_conjugate(u, y4)
    rest = y.labels[len(step.outputs):]
    return LabeledOperator(step.inputs + rest, step.input_dims + y.dims[len(step.outputs):], out.reshape(n * m, n * m))


def run_forward(program: ConeProgram, rho: LabeledOperator, unitaries: Unitaries) -> List[LabeledOperator]:
    """Register states before each step, followed by the final state."""
    states = [rho]
    for step in program.steps:
        states.append(_forward(states[-1], step, unitaries))
    return states


def run_backward(program: ConeProgram, y: LabeledOperator, unitaries: Unitaries) -> List[LabeledOperator]:
    """Backward operators aligned with the forward layout: entry s lives where state s does."""
    ops = [y]
    for step in reversed(program.steps):
        ops.append(_backward(ops[-1], step, unitaries))
    ops.reverse()
    return ops


# ─────────────────────────────────────────────────────────────────────────
#  Transition maps and environments
# ─────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class TransitionMap:
    """
    One cone step: ``descend`` maps densities on the initial legs to densities on the
    final legs (completely positive, trace preserving), ``ascend`` is its adjoint.
    """

    program: ConeProgram
    unitaries: Unitaries
    move: str = ""

    def descend(self, rho: LabeledOperator) -> LabeledOperator:
        return run_forward(self.program, rho.permuted(self.program.initial), self.unitaries)[-1].permuted(
            self.program.final
        )

    def ascend(self, op: LabeledOperator) -> LabeledOperator:
        return run_backward(self.program, op.permuted(self.program.final), self.unitaries)[0].permuted(
            self.program.initial
        )


@dataclass(frozen=True, eq=False)
class Environment:
    """
    Environment of one tensor for one term or a sum of terms.

    ``x`` and ``y`` are (N*M) x (N*M) matrices, tensor factor first.
    """

    key: TensorKey
    x: DenseTensor
    y: DenseTensor
    tensor_dim: int
    spectator_dim: int

    def _blocks(self) -> Tuple[np.ndarray, np.ndarray]:
        n, m = self.tensor_dim, self.spectator_dim
        return self.x.reshape(n, m, n, m), self.y.reshape(n, m, n, m)

    def energy(self, unitary: DenseTensor) -> float:
        """Tr(X U^dagger Y U) with U on the tensor factor."""
        x4, y4 = self._blocks()
        uxu = conjugate(unitary, x4)
        return float(np.real(np.sum(uxu * y4.transpose(2, 3, 0, 1))))

    def euclidean_gradient(self, unitary: DenseTensor) -> DenseTensor:
        """Tr_M(Y U X), the derivative of the energy with respect to conj(U)."""
        x4, y4 = self._blocks()
        ux = np.tensordot(unitary, x4, axes=(1, 0))
        return np.tensordot(y4, ux, axes=([1, 2, 3], [3, 0, 1]))


def _environments_from(
    program: ConeProgram,
    rho: LabeledOperator,
    y: LabeledOperator,
    unitaries: Unitaries,
    capture: Iterable[TensorKey],
) -> Dict[TensorKey, Environment]:
    capture = set(capture)
    states = run_forward(program, rho.permuted(program.initial), unitaries)
    ops = run_backward(program, y.permuted(program.final), unitaries)
    found = {}
    for s, step in enumerate(program.steps):
        if not isinstance(step, Apply) or step.key not in capture:
            continue
        x = states[s].front(step.inputs)
        after = ops[s + 1].permuted(states[s + 1].labels)
        n, m = _split(x, len(step.inputs))
        found[step.key] = Environment(step.key, x.matrix, after.matrix, n, m)
    return found


def _term_operator(h: LocalOperator, labels: Sequence[Label]) -> LabeledOperator:
    return LabeledOperator(tuple(labels), (h.chi,) * h.width, h.matrix)


def _check_term(instance: TNSInstance, h: LocalOperator) -> None:
    spec = instance.spec
    if h.chi != spec.d:
        raise ShapeMismatchError(f"Interaction acts on dimension {h.chi}, sites have d={spec.d}")
    if not spec.is_hierarchical:
        if h.start < 1 or h.start + h.width - 1 > spec.size:
            raise SupportOutOfRangeError(
                f"Support {h.start}..{h.start + h.width - 1} outside sites 1..{spec.size}"
            )
        return
    if not 1 <= h.start <= spec.num_sites:
        raise SupportOutOfRangeError(f"Site {h.start} outside 1..{spec.num_sites}")
    if h.width > spec.info.default_width:
        raise UnsupportedConfigurationError(
            f"{spec.family_key} cones close for supports up to {spec.info.default_width} sites, got {h.width}"
        )


# ─────────────────────────────────────────────────────────────────────────
#  MPS
# ─────────────────────────────────────────────────────────────────────────

def _bond(j: int) -> Label:
    return ("bond", j)


def _phys(j: int) -> Label:
    return ("phys", j)


class MPSEvaluator:
    """
    Left-orthonormal MPS evaluator.

    Densities ``rho_j`` live on bond j (between sites j and j+1); ``rho_L = |0><0|`` and
    each site transition descends one bond to the left.
    """

    def __init__(self, instance: TNSInstance):
        if instance.spec.is_hierarchical:
            raise UnsupportedConfigurationError("MPSEvaluator needs an MPS instance")
        self.instance = instance
        self.spec = instance.spec
        self.chi, self.d, self.length = instance.spec.chi, instance.spec.d, instance.spec.size
        self.unitaries = {k: instance.unitary(k).matrix for k in instance.tensors}
        self._densities: Dict[int, LabeledOperator] = {}

    def _site_steps(self, j: int) -> List[Step]:
        anc = ("anc", j)
        return [
            Attach(anc, self.d),
            Apply(site_key(j), (_bond(j), anc), (self.chi, self.d), (_bond(j - 1), _phys(j)), (self.chi, self.d)),
        ]

    def site_map(self, j: int) -> TransitionMap:
        """The site transition map M_j from bond j to bond j-1."""
        steps = self._site_steps(j) + [Discard((_phys(j),), (self.d,))]
        return TransitionMap(ConeProgram((_bond(j),), tuple(steps), (_bond(j - 1),)), self.unitaries, move="site")

    def density(self, j: int) -> LabeledOperator:
        if j in self._densities:
            return self._densities[j]
        if not 0 <= j <= self.length:
            raise SupportOutOfRangeError(f"Bond {j} outside 0..{self.length}")
        start = min((b for b in self._densities if b >= j), default=None)
        if start is None:
            start = self.length
            self._densities[start] = LabeledOperator.reference(_bond(start), self.chi)
        rho = self._densities[start]
        for b in range(start, j, -1):
            rho = self.site_map(b).descend(rho)
            self._densities[b - 1] = rho
        return self._densities[j]

    def term_program(self, i: int, width: int) -> ConeProgram:
        last = i + width - 1
        steps: List[Step] = []
        for j in range(last, i - 1, -1):
            steps += self._site_steps(j)
        steps.append(Discard((_bond(i - 1),), (self.chi,)))
        return ConeProgram((_bond(last),), tuple(steps), tuple(_phys(j) for j in range(i, last + 1)))

    def expectation(self, h: LocalOperator) -> float:
        _check_term(self.instance, h)
        program = self.term_program(h.start, h.width)
        final = run_forward(program, self.density(h.start + h.width - 1), self.unitaries)[-1]
        y = _term_operator(h, program.final).permuted(final.labels)
        return float(np.real(np.trace(final.matrix @ y.matrix)))

    def ascend_term(self, h: LocalOperator) -> LabeledOperator:
        """The term ascended to the bond at its right edge."""
        program = self.term_program(h.start, h.width)
        return run_backward(program, _term_operator(h, program.final), self.unitaries)[0]

    def ascended_sums(self, terms: Sequence[LocalOperator]) -> List[LabeledOperator]:
        """
        B_0..B_L: the sum of all terms ending at or left of bond k, ascended to bond k.
        """
        by_end: Dict[int, List[LocalOperator]] = {}
        for h in terms:
            _check_term(self.instance, h)
            by_end.setdefault(h.start + h.width - 1, []).append(h)
        sums = [LabeledOperator((_bond(0),), (self.chi,), np.zeros((self.chi, self.chi), dtype=np.complex128))]
        for k in range(1, self.length + 1):
            b = self.site_map(k).ascend(sums[-1])
            for h in by_end.get(k, ()):
                b = b + self.ascend_term(h)
            sums.append(b)
        return sums

    def environments(self, j: int, terms: Sequence[LocalOperator],
                     sums: Optional[List[LabeledOperator]] = None) -> List[Environment]:
        """
        Environments of site j for a list of terms, summed where the spectator space
        agrees: one environment for every term ending left of j, one per term covering j.
        """
        if sums is None:
            sums = self.ascended_sums([h for h in terms if h.start + h.width - 1 < j])
        envs = []
        if np.any(sums[j - 1].matrix):
            envs.append(self._left_environment(j, sums[j - 1]))
        envs += [self._covering_environment(j, h) for h in terms if h.start <= j <= h.start + h.width - 1]
        return envs

    def term_environment(self, j: int, h: LocalOperator) -> Environment:
        """Environment of site j for a single term; j must lie in the term's cone."""
        _check_term(self.instance, h)
        if not h.start <= j:
            raise ConeMembershipError(site_key(j), h.start)
        if j <= h.start + h.width - 1:
            return self._covering_environment(j, h)
        return self._left_environment(j, self.ascended_sums([h])[j - 1])

    def _left_environment(self, j: int, left: LabeledOperator) -> Environment:
        """Site j against terms lying entirely left of it, already ascended to bond j-1."""
        key = site_key(j)
        program = ConeProgram((_bond(j),), tuple(self._site_steps(j)), (_bond(j - 1), _phys(j)))
        y = LabeledOperator((_bond(j - 1), _phys(j)), (self.chi, self.d), np.kron(left.matrix, np.eye(self.d)))
        return _environments_from(program, self.density(j), y, self.unitaries, [key])[key]

    def _covering_environment(self, j: int, h: LocalOperator) -> Environment:
        """Site j against a term whose support contains j."""
        program = self.term_program(h.start, h.width)
        rho = self.density(h.start + h.width - 1)
        return _environments_from(program, rho, _term_operator(h, program.final), self.unitaries, [site_key(j)])[site_key(j)]


# ─────────────────────────────────────────────────────────────────────────
#  Hierarchical networks
# ─────────────────────────────────────────────────────────────────────────

def _site(level: int, s: int) -> Label:
    return ("site", level, s)


def _window_start(sites: Sequence[int], n: int) -> int:
    present = set(sites)
    if len(present) == n:
        return min(present)
    for s in sorted(present):
        if (s - 1) % n not in present:
            return s
    return min(present)


_MOVE_NAMES = {(2, 1): "left", (2, 2): "right"}


class HierarchicalEvaluator:
    """
    TTNS/MERA evaluator with per-instance caches of cone transition maps and descended
    densities. Cones are identified by (level, sorted site tuple).
    """

    def __init__(self, instance: TNSInstance):
        if not instance.spec.is_hierarchical:
            raise UnsupportedConfigurationError("HierarchicalEvaluator needs a TTNS or MERA instance")
        self.instance = instance
        self.spec = instance.spec
        self.geometry: HierarchicalGeometry = geometry_for(instance.spec)
        self.chi = instance.spec.chi
        self.unitaries = {k: instance.unitary(k).matrix for k in instance.tensors}
        self._maps: Dict[Tuple[int, Tuple[int, ...]], TransitionMap] = {}
        self._densities: Dict[Tuple[int, Tuple[int, ...]], LabeledOperator] = {}

    def _program(self, step: ConeTransition) -> ConeProgram:
        geo, chi, b, tau = self.geometry, self.chi, self.spec.branching, step.layer
        fine = set(step.fine)
        pending = {k: geo.disentangler_sites(tau, k) for k in step.disentanglers}
        produced: List[int] = []
        steps: List[Step] = []
        for k in step.isometries:
            ancillas = tuple(("anc", tau, k, r) for r in range(1, b))
            steps += [Attach(a, chi) for a in ancillas]
            outputs = geo.isometry_outputs(tau, k)
            steps.append(Apply(
                isometry_key(tau, k),
                (_site(tau, k),) + ancillas,
                (chi,) * b,
                tuple(_site(tau - 1, s) for s in outputs),
                (chi,) * b,
            ))
            produced += outputs
            for dk, (p, q) in list(pending.items()):
                if p in produced and q in produced:
                    legs = (_site(tau - 1, p), _site(tau - 1, q))
                    steps.append(Apply(disentangler_key(tau, dk), legs, (chi, chi), legs, (chi, chi)))
                    del pending[dk]
            waiting = {s for sites in pending.values() for s in sites}
            drop = [s for s in produced if s not in fine and s not in waiting]
            if drop:
                steps.append(Discard(tuple(_site(tau - 1, s) for s in drop), (chi,) * len(drop)))
                produced = [s for s in produced if s not in drop]
        return ConeProgram(
            tuple(_site(tau, c) for c in step.coarse),
            tuple(steps),
            tuple(_site(tau - 1, s) for s in step.fine),
        )

    def transition_map(self, layer: int, fine: Sequence[int]) -> TransitionMap:
        """Map from the cone above ``fine`` (level ``layer``) down to ``fine`` (level ``layer-1``)."""
        fine = tuple(sorted(set(fine)))
        cached = self._maps.get((layer, fine))
        if cached is not None:
            return cached
        step = self.geometry.transition(layer, fine)
        n = self.geometry.level_size(layer - 1)
        offset = (_window_start(step.fine, n) - _window_start(step.expanded, n)) % n
        move = _MOVE_NAMES.get((self.spec.branching, offset), f"shift-{offset}") if self.spec.family == "mera" else "tree"
        tmap = TransitionMap(self._program(step), self.unitaries, move)
        self._maps[(layer, fine)] = tmap
        return tmap

    def density(self, level: int, cone: Sequence[int]) -> LabeledOperator:
        """Reduced density of the level ``level`` sites ``cone``, legs in sorted order."""
        cone = tuple(sorted(set(cone)))
        cached = self._densities.get((level, cone))
        if cached is not None:
            return cached
        if level == self.spec.layers:
            if cone != (0,):
                raise SupportOutOfRangeError(f"Top level has a single site, got {cone}")
            rho = LabeledOperator.reference(_site(level, 0), self.chi)
        else:
            tmap = self.transition_map(level + 1, cone)
            rho = tmap.descend(self.density(level + 1, self.geometry.transition(level + 1, cone).coarse))
        self._densities[(level, cone)] = rho
        return rho

    def _term_labels(self, h: LocalOperator) -> Tuple[Label, ...]:
        return tuple(_site(0, s) for s in self.geometry.term_sites(h.start, h.width))

    def expectation(self, h: LocalOperator) -> float:
        _check_term(self.instance, h)
        labels = self._term_labels(h)
        rho = self.density(0, [l[2] for l in labels])
        y = _term_operator(h, labels).permuted(rho.labels)
        return float(np.real(np.trace(rho.matrix @ y.matrix)))

    def ascended_hamiltonian(self, terms: Sequence[LocalOperator], up_to: int) -> List[Dict[Tuple[int, ...], LabeledOperator]]:
        """
        Terms summed per cone and ascended level by level: entry l maps each cone at
        level l to the sum of all terms ascended onto it.
        """
        level0: Dict[Tuple[int, ...], LabeledOperator] = {}
        for h in terms:
            _check_term(self.instance, h)
            labels = self._term_labels(h)
            cone = tuple(sorted(l[2] for l in labels))
            op = _term_operator(h, labels).permuted(tuple(_site(0, s) for s in cone))
            level0[cone] = level0[cone] + op if cone in level0 else op
        levels = [level0]
        for layer in range(1, up_to + 1):
            nxt: Dict[Tuple[int, ...], LabeledOperator] = {}
            for cone, op in levels[-1].items():
                coarse = self.geometry.transition(layer, cone).coarse
                up = self.transition_map(layer, cone).ascend(op)
                nxt[coarse] = nxt[coarse] + up if coarse in nxt else up
            levels.append(nxt)
        return levels

    def environments(self, keys: Iterable[TensorKey], terms: Sequence[LocalOperator],
                     levels: Optional[List[Dict[Tuple[int, ...], LabeledOperator]]] = None) -> Dict[TensorKey, List[Environment]]:
        """
        Summed environments of every tensor in ``keys``: one per cone through the
        tensor's layer, with all terms sharing that cone summed into Y.
        """
        keys = list(keys)
        top = max((k.layer for k in keys), default=0)
        if levels is None:
            levels = self.ascended_hamiltonian(terms, top - 1 if top else 0)
        found: Dict[TensorKey, List[Environment]] = {k: [] for k in keys}
        by_layer: Dict[int, set] = {}
        for k in keys:
            by_layer.setdefault(k.layer, set()).add(k)
        for layer, wanted in by_layer.items():
            for cone, y in levels[layer - 1].items():
                tmap = self.transition_map(layer, cone)
                hits = wanted.intersection(tmap.program.keys())
                if not hits:
                    continue
                coarse = self.geometry.transition(layer, cone).coarse
                envs = _environments_from(tmap.program, self.density(layer, coarse), y, self.unitaries, hits)
                for k, env in envs.items():
                    found[k].append(env)
        return found

    def term_environment(self, key: TensorKey, h: LocalOperator) -> Environment:
        _check_term(self.instance, h)
        labels = self._term_labels(h)
        path = self.geometry.cone_path(tuple(l[2] for l in labels))
        if key not in path[key.layer - 1].tensor_keys():
            raise ConeMembershipError(key, h.start)
        envs = self.environments([key], [h])[key]
        return envs[0]


Evaluator = Union[MPSEvaluator, HierarchicalEvaluator]


def evaluator_for(instance: TNSInstance) -> Evaluator:
    return HierarchicalEvaluator(instance) if instance.spec.is_hierarchical else MPSEvaluator(instance)


# ─────────────────────────────────────────────────────────────────────────
#  Public operations
# ─────────────────────────────────────────────────────────────────────────

def mps_local_expectation(instance: TNSInstance, i: int, h: LocalOperator) -> float:
    """
    <Psi| h_i |Psi> for a left-orthonormal MPS.

    Raises:
        SupportOutOfRangeError: If the support of h placed at i leaves 1..L
    """
    if instance.spec.is_hierarchical:
        raise UnsupportedConfigurationError("mps_local_expectation needs an MPS instance")
    return MPSEvaluator(instance).expectation(h.at(i))


def mera_local_expectation(instance: TNSInstance, i: int, h: LocalOperator) -> float:
    """
    <Psi| h_i |Psi> for a TTNS or MERA by descending the top reference state through
    the causal cone of sites i, i+1, ... (periodic).

    Raises:
        UnsupportedConfigurationError: If the support is wider than the family's cone
    """
    if not instance.spec.is_hierarchical:
        raise UnsupportedConfigurationError("mera_local_expectation needs a TTNS or MERA instance")
    return HierarchicalEvaluator(instance).expectation(h.at(i))


def local_expectation(instance: TNSInstance, i: int, h: LocalOperator) -> float:
    return evaluator_for(instance).expectation(h.at(i))


def environment(instance: TNSInstance, key: TensorKey, i: int, h: LocalOperator) -> Environment:
    """
    (X, Y) of tensor ``key`` for the term h placed at site i.

    Raises:
        ConeMembershipError: If i is not in the causal cone set of ``key``
    """
    term = h.at(i)
    if i not in causal_cone_sites(instance, key, term.width):
        raise ConeMembershipError(key, i)
    evaluator = evaluator_for(instance)
    if isinstance(evaluator, MPSEvaluator):
        return evaluator.term_environment(key.index, term)
    return evaluator.term_environment(key, term)


def extensive_hamiltonian(instance_or_spec, width: int, chi: Optional[int] = None) -> List[LocalOperator]:
    """
    All placements of the isotropic ``width``-site Gell-Mann term: sites 1..L-width+1 for
    MPS (open), 1..L for hierarchical networks (periodic).
    """
    spec = getattr(instance_or_spec, "spec", instance_or_spec)
    h = build_interaction(chi or spec.d, width)
    last = spec.num_sites if spec.is_hierarchical else spec.num_sites - width + 1
    return [h.at(i) for i in range(1, last + 1)]
