"""
Haar-averaged doubled transition channels, their spectra and closed-form predictions.

After a second-moment Haar twirl, a tensor's doubled output is a combination of the
identity and the copy-swap on its output legs. A layer of independent tensors therefore
maps any doubled cone operator into the span of products of per-leg identities and
swaps ("configurations"), and the averaged channel factorizes as

    E = sum_{out, in} |P_out>> K[out, in] <<P_in|

with a 2^w x 2^w kernel K for a w-leg cone. The explicit [D^2, D^2] matrix on the
doubled cone space (D = d_cone^2) is materialized only on request.

Doubled operators are ordered (copy a legs, copy b legs), copy a outermost.
"""
import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .ansatz import AnsatzSpec, HierarchicalGeometry
from .exceptions import (
    InvalidDimensionError,
    NumericalError,
    ResourceLimitError,
    UnsupportedConfigurationError,
)
from .families import FamilyRegistry
from .tensor_core import DenseTensor

logger = logging.getLogger(__name__)

# Largest D^2 for which the channel matrix is materialized
DENSE_LIMIT = 20000
# Largest D^2 for which configuration vectors are built
OPERAND_LIMIT = 2 ** 22
# Eigenvalues below this modulus belong to the kernel
ZERO_TOL = 1e-10

IDENTITY, SWAP = 0, 1


# ─────────────────────────────────────────────────────────────────────────
#  Weingarten calculus
# ─────────────────────────────────────────────────────────────────────────

def weingarten_coefficients(n: int) -> Tuple[float, float]:
    """(Wg(identity), Wg(swap)) for the second moment of U(n)."""
    if n < 2:
        raise InvalidDimensionError(f"Second-moment Weingarten function needs N >= 2, got {n}")
    return 1.0 / (n * n - 1), -1.0 / (n * (n * n - 1))


def swap_operator(n: int) -> DenseTensor:
    """Swap of two n-dimensional copies, as an n^2 x n^2 matrix."""
    s = np.zeros((n * n, n * n), dtype=np.complex128)
    for a, b in itertools.product(range(n), repeat=2):
        s[b * n + a, a * n + b] = 1.0
    return s


def weingarten_second_moment(n: int, operator: DenseTensor) -> DenseTensor:
    """
    Exact Haar average of (U x U) A (U x U)^dagger over U(n).

    The result is c_1 * 1 + c_S * S with c_1 = Wg1 Tr A + WgS Tr(S A) and
    c_S = WgS Tr A + Wg1 Tr(S A).
    """
    wg1, wgs = weingarten_coefficients(n)
    if operator.shape != (n * n, n * n):
        raise InvalidDimensionError(f"Doubled operator must be {(n * n, n * n)}, got {operator.shape}")
    s = swap_operator(n)
    t1 = np.trace(operator)
    ts = np.trace(s @ operator)
    return (wg1 * t1 + wgs * ts) * np.eye(n * n) + (wgs * t1 + wg1 * ts) * s


def _tr(config: int, dim: int) -> int:
    """Trace of a one-leg configuration operator."""
    return dim * dim if config == IDENTITY else dim


def _tr_swapped(config: int, dim: int) -> int:
    """Tr(S P) of a one-leg configuration operator."""
    return dim if config == IDENTITY else dim * dim


def _twirl_weight(n: int, sigma: int, tau: int) -> float:
    wg1, wgs = weingarten_coefficients(n)
    return wg1 if sigma == tau else wgs


def _config_index(configs: Sequence[int]) -> int:
    idx = 0
    for c in configs:
        idx = 2 * idx + c
    return idx


def configuration_operator(configs: Sequence[int], dims: Sequence[int]) -> DenseTensor:
    """Product of per-leg identities (0) and copy swaps (1) on the doubled cone space."""
    w = len(configs)
    tensor = np.ones((), dtype=np.complex128)
    for c, dim in zip(configs, dims):
        eye = np.eye(dim)
        leg = np.einsum("ac,bd->abcd", eye, eye) if c == IDENTITY else np.einsum("ad,bc->abcd", eye, eye)
        tensor = np.multiply.outer(tensor, leg)
    # axes per leg are (a', b', a, b); regroup to (a'..., b'..., a..., b...)
    order = [4 * l for l in range(w)] + [4 * l + 1 for l in range(w)]
    order += [4 * l + 2 for l in range(w)] + [4 * l + 3 for l in range(w)]
    total = int(np.prod(dims)) ** 2
    return tensor.transpose(order).reshape(total, total)


# ─────────────────────────────────────────────────────────────────────────
#  Channels
# ─────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class SuperOperatorMatrix:
    """
    A Haar-averaged doubled channel in factored configuration form.

    ``leg_dims`` are the single-copy dimensions of the cone legs, so the channel acts on
    operators over a D-dimensional doubled space with D = prod(leg_dims)^2.
    """

    tag: str
    leg_dims: Tuple[int, ...]
    kernel: np.ndarray

    @property
    def width(self) -> int:
        return len(self.leg_dims)

    @property
    def operand_dim(self) -> int:
        return int(np.prod(self.leg_dims)) ** 2

    @cached_property
    def gram(self) -> np.ndarray:
        """G[s, r] = Tr(P_s P_r) over configurations."""
        g = np.ones((1, 1))
        for dim in self.leg_dims:
            g = np.kron(g, np.array([[dim * dim, dim], [dim, dim * dim]], dtype=float))
        return g

    @cached_property
    def configuration_vectors(self) -> np.ndarray:
        """Columns vec(P_c) for every configuration, shape [D^2, 2^w]."""
        rows = self.operand_dim ** 2
        if rows > OPERAND_LIMIT:
            raise ResourceLimitError(rows, OPERAND_LIMIT)
        return np.stack([
            configuration_operator(cfg, self.leg_dims).reshape(-1)
            for cfg in itertools.product((IDENTITY, SWAP), repeat=self.width)
        ], axis=1)

    def reduced(self) -> np.ndarray:
        """K G: carries every nonzero eigenvalue of the channel."""
        return self.kernel @ self.gram

    def matrix(self) -> np.ndarray:
        """
        The explicit [D^2, D^2] channel matrix.

        Raises:
            ResourceLimitError: If D^2 exceeds the dense limit
        """
        rows = self.operand_dim ** 2
        if rows > DENSE_LIMIT:
            raise ResourceLimitError(rows, DENSE_LIMIT)
        p = self.configuration_vectors
        return p @ self.kernel @ p.conj().T

    def apply(self, operator: DenseTensor) -> DenseTensor:
        """E(R) for a doubled operator R of shape [D, D]."""
        p = self.configuration_vectors
        out = p @ (self.kernel @ (p.conj().T @ operator.reshape(-1)))
        return out.reshape(self.operand_dim, self.operand_dim)

    def apply_adjoint(self, operator: DenseTensor) -> DenseTensor:
        p = self.configuration_vectors
        out = p @ (self.kernel.conj().T @ (p.conj().T @ operator.reshape(-1)))
        return out.reshape(self.operand_dim, self.operand_dim)

    def linear_operator(self, adjoint: bool = False) -> scipy.sparse.linalg.LinearOperator:
        p = self.configuration_vectors
        k = self.kernel.conj().T if adjoint else self.kernel
        n = p.shape[0]
        return scipy.sparse.linalg.LinearOperator(
            (n, n), matvec=lambda v: p @ (k @ (p.conj().T @ v)), dtype=np.complex128
        )

    def __add__(self, other: "SuperOperatorMatrix") -> "SuperOperatorMatrix":
        if other.leg_dims != self.leg_dims:
            raise InvalidDimensionError(f"Cannot add channels on legs {self.leg_dims} and {other.leg_dims}")
        return SuperOperatorMatrix(self.tag, self.leg_dims, self.kernel + other.kernel)

    def scaled(self, factor: float, tag: Optional[str] = None) -> "SuperOperatorMatrix":
        return SuperOperatorMatrix(tag or self.tag, self.leg_dims, factor * self.kernel)


def mps_site_channel(chi: int, d: int) -> SuperOperatorMatrix:
    """Doubled site-transition channel of a Haar-random left-orthonormal MPS tensor."""
    n = chi * d
    kernel = np.array([
        [_twirl_weight(n, sigma, tau) * _tr(tau, d) for sigma in (IDENTITY, SWAP)]
        for tau in (IDENTITY, SWAP)
    ])
    return SuperOperatorMatrix("mps-site", (chi,), kernel)


def _transition_kernel(geometry: HierarchicalGeometry, fine: Tuple[int, ...], chi: int) -> np.ndarray:
    """Configuration kernel of one hierarchical cone move at layer 1."""
    step = geometry.transition(1, fine)
    b = geometry.branching
    n_iso = len(step.isometries)
    kernel = np.zeros((2 ** len(step.fine), 2 ** n_iso))
    for sigma in itertools.product((IDENTITY, SWAP), repeat=n_iso):
        for tau in itertools.product((IDENTITY, SWAP), repeat=n_iso):
            weight = float(np.prod([_twirl_weight(chi ** b, s, t) for s, t in zip(sigma, tau)]))
            legs: Dict[int, int] = {}
            for k, t in zip(step.isometries, tau):
                for site in geometry.isometry_outputs(1, k):
                    legs[site] = t
            branches = [(weight, legs)]
            for dk in step.disentanglers:
                p, q = geometry.disentangler_sites(1, dk)
                nxt = []
                for w, cfg in branches:
                    t1 = _tr(cfg[p], chi) * _tr(cfg[q], chi)
                    ts = _tr_swapped(cfg[p], chi) * _tr_swapped(cfg[q], chi)
                    for t_out in (IDENTITY, SWAP):
                        coeff = sum(
                            _twirl_weight(chi * chi, s_in, t_out) * t
                            for s_in, t in ((IDENTITY, t1), (SWAP, ts))
                        )
                        new = dict(cfg)
                        new[p] = new[q] = t_out
                        nxt.append((w * coeff, new))
                branches = nxt
            for w, cfg in branches:
                for site, c in cfg.items():
                    if site not in step.fine:
                        w *= _tr(c, chi)
                kernel[_config_index([cfg[s] for s in step.fine]), _config_index(sigma)] += w
    return kernel


# Fine windows (level-0 sites) of every cone move, for a coarse cone starting at site 0
_MOVES: Dict[str, Tuple[int, Tuple[Tuple[int, ...], ...]]] = {
    "ttns-binary": (2, ((0,), (1,))),
    "ttns-ternary": (3, ((0,), (1,), (2,))),
    "mera-binary-left": (2, ((1, 2, 3),)),
    "mera-binary-right": (2, ((2, 3, 4),)),
    "mera-binary-average": (2, ((1, 2, 3), (2, 3, 4))),
    "mera-ternary": (3, ((3, 4), (1, 2), (2, 3))),
}


def hierarchical_channel(tag: str, chi: int) -> SuperOperatorMatrix:
    """Average over the cone moves of ``tag`` of the doubled layer-transition channels."""
    if tag not in _MOVES:
        raise UnsupportedConfigurationError(f"Unknown channel construction '{tag}'")
    b, moves = _MOVES[tag]
    geometry = HierarchicalGeometry(b, 4, tag.startswith("mera"))
    kernel = sum(_transition_kernel(geometry, fine, chi) for fine in moves) / len(moves)
    return SuperOperatorMatrix(tag, (chi,) * len(moves[0]), kernel)


def build_doubled_channel(spec: AnsatzSpec, tag: Optional[str] = None) -> SuperOperatorMatrix:
    """
    Exact Avg M x M for the family of ``spec``; ``tag`` picks one of the family's
    constructions (default: the first one, or the average for binary MERA).

    The factored form is built for any chi; dense matrices and eigenoperators are
    only materialized on demand, within the size limits.

    Raises:
        UnsupportedConfigurationError: If ``tag`` does not belong to the family
    """
    info = spec.info
    if tag is None:
        tag = "mera-binary-average" if spec.family_key == "mera-binary" else info.channels[0]
    if tag not in info.channels:
        raise UnsupportedConfigurationError(
            f"Construction '{tag}' does not apply to {spec.family_key}; use one of {', '.join(info.channels)}"
        )
    if tag == "mps-site":
        channel = mps_site_channel(spec.chi, spec.d)
    else:
        channel = hierarchical_channel(tag, spec.chi)
    logger.debug("Built %s channel for chi=%d, D=%d", tag, spec.chi, channel.operand_dim)
    return channel


# ─────────────────────────────────────────────────────────────────────────
#  Spectra
# ─────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """
    Leading eigenpairs sorted by modulus, with ties broken by real then imaginary part.

    ``right``/``left`` hold eigenoperators as [D, D] matrices normalized so that
    <<left_n|right_m>> = delta_nm; they are None when D is too large to materialize.
    """

    tag: str
    eigenvalues: np.ndarray
    right: Optional[List[DenseTensor]]
    left: Optional[List[DenseTensor]]
    degeneracies: List[Tuple[int, ...]]
    method: str
    residual: float = 0.0

    @property
    def gap_eigenvalue(self) -> complex:
        return self.eigenvalues[1] if len(self.eigenvalues) > 1 else 0.0

    def biorthogonality_residual(self) -> float:
        if self.left is None or self.right is None:
            return 0.0
        gram = np.array([[np.vdot(l, r) for r in self.right] for l in self.left])
        return float(np.max(np.abs(gram - np.eye(len(self.right)))))


def _order(values: np.ndarray, top_k: int) -> np.ndarray:
    """Indices of the leading ``top_k`` eigenvalues; the kernel of the channel is skipped."""
    order = np.lexsort((-values.imag, -values.real, -np.round(np.abs(values), 10)))
    nonzero = [i for i in order if abs(values[i]) > ZERO_TOL]
    return np.array(nonzero[:top_k] or list(order[:1]), dtype=int)


def _degeneracies(values: np.ndarray, tol: float = 1e-8) -> List[Tuple[int, ...]]:
    groups: List[List[int]] = []
    for idx, v in enumerate(values):
        for g in groups:
            if abs(values[g[0]] - v) < tol * max(1.0, abs(v)):
                g.append(idx)
                break
        else:
            groups.append([idx])
    return [tuple(g) for g in groups if len(g) > 1]


def _biorthonormalize(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Rescale/mix left vectors so that left^H right = 1."""
    overlap = left.conj().T @ right
    if np.linalg.cond(overlap) > 1e10:
        logger.warning("Ill-conditioned left/right eigenvector overlap; normalizing pairwise")
        return left / np.diag(overlap).conj()
    return left @ np.linalg.inv(overlap).conj().T


def _dense_spectrum(channel: SuperOperatorMatrix, top_k: int) -> SpectrumResult:
    m = channel.matrix()
    values, vl, vr = scipy.linalg.eig(m, left=True, right=True)
    order = _order(values, top_k)
    values, vl, vr = values[order], vl[:, order], vr[:, order]
    vl = _biorthonormalize(vl, vr)
    d = channel.operand_dim
    residual = float(max(np.linalg.norm(m @ vr[:, i] - values[i] * vr[:, i]) for i in range(len(values))))
    return SpectrumResult(
        tag=channel.tag,
        eigenvalues=values,
        right=[vr[:, i].reshape(d, d) for i in range(len(values))],
        left=[vl[:, i].reshape(d, d) for i in range(len(values))],
        degeneracies=_degeneracies(values),
        method="dense",
        residual=residual,
    )


def _reduced_spectrum(channel: SuperOperatorMatrix, top_k: int) -> SpectrumResult:
    core = channel.reduced()
    values, y, v = scipy.linalg.eig(core, left=True, right=True)
    order = _order(values, top_k)
    values, y, v = values[order], y[:, order], v[:, order]
    residual = float(max(np.linalg.norm(core @ v[:, i] - values[i] * v[:, i]) for i in range(len(values))))
    right = left = None
    if channel.operand_dim ** 2 <= DENSE_LIMIT:
        p = channel.configuration_vectors
        r = p @ v
        # Left eigenoperators are P K^H y for left eigenvectors y of K G
        l = p @ (channel.kernel.conj().T @ y)
        l = _biorthonormalize(l, r)
        d = channel.operand_dim
        right = [r[:, i].reshape(d, d) for i in range(len(values))]
        left = [l[:, i].reshape(d, d) for i in range(len(values))]
    return SpectrumResult(channel.tag, values, right, left, _degeneracies(values), "reduced", residual)


def _arnoldi_spectrum(channel: SuperOperatorMatrix, top_k: int) -> SpectrumResult:
    n = channel.operand_dim ** 2
    k = min(top_k, channel.kernel.shape[0], n - 2)
    try:
        values, vr = scipy.sparse.linalg.eigs(channel.linear_operator(), k=k, which="LM")
        lvalues, vl = scipy.sparse.linalg.eigs(channel.linear_operator(adjoint=True), k=k, which="LM")
    except scipy.sparse.linalg.ArpackNoConvergence as e:
        raise NumericalError(f"Arnoldi iteration did not converge for {channel.tag}", residual=None) from e
    order = _order(values, top_k)
    values, vr = values[order], vr[:, order]
    # Pair each right eigenvalue with the closest conjugate left eigenvalue
    match = [int(np.argmin(np.abs(lvalues.conj() - v))) for v in values]
    vl = _biorthonormalize(vl[:, match], vr)
    op = channel.linear_operator()
    residual = float(max(np.linalg.norm(op.matvec(vr[:, i]) - values[i] * vr[:, i]) for i in range(len(values))))
    d = channel.operand_dim
    return SpectrumResult(
        channel.tag,
        values,
        [vr[:, i].reshape(d, d) for i in range(len(values))],
        [vl[:, i].reshape(d, d) for i in range(len(values))],
        _degeneracies(values),
        "arnoldi",
        residual,
    )


def spectrum(channel: SuperOperatorMatrix, top_k: int = 4, method: str = "auto",
             tol: float = 1e-8) -> SpectrumResult:
    """
    Leading eigenvalues by modulus with biorthogonal eigenoperators.

    ``method`` is "dense" (full non-Hermitian eigensolver on the channel matrix),
    "reduced" (exact, on the configuration core), "arnoldi" (iterative, on a linear
    operator) or "auto" (dense when the matrix fits, reduced otherwise).

    Raises:
        NumericalError: If the eigenpairs do not satisfy the eigen equation to ``tol``
    """
    if method == "auto":
        method = "dense" if channel.operand_dim ** 2 <= DENSE_LIMIT else "reduced"
    solvers = {"dense": _dense_spectrum, "reduced": _reduced_spectrum, "arnoldi": _arnoldi_spectrum}
    if method not in solvers:
        raise UnsupportedConfigurationError(f"Unknown spectrum method '{method}'")
    result = solvers[method](channel, top_k)
    if result.residual > tol * max(1.0, float(np.max(np.abs(result.eigenvalues)))):
        raise NumericalError(
            f"Eigenpairs of {channel.tag} have residual {result.residual:.3e}", residual=result.residual
        )
    if result.degeneracies:
        logger.debug("Degenerate eigenvalues in %s: %s", channel.tag, result.degeneracies)
    return result


# ─────────────────────────────────────────────────────────────────────────
#  Closed forms
# ─────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class EtaEntry:
    family: str
    branching: int
    eta: float
    lambda3: Optional[float] = None
    exact: bool = True
    sampled: bool = True

    @property
    def layer_scaling(self) -> float:
        return self.branching * self.eta


def _mps_eta(chi: int, d: int) -> float:
    return (1.0 - 1.0 / chi ** 2) / (d - 1.0 / (chi ** 2 * d))


def _eta_formula(key: str, chi: int, d: int) -> Tuple[float, Optional[float], bool]:
    c2 = float(chi * chi)
    if key == "mps":
        return _mps_eta(chi, d), None, True
    if key == "ttns-binary":
        return chi / (1.0 + c2), None, True
    if key == "ttns-ternary":
        return c2 / (1.0 + c2 + c2 * c2), None, True
    if key == "mera-binary":
        eta = c2 * (1.0 + chi) ** 4 / (2.0 * (1.0 + c2) ** 4)
        lam3 = c2 * (1.0 + chi) ** 2 / (2.0 * (1.0 + c2) ** 3)
        return eta, lam3, True
    if key == "mera-ternary":
        return 1.0 / (3.0 * c2), None, False
    if key == "mera-2d-3x3":
        return 1.0 / (9.0 * chi ** 8), None, False
    raise UnsupportedConfigurationError(f"No analytic eta for family '{key}'")


@dataclass
class AnalyticEtaTable:
    """Closed-form decay factors per family; leading-order entries are marked inexact."""

    chis: Sequence[int] = (2, 3, 4)
    d: Optional[int] = None
    entries: Dict[Tuple[str, int, int], EtaEntry] = field(default_factory=dict)

    def __post_init__(self):
        for name, info in FamilyRegistry.load_families().items():
            for chi in self.chis:
                d = self.d if (self.d and name == "mps") else chi
                eta, lam3, exact = _eta_formula(info.eta, chi, d)
                self.entries[(name, chi, d)] = EtaEntry(
                    family=name, branching=info.branching, eta=eta, lambda3=lam3,
                    exact=exact, sampled=info.sampled,
                )

    def rows(self) -> List[Tuple[str, int, int, EtaEntry]]:
        return [(name, chi, d, e) for (name, chi, d), e in self.entries.items()]


def _family_key(family: str, branching: Optional[int] = None) -> str:
    if branching is not None and family in ("ttns", "mera"):
        return FamilyRegistry.key_for(family, branching)
    return FamilyRegistry.get(family).name


def analytic_eta(family: str, chi: int, d: Optional[int] = None) -> float:
    """
    Closed-form second-largest channel eigenvalue of a family (``"mps"``,
    ``"mera-binary"``, ...). ``d`` defaults to chi; chi = 1 MPS gives 0.
    """
    info = FamilyRegistry.get(_family_key(family))
    if chi < 1:
        raise InvalidDimensionError(f"chi must be >= 1, got {chi}")
    return _eta_formula(info.eta, chi, d or chi)[0]


def predicted_layer_scaling(family: str, chi: int) -> float:
    """b * eta, the per-layer decay factor of hierarchical gradient variances."""
    info = FamilyRegistry.get(_family_key(family))
    return info.branching * analytic_eta(family, chi)


def layer_correction_scaling(family: str, chi: int) -> float:
    """
    b * lambda_3 for families where lambda_3 is known in closed form.

    Raises:
        UnsupportedConfigurationError: If the family has no closed-form lambda_3
    """
    info = FamilyRegistry.get(_family_key(family))
    lam3 = _eta_formula(info.eta, chi, chi)[1]
    if lam3 is None:
        raise UnsupportedConfigurationError(f"No closed-form third eigenvalue for {info.name}")
    return info.branching * lam3


def predicted_term_variance(chi: int, d: int, trh2: float, j: int, i: int) -> float:
    """Haar variance contribution of a single-site term at i to the MPS tensor at j >= i."""
    if j < i:
        return 0.0
    return 2.0 * trh2 / (d * (chi ** 2 * d + 1)) * _mps_eta(chi, d) ** (j - i)


def predicted_mps_variance(chi: int, d: int, trh2: float = 1.0, j: Optional[int] = None,
                           length: Optional[int] = None) -> float:
    """
    MPS gradient variance for single-site terms: the bulk value when ``j`` is None,
    otherwise the sum of the per-term series over sites 1..j.
    """
    if j is None:
        return 2.0 * trh2 * (chi ** 2 * d ** 2 - 1) / (d * (d - 1) * (chi ** 2 * d + 1) ** 2)
    if j < 1 or (length is not None and j > length):
        raise InvalidDimensionError(f"Site {j} outside 1..{length}")
    return sum(predicted_term_variance(chi, d, trh2, j, i) for i in range(1, j + 1))


def spectrum_record(spec: AnsatzSpec, result: SpectrumResult) -> Dict:
    """JSON-ready summary of a spectrum next to the closed-form predictions."""
    info = spec.info
    eta = analytic_eta(info.name, spec.chi, spec.d)
    values = result.eigenvalues
    record = {
        "family": info.name,
        "construction": result.tag,
        "chi": spec.chi,
        "d": spec.d,
        "method": result.method,
        "eigenvalues": [float(v.real) for v in values],
        "analytic_eta": eta,
        "b_eta": info.branching * eta if spec.is_hierarchical else None,
        "degeneracies": [list(g) for g in result.degeneracies],
        "residual": result.residual,
    }
    if np.any(np.abs(np.imag(values)) > 1e-12):
        record["eigenvalues_imag"] = [float(v.imag) for v in values]
    return record
