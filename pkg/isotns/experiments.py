"""
Monte Carlo variance scans, decay fits and the per-sample identity suite.

Sample s of a run draws its network from ``sample_instance(spec, seed, stream=(s,))``,
so every sample is reproducible on its own and results do not depend on the worker
count.
"""
import functools
import itertools
import logging
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.stats

from .ansatz import (
    AnsatzSpec,
    TNSInstance,
    geometry_for,
    sample_instance,
    site_key,
    statevector_expectation,
)
from .channels import build_doubled_channel, predicted_layer_scaling, spectrum
from .exceptions import FitDomainError, UnsupportedConfigurationError
from .expectation import extensive_hamiltonian, local_expectation
from .gradient import (
    layer_gradients,
    layer_variance_values,
    rotation_angle_derivatives,
    tensor_gradient,
    total_energy,
)
from .models import ChiScanRow, DecayFit, ExperimentConfig, SizeScanRow, VarianceRecord
from .statistics import Chunk, Moments, RunningMoments, accumulate, run_chunked
from .tensor_core import (
    UnitaryMatrix,
    build_interaction,
    expm,
    make_rng,
    random_antihermitian,
)

logger = logging.getLogger(__name__)

CI_LEVEL = 0.95


# ─────────────────────────────────────────────────────────────────────────
#  Chunk workers (module level so they pickle)
# ─────────────────────────────────────────────────────────────────────────

def _instances(config: ExperimentConfig, chunk: Chunk):
    spec = config.spec
    for s in chunk.samples():
        instance = sample_instance(spec, config.seed, stream=(s,))
        yield instance, extensive_hamiltonian(instance, config.width)


def _mps_chunk(config: ExperimentConfig, chunk: Chunk) -> Moments:
    keys = [site_key(j) for j in config.sampled_positions()]

    def values():
        for instance, terms in _instances(config, chunk):
            grads = layer_gradients(instance, terms, keys)
            yield {key.index: g.variance_value() for key, g in grads.items()}

    return accumulate(values())


def _layer_chunk(config: ExperimentConfig, chunk: Chunk) -> Moments:
    layers = config.sampled_positions()

    def values():
        for instance, terms in _instances(config, chunk):
            yield layer_variance_values(instance, terms, layers, config.kind)

    return accumulate(values())


def _records(config: ExperimentConfig, moments: Moments, wall_time: float) -> List[VarianceRecord]:
    spec = config.spec
    return [
        VarianceRecord(
            family=spec.family_key,
            chi=spec.chi,
            d=spec.d,
            size=spec.size,
            tau_or_site=position,
            homogeneous=spec.homogeneous,
            trotter_t=spec.trotter_steps,
            n_samples=moments[position].count,
            mean_var=float(moments[position].mean),
            stderr=float(moments[position].stderr),
            seed=config.seed,
            wall_time=wall_time,
            interaction_width=config.width,
            tensor_kind=config.kind,
        )
        for position in config.sampled_positions()
        if position in moments
    ]


def _scan(config: ExperimentConfig, worker: Callable[[ExperimentConfig, Chunk], Moments]) -> List[VarianceRecord]:
    start = time.perf_counter()
    moments = run_chunked(
        functools.partial(worker, config),
        config.samples,
        chunk_size=config.chunk_size,
        workers=config.workers,
        label=config.spec.label(),
    )
    wall = time.perf_counter() - start
    logger.info("%s: %d samples in %.1fs", config.spec.label(), config.samples, wall)
    return _records(config, moments, wall)


# ─────────────────────────────────────────────────────────────────────────
#  Scans
# ─────────────────────────────────────────────────────────────────────────

def run_mps_scan(config: ExperimentConfig, widths: Optional[Sequence[int]] = None) -> List[VarianceRecord]:
    """
    Per-site gradient variances of Haar-random MPS.

    Without an explicit ``interaction_width`` both single-site and nearest-neighbour
    Hamiltonians are scanned; records carry their width.

    Raises:
        UnsupportedConfigurationError: If the configuration is not an MPS study
    """
    if config.family != "mps":
        raise UnsupportedConfigurationError(f"run_mps_scan needs family mps, got {config.family}")
    if widths is None:
        widths = (config.interaction_width,) if config.interaction_width else (1, 2)
    records: List[VarianceRecord] = []
    for width in widths:
        records += _scan(config.replaced(interaction_width=width), _mps_chunk)
    return records


def run_layer_scan(config: ExperimentConfig) -> List[VarianceRecord]:
    """
    Per-layer gradient variances of Haar-random TTNS/MERA, averaged over all tensors
    of the sampled kind in each layer.
    """
    if config.family == "mps":
        raise UnsupportedConfigurationError("run_layer_scan needs a ttns or mera configuration")
    return _scan(config, _layer_chunk)


def run_scan(config: ExperimentConfig) -> List[VarianceRecord]:
    return run_mps_scan(config) if config.family == "mps" else run_layer_scan(config)


def fit_decay(records: Sequence[VarianceRecord], window: Optional[Tuple[int, int]] = None) -> DecayFit:
    """
    Weighted least-squares fit of ln(mean) against tau inside ``window``.

    Weights are (mean / stderr)^2, the inverse delta-method variance of ln(mean); if any
    standard error is not positive the fit is unweighted.

    Raises:
        FitDomainError: If fewer than three records fall in the window or a mean is not positive
    """
    if window is None:
        taus = [r.tau_or_site for r in records]
        window = (2, max(taus) - 2) if taus else (2, 0)
    lo, hi = window
    inside = sorted((r for r in records if lo <= r.tau_or_site <= hi), key=lambda r: r.tau_or_site)
    if len(inside) < 3:
        raise FitDomainError(
            f"Fit window [{lo}, {hi}] contains {len(inside)} records, need at least 3",
            [r.tau_or_site for r in inside],
        )
    bad = [r.tau_or_site for r in inside if not r.mean_var > 0]
    if bad:
        raise FitDomainError(f"Non-positive mean variance at positions {bad}", bad)

    tau = np.array([r.tau_or_site for r in inside], dtype=float)
    y = np.log([r.mean_var for r in inside])
    se = np.array([r.stderr for r in inside], dtype=float)
    weighted = bool(np.all(np.isfinite(se)) and np.all(se > 0))
    if weighted:
        w = (np.array([r.mean_var for r in inside]) / se) ** 2
    else:
        logger.warning("Zero or undefined standard errors in fit window; using an unweighted fit")
        w = np.ones_like(y)

    x = np.column_stack([np.ones_like(tau), tau])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(x * sw[:, None], y * sw, rcond=None)
    intercept, slope = float(coef[0]), float(coef[1])
    resid = y - x @ coef
    dof = len(y) - 2
    ss_res = float(np.sum(w * resid ** 2))
    y_bar = float(np.sum(w * y) / np.sum(w))
    ss_tot = float(np.sum(w * (y - y_bar) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0

    cov = ss_res / dof * np.linalg.inv((x * w[:, None]).T @ x)
    half = float(scipy.stats.t.ppf(0.5 + CI_LEVEL / 2, dof)) * float(np.sqrt(max(cov[1, 1], 0.0)))
    return DecayFit(
        decay_factor=float(np.exp(slope)),
        ci_low=float(np.exp(slope - half)),
        ci_high=float(np.exp(slope + half)),
        window=(lo, hi),
        r_squared=r_squared,
        slope=slope,
        intercept=intercept,
        n_points=len(inside),
        weighted=weighted,
    )


def run_chi_scan(config: ExperimentConfig, chis: Optional[Sequence[int]] = None) -> List[ChiScanRow]:
    """Fitted decay factor and tau = 1 variance for every chi, next to the predicted b * eta."""
    if config.family == "mps":
        raise UnsupportedConfigurationError("run_chi_scan needs a ttns or mera configuration")
    chis = list(chis or config.chis or [config.chi])
    window = config.fit_window()
    rows = []
    for chi in chis:
        cfg = config.replaced(chi=chi, d=None, chis=None)
        records = run_layer_scan(cfg)
        fit = fit_decay(records, window)
        tau1 = next((r for r in records if r.tau_or_site == 1), None)
        rows.append(ChiScanRow(
            chi=chi,
            decay_factor=fit.decay_factor,
            ci_low=fit.ci_low,
            ci_high=fit.ci_high,
            predicted=predicted_layer_scaling(cfg.info.name, chi),
            tau1_variance=tau1.mean_var if tau1 else float("nan"),
            tau1_stderr=tau1.stderr if tau1 else float("nan"),
        ))
    return rows


@dataclass(frozen=True)
class Variant:
    label: str
    homogeneous: bool = False
    trotter_steps: int = 0


def default_variants(chi: int) -> List[Variant]:
    variants = [Variant("heterogeneous"), Variant("homogeneous", homogeneous=True)]
    if chi & (chi - 1) == 0:
        variants += [Variant(f"trotter-{t}", trotter_steps=t) for t in (1, 2, 4)]
    return variants


def run_comparison(config: ExperimentConfig,
                   variants: Optional[Sequence[Variant]] = None) -> Dict[str, List[VarianceRecord]]:
    """Per-layer scans of several network variants under the same master seed."""
    variants = list(variants or default_variants(config.chi))
    return {
        v.label: run_layer_scan(config.replaced(homogeneous=v.homogeneous, trotter_steps=v.trotter_steps))
        for v in variants
    }


def run_size_scan(config: ExperimentConfig, sizes: Optional[Sequence[int]] = None) -> List[SizeScanRow]:
    """tau = 1 variance against the number of layers T."""
    if config.family == "mps":
        raise UnsupportedConfigurationError("run_size_scan needs a ttns or mera configuration")
    sizes = list(sizes or config.sizes or range(max(2, config.size - 4), config.size + 1))
    rows = []
    for size in sizes:
        cfg = config.replaced(size=size, positions=[1], fit_min=None, fit_max=None, sizes=None)
        record = run_layer_scan(cfg)[0]
        rows.append(SizeScanRow(size=size, mean_var=record.mean_var, stderr=record.stderr))
    return rows


def pairwise_consistent(rows: Sequence[SizeScanRow], level: float = CI_LEVEL) -> List[Tuple[int, int, bool]]:
    """(T_a, T_b, consistent) for every pair: |m_a - m_b| within the joint confidence bound."""
    z = float(scipy.stats.norm.ppf(0.5 + level / 2))
    out = []
    for a, b in itertools.combinations(rows, 2):
        bound = z * float(np.hypot(a.stderr, b.stderr))
        out.append((a.size, b.size, abs(a.mean_var - b.mean_var) <= bound))
    return out


def gradient_mean(config: ExperimentConfig, position: int) -> RunningMoments:
    """
    Entrywise running moments of g over samples, real parts followed by imaginary parts.
    Their mean should vanish within its standard error.
    """
    spec = config.spec
    kind = config.kind
    moments = RunningMoments()
    for s in range(config.samples):
        instance = sample_instance(spec, config.seed, stream=(s,))
        key = site_key(position) if kind == "site" else instance.keys(kind=kind, layer=position)[0]
        g = tensor_gradient(instance, key, extensive_hamiltonian(instance, config.width))
        moments.add(np.concatenate([g.matrix.real.ravel(), g.matrix.imag.ravel()]))
    return moments


# ─────────────────────────────────────────────────────────────────────────
#  Self-test
# ─────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value)) and self.value <= self.tolerance


def _oracle_deviation(instance: TNSInstance, width: int) -> float:
    spec = instance.spec
    h = build_interaction(spec.d, width)
    worst = 0.0
    if spec.is_hierarchical:
        geometry = geometry_for(spec)
        starts = range(1, spec.num_sites + 1)
        sites = {i: geometry.term_sites(i, width) for i in starts}
    else:
        starts = range(1, spec.size - width + 2)
        sites = {i: tuple(range(i - 1, i - 1 + width)) for i in starts}
    for i in starts:
        exact = statevector_expectation(instance, h.matrix, sites[i])
        worst = max(worst, abs(local_expectation(instance, i, h) - exact))
    return worst


def _finite_difference_error(instance: TNSInstance, key, width: int, seed: int, eps: float = 1e-5) -> float:
    terms = extensive_hamiltonian(instance, width)
    g = tensor_gradient(instance, key, terms)
    u = instance.unitary(key).matrix
    a = random_antihermitian(u.shape[0], make_rng(seed, 999))

    def energy(sign: float) -> float:
        return total_energy(instance.with_unitary(key, UnitaryMatrix(u @ expm(sign * eps * a))), terms)

    numeric = (energy(1.0) - energy(-1.0)) / (2 * eps)
    analytic = g.directional_derivative(a)
    return abs(numeric - analytic) / max(abs(analytic), 1e-12)


def _rotation_identity_error(instance: TNSInstance, key, width: int) -> float:
    terms = extensive_hamiltonian(instance, width)
    alphas = rotation_angle_derivatives(instance, key, terms)
    n = instance.unitary(key).dimension
    return abs(float(np.sum(alphas ** 2)) / n ** 2 - tensor_gradient(instance, key, terms).variance_value())


def _channel_errors(spec: AnsatzSpec, tag: Optional[str] = None, method: str = "auto") -> Tuple[float, float]:
    """(|lambda_1 - 1|, trace-preservation residual of the adjoint on the identity)."""
    channel = build_doubled_channel(spec, tag)
    result = spectrum(channel, top_k=2, method=method)
    eye = np.eye(channel.operand_dim)
    trace_residual = float(np.max(np.abs(channel.apply_adjoint(eye) - eye)))
    return abs(result.eigenvalues[0] - 1.0), trace_residual


def selftest(seed: int = 0) -> List[CheckResult]:
    """Run the per-sample identity suite on small networks."""
    mps = sample_instance(AnsatzSpec(family="mps", chi=2, d=2, size=6), seed)
    mera = sample_instance(AnsatzSpec(family="mera", branching=2, chi=2, d=2, size=3), seed)
    ttns = sample_instance(AnsatzSpec(family="ttns", branching=2, chi=2, d=2, size=3), seed)
    mera_key = mera.keys(kind="disentangler", layer=1)[0]

    checks = [
        CheckResult("isometry residual", max(i.max_residual() for i in (mps, mera, ttns)), 1e-12),
        CheckResult("mps statevector oracle", max(_oracle_deviation(mps, w) for w in (1, 2)), 1e-10),
        CheckResult("mera statevector oracle", _oracle_deviation(mera, 3), 1e-10),
        CheckResult("ttns statevector oracle", _oracle_deviation(ttns, 2), 1e-10),
        CheckResult("mps finite differences", _finite_difference_error(mps, site_key(3), 2, seed), 1e-4),
        CheckResult("mera finite differences", _finite_difference_error(mera, mera_key, 3, seed), 1e-4),
        CheckResult("rotation-angle identity", _rotation_identity_error(mps, site_key(3), 1), 1e-8),
    ]
    for label, spec, tag, method in (
        ("mps", mps.spec, None, "dense"),
        ("ttns-binary", ttns.spec, None, "dense"),
        ("mera-binary", mera.spec, None, "reduced"),
    ):
        lam1, trace = _channel_errors(spec, tag, method)
        checks.append(CheckResult(f"{label} channel lambda_1", lam1, 1e-10))
        checks.append(CheckResult(f"{label} channel trace preservation", trace, 1e-10))
    for check in checks:
        logger.debug("%s: %.3e (tolerance %.0e)", check.name, check.value, check.tolerance)
    return checks
