"""
isotns - Haar-random isometric tensor network states and their gradient variances.
"""
from .ansatz import (
    AnsatzSpec,
    HierarchicalGeometry,
    TensorKey,
    TNSInstance,
    causal_cone_sites,
    disentangler_key,
    instance_from_dict,
    instance_to_dict,
    isometry_key,
    mps_left_orthonormal_form,
    sample_instance,
    site_key,
    statevector,
    statevector_expectation,
)
from .channels import (
    AnalyticEtaTable,
    SpectrumResult,
    SuperOperatorMatrix,
    analytic_eta,
    build_doubled_channel,
    layer_correction_scaling,
    predicted_layer_scaling,
    predicted_mps_variance,
    predicted_term_variance,
    spectrum,
    weingarten_second_moment,
)
from .exceptions import (
    ConeMembershipError,
    ConfigurationError,
    FitDomainError,
    IntegrityError,
    InvalidDimensionError,
    IsoTNSError,
    NumericalError,
    PreconditionError,
    ResourceLimitError,
    ShapeMismatchError,
    SupportOutOfRangeError,
    UnsupportedConfigurationError,
)
from .expectation import (
    Environment,
    environment,
    extensive_hamiltonian,
    local_expectation,
    mera_local_expectation,
    mps_local_expectation,
)
from .experiments import (
    fit_decay,
    run_chi_scan,
    run_comparison,
    run_layer_scan,
    run_mps_scan,
    run_size_scan,
    selftest,
)
from .families import FamilyInfo, FamilyRegistry
from .gradient import (
    RiemannianGradient,
    gradient_covariance,
    layer_gradients,
    mps_sweep_gradients,
    riemannian_gradient,
    rotation_angle_derivatives,
    term_gradients,
    variance_sample,
)
from .models import DecayFit, ExperimentConfig, RunManifest, VarianceRecord
from .reporting import emit, load_config, load_records
from .tensor_core import (
    IsometryTensor,
    LocalOperator,
    OperatorBasis,
    UnitaryMatrix,
    build_interaction,
    contract,
    gell_mann_basis,
    haar_unitary,
    isometry_from_unitary,
    partial_trace,
    pauli_product_basis,
)

from .version import __version__

__all__ = [
    # Tensor algebra
    "UnitaryMatrix",
    "IsometryTensor",
    "OperatorBasis",
    "LocalOperator",
    "haar_unitary",
    "isometry_from_unitary",
    "gell_mann_basis",
    "pauli_product_basis",
    "build_interaction",
    "contract",
    "partial_trace",

    # Networks
    "AnsatzSpec",
    "TNSInstance",
    "TensorKey",
    "HierarchicalGeometry",
    "site_key",
    "isometry_key",
    "disentangler_key",
    "sample_instance",
    "mps_left_orthonormal_form",
    "causal_cone_sites",
    "statevector",
    "statevector_expectation",
    "instance_to_dict",
    "instance_from_dict",
    "FamilyInfo",
    "FamilyRegistry",

    # Expectation values and gradients
    "Environment",
    "environment",
    "extensive_hamiltonian",
    "local_expectation",
    "mps_local_expectation",
    "mera_local_expectation",
    "RiemannianGradient",
    "riemannian_gradient",
    "variance_sample",
    "layer_gradients",
    "mps_sweep_gradients",
    "term_gradients",
    "gradient_covariance",
    "rotation_angle_derivatives",

    # Channels
    "SuperOperatorMatrix",
    "SpectrumResult",
    "AnalyticEtaTable",
    "weingarten_second_moment",
    "build_doubled_channel",
    "spectrum",
    "analytic_eta",
    "predicted_mps_variance",
    "predicted_term_variance",
    "predicted_layer_scaling",
    "layer_correction_scaling",

    # Experiments
    "ExperimentConfig",
    "VarianceRecord",
    "DecayFit",
    "RunManifest",
    "run_mps_scan",
    "run_layer_scan",
    "run_chi_scan",
    "run_comparison",
    "run_size_scan",
    "fit_decay",
    "selftest",
    "emit",
    "load_records",
    "load_config",

    # Exceptions
    "IsoTNSError",
    "InvalidDimensionError",
    "ShapeMismatchError",
    "UnsupportedConfigurationError",
    "IntegrityError",
    "SupportOutOfRangeError",
    "ConeMembershipError",
    "PreconditionError",
    "ResourceLimitError",
    "NumericalError",
    "FitDomainError",
    "ConfigurationError",

    # Version
    "__version__"
]
