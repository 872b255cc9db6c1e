"""
Pytest fixtures for the isotns tests.
"""
import numpy as np
import pytest

from isotns._rate_limited_log import reset_rate_limits
from isotns.ansatz import AnsatzSpec, sample_instance
from isotns.models import ExperimentConfig
from isotns.tensor_core import LocalOperator, make_rng, random_hermitian

TEST_SEED = 20240917


# ─────────────────────────────────────────────────────────────────────────
#  Process-wide behaviour
# ─────────────────────────────────────────────────────────────────────────

# 1) Run every Monte Carlo pool in-process unless a test asks for workers
@pytest.fixture(autouse=True)
def _serial_workers(monkeypatch):
    monkeypatch.setenv("ISOTNS_WORKERS", "1")


# 2) Forget rate-limited log keys between tests
@pytest.fixture(autouse=True)
def _fresh_rate_limits():
    reset_rate_limits()
    yield
    reset_rate_limits()


# ─────────────────────────────────────────────────────────────────────────
#  Networks
# ─────────────────────────────────────────────────────────────────────────

@pytest.fixture
def rng():
    return make_rng(TEST_SEED)


@pytest.fixture
def mps_instance():
    """Six-site chi = d = 2 MPS."""
    return sample_instance(AnsatzSpec(family="mps", chi=2, d=2, size=6), TEST_SEED)


@pytest.fixture
def ttns_instance():
    """Three-layer binary TTNS on eight sites."""
    return sample_instance(AnsatzSpec(family="ttns", branching=2, chi=2, d=2, size=3), TEST_SEED)


@pytest.fixture
def mera_instance():
    """Three-layer binary MERA on eight sites."""
    return sample_instance(AnsatzSpec(family="mera", branching=2, chi=2, d=2, size=3), TEST_SEED)


@pytest.fixture
def homogeneous_mera_instance():
    return sample_instance(
        AnsatzSpec(family="mera", branching=2, chi=2, d=2, size=3, homogeneous=True), TEST_SEED
    )


def random_term(chi: int, width: int, seed: int = TEST_SEED) -> LocalOperator:
    """A random traceless Hermitian term, less symmetric than the isotropic one."""
    dim = chi ** width
    h = random_hermitian(dim, make_rng(seed, width))
    h -= np.trace(h) / dim * np.eye(dim)
    return LocalOperator(chi=chi, width=width, matrix=h)


@pytest.fixture
def small_mps_config():
    return ExperimentConfig(family="mps", chi=2, size=6, n_samples=4, chunk_size=2, seed=7)


@pytest.fixture
def small_ttns_config():
    return ExperimentConfig(family="ttns", branching=2, chi=2, size=4, n_samples=4, chunk_size=2, seed=7)
