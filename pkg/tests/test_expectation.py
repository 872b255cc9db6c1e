"""
Tests for causal-cone expectation values and environments, checked against the dense
statevector oracle.
"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isotns.ansatz import (
    AnsatzSpec,
    causal_cone_sites,
    disentangler_key,
    geometry_for,
    isometry_key,
    sample_instance,
    site_key,
    statevector_expectation,
)
from isotns.exceptions import (
    ConeMembershipError,
    ShapeMismatchError,
    SupportOutOfRangeError,
    UnsupportedConfigurationError,
)
from isotns.expectation import (
    HierarchicalEvaluator,
    LabeledOperator,
    MPSEvaluator,
    environment,
    extensive_hamiltonian,
    local_expectation,
    mera_local_expectation,
    mps_local_expectation,
)
from isotns.tensor_core import build_interaction, make_rng

from conftest import TEST_SEED, random_term

MPS_CASES = [
    (AnsatzSpec(family="mps", chi=2, d=2, size=4), 1),
    (AnsatzSpec(family="mps", chi=2, d=2, size=8), 2),
    (AnsatzSpec(family="mps", chi=2, d=2, size=12), 1),
    (AnsatzSpec(family="mps", chi=2, d=2, size=12), 3),
    (AnsatzSpec(family="mps", chi=3, d=2, size=6), 2),
    (AnsatzSpec(family="mps", chi=2, d=3, size=5), 2),
]

HIERARCHICAL_CASES = [
    (AnsatzSpec(family="ttns", branching=2, chi=2, d=2, size=3), 1),
    (AnsatzSpec(family="ttns", branching=2, chi=2, d=2, size=3), 2),
    (AnsatzSpec(family="ttns", branching=2, chi=3, d=3, size=2), 2),
    (AnsatzSpec(family="ttns", branching=3, chi=2, d=2, size=2), 2),
    (AnsatzSpec(family="mera", branching=2, chi=2, d=2, size=3), 1),
    (AnsatzSpec(family="mera", branching=2, chi=2, d=2, size=3), 2),
    (AnsatzSpec(family="mera", branching=2, chi=2, d=2, size=3), 3),
    (AnsatzSpec(family="mera", branching=3, chi=2, d=2, size=2), 2),
]


def _label(case):
    spec, width = case
    return f"{spec.family_key}-chi{spec.chi}-d{spec.d}-size{spec.size}-w{width}"


class TestStatevectorOracle:
    """Cone contractions agree with the full state on every placement."""

    @pytest.mark.parametrize("case", MPS_CASES, ids=_label)
    def test_mps(self, case):
        spec, width = case
        inst = sample_instance(spec, TEST_SEED)
        h = random_term(spec.d, width)
        for i in range(1, spec.size - width + 2):
            exact = statevector_expectation(inst, h.matrix, tuple(range(i - 1, i - 1 + width)))
            assert abs(mps_local_expectation(inst, i, h) - exact) < 1e-10

    @pytest.mark.parametrize("case", HIERARCHICAL_CASES, ids=_label)
    def test_hierarchical(self, case):
        spec, width = case
        inst = sample_instance(spec, TEST_SEED)
        geometry = geometry_for(spec)
        h = random_term(spec.d, width)
        for i in range(1, spec.num_sites + 1):
            exact = statevector_expectation(inst, h.matrix, geometry.term_sites(i, width))
            assert abs(mera_local_expectation(inst, i, h) - exact) < 1e-10

    def test_homogeneous_and_trotterized(self):
        spec = AnsatzSpec(family="mera", branching=2, chi=2, d=2, size=3, homogeneous=True, trotter_steps=1)
        inst = sample_instance(spec, TEST_SEED)
        geometry = geometry_for(spec)
        h = random_term(2, 3)
        for i in (1, 4, 8):
            exact = statevector_expectation(inst, h.matrix, geometry.term_sites(i, 3))
            assert abs(local_expectation(inst, i, h) - exact) < 1e-10


class TestSupportChecks:
    """Tests for placement and width validation."""

    def test_mps_support_leaves_chain(self, mps_instance):
        with pytest.raises(SupportOutOfRangeError):
            mps_local_expectation(mps_instance, 6, build_interaction(2, 2))

    def test_mps_site_zero(self, mps_instance):
        with pytest.raises(SupportOutOfRangeError):
            local_expectation(mps_instance, 0, build_interaction(2, 1))

    def test_hierarchical_width_limit(self, mera_instance):
        with pytest.raises(UnsupportedConfigurationError):
            local_expectation(mera_instance, 1, build_interaction(2, 4))

    def test_physical_dimension_mismatch(self, mps_instance):
        with pytest.raises(ShapeMismatchError):
            local_expectation(mps_instance, 1, build_interaction(3, 1))

    def test_family_specific_entry_points(self, mps_instance, mera_instance):
        with pytest.raises(UnsupportedConfigurationError):
            mera_local_expectation(mps_instance, 1, build_interaction(2, 1))
        with pytest.raises(UnsupportedConfigurationError):
            mps_local_expectation(mera_instance, 1, build_interaction(2, 1))


class TestEnvironments:
    """Tests for environment and extensive_hamiltonian."""

    def test_mps_environment_reproduces_energy(self, mps_instance):
        h = random_term(2, 2)
        env = environment(mps_instance, site_key(4), 2, h)
        u = mps_instance.unitary(site_key(4)).matrix
        assert env.tensor_dim == 4
        assert abs(env.energy(u) - local_expectation(mps_instance, 2, h)) < 1e-10

    @pytest.mark.parametrize("key", [disentangler_key(1, 0), isometry_key(2, 1), disentangler_key(3, 0)])
    def test_mera_environment_reproduces_energy(self, mera_instance, key):
        h = random_term(2, 3)
        for i in sorted(causal_cone_sites(mera_instance, key, 3))[:3]:
            env = environment(mera_instance, key, i, h)
            u = mera_instance.unitary(key).matrix
            assert abs(env.energy(u) - local_expectation(mera_instance, i, h)) < 1e-10

    def test_outside_cone(self, mps_instance):
        with pytest.raises(ConeMembershipError) as excinfo:
            environment(mps_instance, site_key(2), 4, build_interaction(2, 1))
        assert excinfo.value.site == 4

    def test_extensive_hamiltonian_placements(self, mps_instance, ttns_instance):
        assert [h.start for h in extensive_hamiltonian(mps_instance, 2)] == [1, 2, 3, 4, 5]
        assert [h.start for h in extensive_hamiltonian(ttns_instance, 2)] == list(range(1, 9))
        assert extensive_hamiltonian(AnsatzSpec(family="mps", chi=2, d=3, size=4), 1)[0].chi == 3

    def test_isotropic_energy_is_bounded(self, mera_instance):
        terms = extensive_hamiltonian(mera_instance, 3)
        values = np.array([local_expectation(mera_instance, h.start, h) for h in terms])
        # |<h>| <= ||h||_op <= sqrt(Tr h^2) = 1
        assert np.all(np.abs(values) <= 1.0 + 1e-12)


TRANSITION_CASES = [
    (AnsatzSpec(family="mps", chi=2, d=2, size=5), 3, None),
    (AnsatzSpec(family="mps", chi=3, d=2, size=4), 2, None),
    (AnsatzSpec(family="ttns", branching=2, chi=2, d=2, size=3), 2, (1,)),
    (AnsatzSpec(family="ttns", branching=3, chi=2, d=2, size=2), 1, (4,)),
    (AnsatzSpec(family="mera", branching=2, chi=2, d=2, size=3), 1, (2, 3, 4)),
    (AnsatzSpec(family="mera", branching=2, chi=2, d=2, size=3), 2, (1, 2, 3)),
    (AnsatzSpec(family="mera", branching=3, chi=2, d=2, size=2), 1, (3, 4)),
]


def _transition_map(spec, seed, layer, fine):
    instance = sample_instance(spec, seed)
    if fine is None:
        return MPSEvaluator(instance).site_map(layer)
    return HierarchicalEvaluator(instance).transition_map(layer, fine)


def _random_labeled(labels, chi, rng, hermitian=False):
    dim = chi ** len(labels)
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    if hermitian:
        m = m @ m.conj().T
        m /= np.trace(m)
    return LabeledOperator(tuple(labels), (chi,) * len(labels), m)


def _inner(a, b):
    return np.vdot(a.matrix, b.permuted(a.labels).matrix)


class TestTransitionMaps:
    """Properties of single cone steps and the densities they produce."""

    @pytest.mark.parametrize("case", TRANSITION_CASES, ids=lambda c: f"{c[0].family_key}-chi{c[0].chi}")
    @settings(max_examples=8, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_ascend_is_adjoint_of_descend(self, case, seed):
        spec, layer, fine = case
        tmap = _transition_map(spec, seed, layer, fine)
        rng = make_rng(seed, 1)
        b = _random_labeled(tmap.program.initial, spec.chi, rng)
        a = _random_labeled(tmap.program.final, spec.chi, rng)
        lhs = _inner(a, tmap.descend(b))
        rhs = _inner(tmap.ascend(a), b)
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))

    @pytest.mark.parametrize("case", TRANSITION_CASES, ids=lambda c: f"{c[0].family_key}-chi{c[0].chi}")
    @settings(max_examples=8, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_descend_preserves_trace(self, case, seed):
        spec, layer, fine = case
        tmap = _transition_map(spec, seed, layer, fine)
        b = _random_labeled(tmap.program.initial, spec.chi, make_rng(seed, 2))
        assert abs(tmap.descend(b).trace() - b.trace()) < 1e-10 * max(1.0, abs(b.trace()))
        eye = np.eye(spec.chi ** len(tmap.program.final), dtype=np.complex128)
        unit = LabeledOperator(tmap.program.final, (spec.chi,) * len(tmap.program.final), eye)
        lifted = tmap.ascend(unit).matrix
        np.testing.assert_allclose(lifted, np.eye(lifted.shape[0]), atol=1e-10)

    @pytest.mark.parametrize("case", TRANSITION_CASES, ids=lambda c: f"{c[0].family_key}-chi{c[0].chi}")
    @settings(max_examples=8, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_descend_keeps_densities_positive(self, case, seed):
        spec, layer, fine = case
        tmap = _transition_map(spec, seed, layer, fine)
        rho = tmap.descend(_random_labeled(tmap.program.initial, spec.chi, make_rng(seed, 3), hermitian=True))
        np.testing.assert_allclose(rho.matrix, rho.matrix.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(rho.matrix).min() > -1e-12
        assert abs(rho.trace() - 1.0) < 1e-10

    @pytest.mark.parametrize("spec,width", [
        (AnsatzSpec(family="ttns", branching=2, chi=2, d=2, size=3), 2),
        (AnsatzSpec(family="mera", branching=2, chi=2, d=2, size=3), 3),
        (AnsatzSpec(family="mera", branching=3, chi=2, d=2, size=2), 2),
    ], ids=["ttns-binary", "mera-binary", "mera-ternary"])
    @settings(max_examples=5, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_cone_densities_are_states(self, spec, width, seed):
        evaluator = HierarchicalEvaluator(sample_instance(spec, seed))
        geometry = geometry_for(spec)
        for i in (1, spec.num_sites):
            for step in geometry.cone_path(geometry.term_sites(i, width)):
                rho = evaluator.density(step.layer - 1, step.fine).matrix
                np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
                assert np.linalg.eigvalsh(rho).min() > -1e-12
                assert abs(np.trace(rho) - 1.0) < 1e-10

    @settings(max_examples=5, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_mps_bond_densities_are_states(self, seed):
        spec = AnsatzSpec(family="mps", chi=3, d=2, size=6)
        evaluator = MPSEvaluator(sample_instance(spec, seed))
        for j in range(spec.size + 1):
            rho = evaluator.density(j).matrix
            assert np.linalg.eigvalsh(rho).min() > -1e-12
            assert abs(np.trace(rho) - 1.0) < 1e-10
