"""
Tests for the tensor algebra kernel: Haar sampling, isometries, operator bases,
interaction terms and leg bookkeeping.
"""
import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings, strategies as st

from isotns.exceptions import InvalidDimensionError, PreconditionError, ShapeMismatchError
from isotns.tensor_core import (
    IsometryTensor,
    LocalOperator,
    build_interaction,
    contract,
    derive_seed,
    gell_mann_basis,
    haar_unitary,
    is_power_of_two,
    isometry_from_unitary,
    make_rng,
    partial_trace,
    pauli_product_basis,
    permute_subsystems,
    random_antihermitian,
)

seed_strategy = st.integers(min_value=0, max_value=2 ** 32 - 1)


class TestHaarSampling:
    """Tests for haar_unitary and the seeded generators."""

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(min_value=1, max_value=16), seed=seed_strategy)
    def test_unitary_residual(self, n, seed):
        """Sampled matrices are unitary to machine precision."""
        u = haar_unitary(n, make_rng(seed))
        assert u.dimension == n
        assert u.residual() < 1e-12

    def test_rejects_empty_dimension(self):
        with pytest.raises(InvalidDimensionError):
            haar_unitary(0, make_rng(0))

    def test_one_dimensional_unitary_is_phase(self):
        u = haar_unitary(1, make_rng(3)).matrix
        assert abs(abs(u[0, 0]) - 1.0) < 1e-14

    def test_streams_are_reproducible(self):
        a = haar_unitary(4, make_rng(11, 2, 5)).matrix
        b = haar_unitary(4, make_rng(11, 2, 5)).matrix
        c = haar_unitary(4, make_rng(11, 2, 6)).matrix
        np.testing.assert_array_equal(a, b)
        assert not np.allclose(a, c)

    def test_derived_seeds_differ_per_counter(self):
        assert derive_seed(1, 0) == derive_seed(1, 0)
        assert derive_seed(1, 0) != derive_seed(1, 1)

    def test_mean_square_entry(self):
        """E|U_00|^2 = 1/n for Haar unitaries."""
        rng = make_rng(42)
        values = np.array([abs(haar_unitary(3, rng).matrix[0, 0]) ** 2 for _ in range(2000)])
        stderr = values.std(ddof=1) / np.sqrt(len(values))
        assert abs(values.mean() - 1 / 3) < 5 * stderr

    def test_entry_distribution(self):
        """|U_00|^2 is Beta(1, n - 1) distributed; a missing phase fix would skew it."""
        rng = make_rng(7)
        values = [abs(haar_unitary(4, rng).matrix[0, 0]) ** 2 for _ in range(2000)]
        assert scipy.stats.kstest(values, scipy.stats.beta(1, 3).cdf).pvalue > 1e-3

    def test_eigenphases_are_uniform(self):
        """Haar eigenphases are marginally uniform on (-pi, pi]."""
        rng = make_rng(8)
        phases = np.concatenate([np.angle(np.linalg.eigvals(haar_unitary(3, rng).matrix)) for _ in range(700)])
        assert scipy.stats.kstest(phases, scipy.stats.uniform(-np.pi, 2 * np.pi).cdf).pvalue > 1e-3


class TestIsometries:
    """Tests for IsometryTensor and isometry_from_unitary."""

    @pytest.mark.parametrize("parent_dim,input_dim", [(4, 2), (8, 2), (9, 3), (12, 3), (6, 6)])
    def test_isometry_condition(self, parent_dim, input_dim):
        v = isometry_from_unitary(haar_unitary(parent_dim, make_rng(parent_dim)), input_dim)
        assert v.matrix.shape == (parent_dim, input_dim)
        assert v.ancilla_dim == parent_dim // input_dim
        assert v.residual() < 1e-12

    def test_columns_come_from_reference_ancilla(self):
        parent = haar_unitary(6, make_rng(1))
        v = isometry_from_unitary(parent, 3)
        for a in range(3):
            np.testing.assert_array_equal(v.matrix[:, a], parent.matrix[:, a * 2])

    def test_indivisible_input_dimension(self):
        with pytest.raises(InvalidDimensionError):
            isometry_from_unitary(haar_unitary(6, make_rng(1)), 4)

    def test_inconsistent_factorisation(self):
        with pytest.raises(ShapeMismatchError):
            IsometryTensor(parent=haar_unitary(6, make_rng(1)), input_dim=2, ancilla_dim=2)


class TestOperatorBases:
    """Tests for the Gell-Mann and Pauli-product bases."""

    @settings(max_examples=5, deadline=None)
    @given(chi=st.integers(min_value=2, max_value=6))
    def test_gell_mann_properties(self, chi):
        basis = gell_mann_basis(chi)
        assert len(basis) == chi * chi - 1
        for element in basis.elements:
            np.testing.assert_allclose(element, element.conj().T, atol=1e-14)
            assert abs(np.trace(element)) < 1e-12
        np.testing.assert_allclose(basis.gram(), 2 * np.eye(len(basis)), atol=1e-12)

    def test_gell_mann_is_pauli_for_qubits(self):
        x, y, z = gell_mann_basis(2).elements
        np.testing.assert_allclose(x, [[0, 1], [1, 0]])
        np.testing.assert_allclose(y, [[0, -1j], [1j, 0]])
        np.testing.assert_allclose(z, [[1, 0], [0, -1]])

    def test_gell_mann_needs_two_levels(self):
        with pytest.raises(InvalidDimensionError):
            gell_mann_basis(1)

    @pytest.mark.parametrize("n", [2, 4, 8])
    def test_pauli_products(self, n):
        basis = pauli_product_basis(n)
        assert len(basis) == n * n
        np.testing.assert_allclose(basis.elements[0], np.eye(n))
        np.testing.assert_allclose(basis.gram(), n * np.eye(n * n), atol=1e-12)
        for s in basis.elements:
            np.testing.assert_allclose(s @ s, np.eye(n), atol=1e-14)

    def test_pauli_products_need_power_of_two(self):
        assert not is_power_of_two(6)
        with pytest.raises(InvalidDimensionError):
            pauli_product_basis(6)


class TestInteractions:
    """Tests for LocalOperator and build_interaction."""

    @settings(max_examples=10, deadline=None)
    @given(chi=st.integers(min_value=2, max_value=4), width=st.integers(min_value=1, max_value=3))
    def test_isotropic_term_normalisation(self, chi, width):
        h = build_interaction(chi, width)
        assert h.width == width
        assert abs(h.square_trace() - 1.0) < 1e-10
        assert abs(np.trace(h.matrix)) < 1e-10
        np.testing.assert_allclose(h.matrix, h.matrix.conj().T, atol=1e-14)

    @pytest.mark.parametrize("chi,width", [(2, 2), (3, 2), (2, 3)])
    def test_single_site_partial_traces_vanish(self, chi, width):
        for reduced in build_interaction(chi, width).single_site_partial_traces():
            assert np.max(np.abs(reduced)) < 1e-12

    def test_placement(self):
        h = build_interaction(2, 2, start=3)
        moved = h.at(5)
        assert h.sites == (3, 4)
        assert moved.sites == (5, 6)
        np.testing.assert_array_equal(moved.matrix, h.matrix)

    def test_rejects_trace(self):
        with pytest.raises(PreconditionError, match="traceless"):
            LocalOperator(chi=2, width=1, matrix=np.eye(2, dtype=np.complex128))

    def test_rejects_non_hermitian(self):
        with pytest.raises(PreconditionError, match="Hermitian"):
            LocalOperator(chi=2, width=1, matrix=np.array([[0, 1], [0, 0]], dtype=np.complex128))

    def test_rejects_wrong_shape(self):
        with pytest.raises(ShapeMismatchError):
            LocalOperator(chi=2, width=2, matrix=np.zeros((2, 2), dtype=np.complex128))

    def test_width_must_be_positive(self):
        with pytest.raises(InvalidDimensionError):
            build_interaction(2, 0)


class TestLegAlgebra:
    """Tests for partial traces, permutations and contractions."""

    def test_partial_trace_of_product(self, rng):
        a = rng.standard_normal((2, 2))
        b = rng.standard_normal((3, 3))
        np.testing.assert_allclose(partial_trace(np.kron(a, b), [2, 3], [1]), a * np.trace(b), atol=1e-12)
        np.testing.assert_allclose(partial_trace(np.kron(a, b), [2, 3], [0]), b * np.trace(a), atol=1e-12)

    def test_partial_trace_shape_check(self):
        with pytest.raises(ShapeMismatchError):
            partial_trace(np.eye(5), [2, 3], [0])

    def test_permutation_swaps_factors(self, rng):
        a = rng.standard_normal((2, 2))
        b = rng.standard_normal((3, 3))
        np.testing.assert_allclose(permute_subsystems(np.kron(a, b), [2, 3], [1, 0]), np.kron(b, a), atol=1e-12)

    def test_invalid_permutation(self):
        with pytest.raises(ShapeMismatchError):
            permute_subsystems(np.eye(4), [2, 2], [0, 0])

    def test_contract_reports_legs(self):
        with pytest.raises(ShapeMismatchError) as excinfo:
            contract(np.zeros((2, 3)), np.zeros((4, 2)), [(1, 0)])
        assert excinfo.value.legs == [(1, 0, 3, 4)]

    def test_contract_matches_matmul(self, rng):
        a = rng.standard_normal((2, 3))
        b = rng.standard_normal((3, 4))
        np.testing.assert_allclose(contract(a, b, [(1, 0)]), a @ b)

    def test_random_antihermitian(self, rng):
        a = random_antihermitian(4, rng)
        np.testing.assert_allclose(a, -a.conj().T, atol=1e-14)
