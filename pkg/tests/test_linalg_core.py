"""Tests for linalg_core module."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from orthoeq.exceptions import ContainmentError, DimensionError
from orthoeq.linalg_core import (
    LinearOperator,
    Pairing,
    RankReport,
    Side,
    Subspace,
    adjoint,
    annihilator,
    complement_columns,
    condition_number,
    embedded_quotient_dual,
    frozen_array,
    is_injective,
    is_invertible,
    is_surjective,
    minimal_extension,
    operator_norm,
    orthonormal_span,
    quotient_injection,
    quotient_norm,
    quotient_projection,
    rank_report,
    restriction,
    same_span,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=5)


def random_pairing(rng: np.random.Generator, dim: int) -> Pairing:
    """A well-conditioned, generally non-symmetric pairing."""
    perturbation = np.tanh(rng.standard_normal((dim, dim))) / dim
    return Pairing(dim=dim, gram=np.eye(dim) + 0.3 * perturbation)


def line(*entries: float) -> Subspace:
    v = np.array(entries, dtype=np.float64)
    return Subspace.from_vectors([v / np.linalg.norm(v)], len(entries))


class TestFrozenArray:
    """Tests for frozen_array."""

    def test_read_only(self) -> None:
        """Test that the copy cannot be written."""
        arr = frozen_array([[1.0, 2.0]])
        with pytest.raises(ValueError):
            arr[0, 0] = 3.0

    def test_rejects_nan(self) -> None:
        """Test that non-finite entries are rejected."""
        with pytest.raises(ValueError, match="NaN"):
            frozen_array([1.0, np.nan])

    def test_checks_ndim(self) -> None:
        """Test the dimension check."""
        with pytest.raises(ValueError, match="2-d"):
            frozen_array([1.0, 2.0], ndim=2)


class TestPairing:
    """Tests for Pairing model."""

    def test_standard_evaluate(self) -> None:
        """Test the dot product pairing."""
        assert Pairing.standard(2).evaluate([1, 2], [3, 4]) == 11.0

    def test_weighted_evaluate(self) -> None:
        """Test that evaluation goes through the Gram matrix."""
        pairing = Pairing(dim=2, gram=[[1.0, 1.0], [0.0, 1.0]])
        assert pairing.evaluate([1, 0], [0, 1]) == 1.0
        assert pairing.evaluate([0, 1], [1, 0]) == 0.0

    def test_degenerate_rejected(self) -> None:
        """Test that a singular Gram matrix is rejected."""
        with pytest.raises(ValidationError, match="degenerate"):
            Pairing(dim=2, gram=[[1.0, 2.0], [2.0, 4.0]])

    def test_shape_mismatch_rejected(self) -> None:
        """Test that the Gram matrix must be dim x dim."""
        with pytest.raises(ValidationError):
            Pairing(dim=3, gram=np.eye(2))

    def test_transpose(self) -> None:
        """Test the transposed pairing."""
        pairing = Pairing(dim=2, gram=[[1.0, 1.0], [0.0, 1.0]])
        assert np.array_equal(pairing.transpose().gram, pairing.gram.T)

    def test_positive_definite(self) -> None:
        """Test SPD detection."""
        assert Pairing.standard(3).is_positive_definite()
        assert not Pairing(dim=2, gram=[[1.0, 1.0], [0.0, 1.0]]).is_positive_definite()
        assert not Pairing(dim=2, gram=[[1.0, 0.0], [0.0, -1.0]]).is_positive_definite()


class TestSubspace:
    """Tests for Subspace model."""

    def test_non_orthonormal_rejected(self) -> None:
        """Test that the basis must be orthonormal."""
        with pytest.raises(ValidationError, match="orthonormal"):
            Subspace(ambient_dim=2, basis=[[1.0], [1.0]])

    def test_zero_and_full(self) -> None:
        """Test the trivial subspaces."""
        assert Subspace.zero(3).rank == 0
        assert Subspace.full(3).rank == 3
        assert Subspace.full(3).contains(Subspace.zero(3))

    def test_distance_and_containment(self) -> None:
        """Test distances to a line."""
        x_axis = line(1.0, 0.0)
        assert x_axis.distance([3.0, 4.0]) == pytest.approx(4.0)
        assert Subspace.full(2).contains(x_axis)
        assert not x_axis.contains(line(0.0, 1.0))

    def test_complement(self) -> None:
        """Test the Euclidean complement."""
        assert same_span(line(1.0, 1.0).complement(), line(1.0, -1.0))

    def test_embed_coordinates(self) -> None:
        """Test that coordinates and embedding invert each other on the subspace."""
        plane = Subspace.from_vectors([np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])], 3)
        assert np.allclose(plane.embed(plane.coordinates([2.0, 0.0, 5.0])), [2.0, 0.0, 5.0])


class TestOrthonormalSpan:
    """Tests for orthonormal_span."""

    def test_dependent_vectors(self) -> None:
        """Test that parallel vectors span a line with canonical sign."""
        span = orthonormal_span([[1.0, 0.0], [2.0, 0.0]])
        assert span.rank == 1
        assert np.allclose(span.basis[:, 0], [1.0, 0.0])

    def test_canonical_sign(self) -> None:
        """Test that the largest-magnitude entry of each basis vector is positive."""
        span = orthonormal_span([[-3.0, 1.0, 0.0]])
        assert span.basis[0, 0] > 0

    def test_full_span_is_standard_basis(self) -> None:
        """Test that a spanning set gives the identity basis."""
        span = orthonormal_span([[1.0, 1.0], [1.0, -1.0], [0.0, 3.0]])
        assert np.array_equal(span.basis, np.eye(2))

    def test_empty_needs_dimension(self) -> None:
        """Test the empty list."""
        with pytest.raises(DimensionError):
            orthonormal_span([])
        assert orthonormal_span([], ambient_dim=3).rank == 0

    def test_mismatched_lengths(self) -> None:
        """Test vectors of different lengths."""
        with pytest.raises(DimensionError):
            orthonormal_span([[1.0, 0.0], [1.0, 0.0, 0.0]])

    def test_relative_tolerance(self) -> None:
        """Test that tiny directions below rel_tol are dropped."""
        span = orthonormal_span([[1.0, 0.0], [1.0, 1e-12]])
        assert span.rank == 1

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, dim=dims)
    def test_span_contains_inputs(self, seed: int, dim: int) -> None:
        """Test that each input vector lies in its span."""
        rng = np.random.default_rng(seed)
        count = int(rng.integers(1, dim + 2))
        vectors = rng.standard_normal((count, dim))
        span = orthonormal_span(vectors)
        assert span.rank == min(count, dim)
        for v in vectors:
            assert span.distance(v) <= 1e-9 * (1 + np.linalg.norm(v))


class TestAnnihilator:
    """Tests for annihilator."""

    def test_standard_left(self) -> None:
        """Test the annihilator of the x axis in standard coordinates."""
        assert same_span(annihilator(line(1.0, 0.0), Pairing.standard(2)), line(0.0, 1.0))

    def test_weighted_sides(self) -> None:
        """Test that left and right annihilators differ for a non-symmetric pairing."""
        pairing = Pairing(dim=2, gram=[[1.0, 1.0], [0.0, 1.0]])
        assert same_span(annihilator(line(1.0, 0.0), pairing, Side.LEFT), line(1.0, -1.0))
        assert same_span(annihilator(line(1.0, 0.0), pairing, "right"), line(0.0, 1.0))

    def test_full_and_zero(self) -> None:
        """Test the extreme cases."""
        pairing = Pairing.standard(3)
        assert annihilator(Subspace.full(3), pairing).rank == 0
        assert annihilator(Subspace.zero(3), pairing).rank == 3

    def test_dimension_mismatch(self) -> None:
        """Test a pairing of the wrong size."""
        with pytest.raises(DimensionError):
            annihilator(line(1.0, 0.0), Pairing.standard(3))

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, dim=dims, side=st.sampled_from(list(Side)))
    def test_annihilates(self, seed: int, dim: int, side: Side) -> None:
        """Test rank and vanishing of the pairing on random subspaces."""
        rng = np.random.default_rng(seed)
        pairing = random_pairing(rng, dim)
        rank = int(rng.integers(0, dim + 1))
        V = orthonormal_span(rng.standard_normal((rank, dim)), ambient_dim=dim)
        W = annihilator(V, pairing, side)
        assert W.rank == dim - V.rank
        if side is Side.LEFT:
            values = V.basis.T @ pairing.gram @ W.basis
        else:
            values = W.basis.T @ pairing.gram @ V.basis
        assert values.size == 0 or np.max(np.abs(values)) <= 1e-10

    @settings(max_examples=500, deadline=None)
    @given(seed=seeds, dim=st.integers(min_value=1, max_value=8))
    def test_double_annihilator(self, seed: int, dim: int) -> None:
        """Test that annihilating twice returns the subspace for invertible pairings."""
        rng = np.random.default_rng(seed)
        pairing = random_pairing(rng, dim)
        rank = int(rng.integers(0, dim + 1))
        W = orthonormal_span(rng.standard_normal((rank, dim)), ambient_dim=dim)
        W_perp_perp = annihilator(annihilator(W, pairing, Side.LEFT), pairing, Side.RIGHT)
        assert W_perp_perp.rank == W.rank
        assert same_span(W_perp_perp, W, tol=1e-9)


class TestAdjoint:
    """Tests for adjoint."""

    def test_standard_is_transpose(self) -> None:
        """Test that the adjoint under dot products is the transpose."""
        S = LinearOperator.from_matrix([[1.0, 2.0, 0.0], [3.0, 4.0, 5.0]])
        assert np.allclose(adjoint(S).matrix, S.matrix.T)
        assert (adjoint(S).domain_dim, adjoint(S).codomain_dim) == (2, 3)

    def test_weighted_example(self) -> None:
        """Test A = [2] with G_E = [2] and standard codomain: A* = [1]."""
        A = LinearOperator.from_matrix([[2.0]], domain_pairing=Pairing(dim=1, gram=[[2.0]]))
        assert adjoint(A).matrix[0, 0] == pytest.approx(1.0)

    def test_zero_dimensional_side(self) -> None:
        """Test an operator into the zero space."""
        S = LinearOperator(domain_dim=2, codomain_dim=0, matrix=np.zeros((0, 2)))
        star = adjoint(S)
        assert star.matrix.shape == (2, 0)
        assert star.domain_pairing is None

    @settings(max_examples=500, deadline=None)
    @given(seed=seeds, n=dims, m=dims)
    def test_defining_identity_and_involution(self, seed: int, n: int, m: int) -> None:
        """Test <S x, b> = <x, S* b> and S** = S for non-symmetric pairings."""
        rng = np.random.default_rng(seed)
        S = LinearOperator.from_matrix(
            rng.standard_normal((m, n)), random_pairing(rng, n), random_pairing(rng, m)
        )
        star = adjoint(S)
        x, b = rng.standard_normal(n), rng.standard_normal(m)
        lhs = S.codomain_pairing.evaluate(S.apply(x), b)
        rhs = S.domain_pairing.evaluate(x, star.apply(b))
        assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(lhs)))
        assert np.allclose(adjoint(star).matrix, S.matrix, atol=1e-10)

    @settings(max_examples=500, deadline=None)
    @given(seed=seeds, n=dims, m=dims)
    def test_invertibility_and_injectivity_facts(self, seed: int, n: int, m: int) -> None:
        """Test S invertible iff S* is, and S* surjective implies S injective."""
        rng = np.random.default_rng(seed)
        rank = int(rng.integers(0, min(n, m) + 1))
        matrix = rng.standard_normal((m, rank)) @ rng.standard_normal((rank, n))
        S = LinearOperator.from_matrix(matrix, random_pairing(rng, n), random_pairing(rng, m))
        star = adjoint(S)
        assert is_invertible(S) == is_invertible(star)
        if is_surjective(star):
            assert is_injective(S)


class TestQuotient:
    """Tests for quotient_projection, restriction and the injection."""

    def test_plane_mod_line(self) -> None:
        """Test R^2 / span{(0, 1)}."""
        P, reps = quotient_projection(Subspace.full(2), line(0.0, 1.0))
        assert reps.rank == 1
        assert np.allclose(reps.basis[:, 0], [1.0, 0.0])
        assert np.allclose(P.matrix, [[1.0, 0.0]])

    def test_not_contained(self) -> None:
        """Test that M must lie in L."""
        with pytest.raises(ContainmentError):
            quotient_projection(line(1.0, 0.0), line(0.0, 1.0))

    def test_quotient_by_itself(self) -> None:
        """Test that L / L is zero-dimensional."""
        P, reps = quotient_projection(line(1.0, 1.0), line(1.0, 1.0))
        assert reps.rank == 0
        assert P.matrix.shape == (0, 1)
        assert P.codomain_pairing is None

    def test_injection_is_transpose(self) -> None:
        """Test that I maps (L/M)* into L* as P^T."""
        P, _ = quotient_projection(Subspace.full(3), line(0.0, 0.0, 1.0))
        assert np.array_equal(quotient_injection(P).matrix, P.matrix.T)

    def test_restriction_matrix(self) -> None:
        """Test beta -> (<b_i, beta>)_i."""
        pairing = Pairing(dim=2, gram=[[2.0, 0.0], [0.0, 3.0]])
        R = restriction(line(1.0, 0.0), pairing)
        assert np.allclose(R.apply([1.0, 1.0]), [2.0])

    def test_quotient_norm(self) -> None:
        """Test the distance to M."""
        assert quotient_norm([3.0, 4.0], line(0.0, 1.0)) == pytest.approx(3.0)


class TestComplementColumns:
    """Tests for complement_columns."""

    def test_dependent_columns(self) -> None:
        """Test that the complement dimension follows the numerical rank."""
        columns = np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]])
        complement = complement_columns(columns)
        assert complement.shape == (3, 2)
        assert np.allclose(columns.T @ complement, 0.0)
        assert np.allclose(complement.T @ complement, np.eye(2))

    def test_no_columns(self) -> None:
        """Test that an empty span has the whole space as complement."""
        assert np.array_equal(complement_columns(np.zeros((2, 0))), np.eye(2))

    def test_spanning_columns(self) -> None:
        """Test that a spanning set leaves nothing."""
        assert complement_columns(np.eye(3)).shape == (3, 0)


class TestMinimalExtension:
    """Tests for minimal_extension."""

    def test_zero_extension(self) -> None:
        """Test that a standard-pairing extension vanishes off L."""
        beta = minimal_extension(line(1.0, 0.0), Pairing.standard(2), [3.0])
        assert np.allclose(beta, [3.0, 0.0])

    def test_restricts_back(self) -> None:
        """Test R beta = functional for a weighted pairing."""
        pairing = Pairing(dim=3, gram=[[2.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 4.0]])
        L = Subspace.from_vectors([np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])], 3)
        beta = minimal_extension(L, pairing, [1.0, -2.0])
        assert np.allclose(restriction(L, pairing).apply(beta), [1.0, -2.0])

    def test_vanishes_on_pairing_complement(self) -> None:
        """Test that the extension is zero on {y : y^T G L = 0}."""
        pairing = Pairing(dim=2, gram=[[2.0, 1.0], [1.0, 2.0]])
        beta = minimal_extension(line(1.0, 0.0), pairing, [1.0])
        assert np.allclose(beta, [0.5, 0.0], atol=1e-12)
        complement = np.array([-1.0, 2.0]) / np.sqrt(5.0)
        assert pairing.evaluate(complement, beta) == pytest.approx(0.0, abs=1e-12)
        assert pairing.evaluate([1.0, 0.0], beta) == pytest.approx(1.0)

    def test_least_pairing_norm(self) -> None:
        """Test that no other extension has a smaller pairing norm."""
        pairing = Pairing(dim=2, gram=[[2.0, 1.0], [1.0, 2.0]])
        beta = minimal_extension(line(1.0, 0.0), pairing, [1.0])
        norm = beta @ pairing.gram @ beta
        for theta in np.linspace(-1.0, 1.0, 9):
            other = beta + theta * np.array([-1.0, 2.0])
            assert pairing.evaluate([1.0, 0.0], other) == pytest.approx(1.0)
            assert other @ pairing.gram @ other >= norm - 1e-12

    def test_isotropic_subspace(self) -> None:
        """Test the Euclidean complement when L^T G L vanishes."""
        pairing = Pairing(dim=2, gram=[[0.0, 1.0], [-1.0, 0.0]])
        beta = minimal_extension(line(1.0, 0.0), pairing, [3.0])
        assert np.allclose(beta, [0.0, 3.0])
        assert pairing.evaluate([1.0, 0.0], beta) == pytest.approx(3.0)
        assert pairing.evaluate([0.0, 1.0], beta) == pytest.approx(0.0)

    def test_zero_subspace(self) -> None:
        """Test that the only functional on {0} extends to zero."""
        beta = minimal_extension(Subspace.zero(3), Pairing.standard(3), [])
        assert np.array_equal(beta, np.zeros(3))

    @settings(max_examples=100, deadline=None)
    @given(seed=seeds, dim=dims)
    def test_restriction_recovers_functional(self, seed: int, dim: int) -> None:
        """Test R beta = functional for random subspaces and pairings."""
        rng = np.random.default_rng(seed)
        pairing = random_pairing(rng, dim)
        rank = int(rng.integers(1, dim + 1))
        L = orthonormal_span(list(rng.standard_normal((rank, dim))), ambient_dim=dim)
        functional = rng.standard_normal(L.rank)
        beta = minimal_extension(L, pairing, functional)
        assert np.allclose(restriction(L, pairing).apply(beta), functional, atol=1e-9)


class TestEmbeddedQuotientDual:
    """Tests for embedded_quotient_dual."""

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, dim=dims)
    def test_image_is_w(self, seed: int, dim: int) -> None:
        """Test that the injected dual of C / W-perp is W."""
        rng = np.random.default_rng(seed)
        pairing = random_pairing(rng, dim)
        rank = int(rng.integers(0, dim + 1))
        W = orthonormal_span(rng.standard_normal((rank, dim)), ambient_dim=dim)
        kernel, image = embedded_quotient_dual(W, pairing)
        assert kernel.rank == dim - W.rank
        assert same_span(image, W, tol=1e-9)


class TestRankAndConditioning:
    """Tests for rank_report, operator_norm and condition_number."""

    def test_rank_report(self) -> None:
        """Test a nearly singular diagonal matrix."""
        report = rank_report(np.diag([1.0, 1e-12]))
        assert report.rank == 1
        assert report.singular_values == pytest.approx((1.0, 1e-12))
        assert report.tolerance_used == pytest.approx(1e-10)

    def test_rank_report_validator(self) -> None:
        """Test that an inconsistent report is rejected."""
        with pytest.raises(ValidationError):
            RankReport(rank=2, singular_values=(1.0, 0.0), tolerance_used=0.5)

    def test_condition_number(self) -> None:
        """Test finite, singular and non-square cases."""
        def cond(matrix: np.ndarray) -> float:
            return condition_number(LinearOperator.from_matrix(matrix))

        assert cond(np.diag([1.0, 2.0])) == pytest.approx(2.0)
        assert cond(np.diag([1.0, 0.0])) == float("inf")
        assert cond(np.ones((2, 3))) == float("inf")

    def test_operator_norm(self) -> None:
        """Test the largest singular value."""
        S = LinearOperator.from_matrix([[3.0, 0.0], [0.0, -5.0]])
        assert operator_norm(S) == pytest.approx(5.0)

    def test_injective_surjective(self) -> None:
        """Test a tall embedding."""
        S = LinearOperator.from_matrix([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
        assert is_injective(S)
        assert not is_surjective(S)
        assert not is_invertible(S)


class TestLinearOperator:
    """Tests for LinearOperator model."""

    def test_default_pairings(self) -> None:
        """Test that missing pairings become standard."""
        S = LinearOperator.from_matrix([[1.0, 2.0]])
        assert np.array_equal(S.domain_pairing.gram, np.eye(2))
        assert np.array_equal(S.codomain_pairing.gram, np.eye(1))

    def test_shape_mismatch(self) -> None:
        """Test that the matrix shape must match the dimensions."""
        with pytest.raises(ValidationError):
            LinearOperator(domain_dim=2, codomain_dim=2, matrix=np.eye(3))

    def test_zero_side_rejects_pairing(self) -> None:
        """Test that a zero-dimensional side cannot carry a pairing."""
        with pytest.raises(ValidationError):
            LinearOperator(
                domain_dim=1,
                codomain_dim=0,
                matrix=np.zeros((0, 1)),
                codomain_pairing=Pairing.standard(1),
            )

    def test_compose(self) -> None:
        """Test composition and its dimension check."""
        S = LinearOperator.from_matrix([[1.0, 2.0]])
        T = LinearOperator.from_matrix([[1.0], [1.0]])
        assert np.array_equal(S.compose(T).matrix, [[3.0]])
        with pytest.raises(DimensionError):
            S.compose(S)

    def test_apply_rows(self) -> None:
        """Test that a 2-d argument is treated as rows of vectors."""
        S = LinearOperator.from_matrix([[1.0, 2.0]])
        assert np.array_equal(S.apply([[1.0, 1.0], [2.0, 0.0]]), [[3.0], [2.0]])
