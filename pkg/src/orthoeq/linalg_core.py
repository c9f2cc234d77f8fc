"""Pairing-aware dense linear algebra.

Spaces are coordinate spaces R^d. A dual space is represented by coordinate
vectors of the same dimension, and every evaluation <x, alpha> goes through the
Gram matrix of a Pairing: <x, alpha> = x^T G alpha.
"""

from collections.abc import Sequence
from enum import Enum
from typing import Any

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from orthoeq.config import (
    CONDITION_LIMIT,
    CONTAINMENT_TOL,
    DEFAULT_RANK_TOL,
    ORTHONORMAL_TOL,
    SYMMETRY_TOL,
)
from orthoeq.exceptions import ContainmentError, DimensionError, SingularPairingError


def frozen_array(value: Any, ndim: int | None = None) -> np.ndarray:
    """Copy a value into a read-only float64 array.

    Args:
        value: Anything numpy can turn into an array.
        ndim: Expected number of dimensions, if any.

    Returns:
        A read-only array that owns its data.
    """
    arr = np.array(value, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"Expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Array contains NaN or infinite entries")
    arr.setflags(write=False)
    return arr


def _canonical_basis(basis: np.ndarray) -> np.ndarray:
    """Fix the sign of each column so its largest-magnitude entry is positive.

    A basis spanning its whole ambient space becomes the standard basis.
    """
    dim, rank = basis.shape
    if rank == dim:
        return np.eye(dim)
    out = np.array(basis, dtype=np.float64)
    for j in range(rank):
        pivot = int(np.argmax(np.abs(out[:, j])))
        if out[pivot, j] < 0:
            out[:, j] = -out[:, j]
    return out


class Side(str, Enum):
    """Which argument of the pairing an annihilator quantifies over."""

    LEFT = "left"
    RIGHT = "right"


class Pairing(BaseModel):
    """A nondegenerate bilinear form <x, alpha> = x^T G alpha."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int = Field(ge=1, description="Dimension of the space and of its dual")
    gram: np.ndarray = Field(description="dim x dim Gram matrix")

    @field_validator("gram", mode="before")
    @classmethod
    def _coerce_gram(cls, value: Any) -> np.ndarray:
        return frozen_array(value, ndim=2)

    @model_validator(mode="after")
    def _check_nondegenerate(self) -> "Pairing":
        if self.gram.shape != (self.dim, self.dim):
            raise ValueError(f"Gram matrix shape {self.gram.shape} does not match dim {self.dim}")
        singular_values = scipy.linalg.svdvals(self.gram)
        if singular_values[-1] <= DEFAULT_RANK_TOL * singular_values[0]:
            raise ValueError(
                f"Gram matrix is degenerate (singular values {singular_values.tolist()})"
            )
        return self

    @classmethod
    def standard(cls, dim: int) -> "Pairing":
        """Create the standard pairing with identity Gram matrix."""
        return cls(dim=dim, gram=np.eye(dim))

    def evaluate(self, x: Any, alpha: Any) -> float:
        """Evaluate <x, alpha>."""
        return float(np.asarray(x, dtype=np.float64) @ self.gram @ np.asarray(alpha, np.float64))

    def transpose(self) -> "Pairing":
        """Pairing of the dual space against the original one."""
        return Pairing(dim=self.dim, gram=self.gram.T)

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        return bool(np.max(np.abs(self.gram - self.gram.T)) <= tol)

    def is_positive_definite(self) -> bool:
        """Check symmetry and strictly positive eigenvalues."""
        if not self.is_symmetric():
            return False
        return bool(np.min(np.linalg.eigvalsh(self.gram)) > 0)


class Subspace(BaseModel):
    """A subspace of R^ambient_dim given by orthonormal basis columns."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    ambient_dim: int = Field(ge=1)
    basis: np.ndarray = Field(description="ambient_dim x rank, orthonormal columns")

    @model_validator(mode="before")
    @classmethod
    def _coerce_basis(cls, data: Any) -> Any:
        if isinstance(data, dict) and "basis" in data:
            basis = np.array(data["basis"], dtype=np.float64)
            if basis.size == 0 and data.get("ambient_dim") is not None:
                basis = np.zeros((int(data["ambient_dim"]), 0))
            data = {**data, "basis": frozen_array(basis, ndim=2)}
        return data

    @model_validator(mode="after")
    def _check_orthonormal(self) -> "Subspace":
        if self.basis.shape[0] != self.ambient_dim:
            raise ValueError(
                f"Basis has {self.basis.shape[0]} rows, ambient dimension is {self.ambient_dim}"
            )
        if self.rank > self.ambient_dim:
            raise ValueError("Rank exceeds ambient dimension")
        gram = self.basis.T @ self.basis
        if self.rank and np.max(np.abs(gram - np.eye(self.rank))) > ORTHONORMAL_TOL:
            raise ValueError("Basis columns are not orthonormal")
        return self

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim=ambient_dim, basis=np.zeros((ambient_dim, 0)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim=ambient_dim, basis=np.eye(ambient_dim))

    @classmethod
    def from_columns(cls, basis: np.ndarray) -> "Subspace":
        """Wrap orthonormal columns, applying the canonical sign convention."""
        basis = np.asarray(basis, dtype=np.float64)
        return cls(ambient_dim=basis.shape[0], basis=_canonical_basis(basis))

    @classmethod
    def from_vectors(cls, vectors: Sequence[Any], ambient_dim: int) -> "Subspace":
        """Build a subspace from a list of orthonormal vectors."""
        if len(vectors) == 0:
            return cls.zero(ambient_dim)
        return cls(ambient_dim=ambient_dim, basis=np.column_stack(vectors))

    @property
    def rank(self) -> int:
        return int(self.basis.shape[1])

    @property
    def vectors(self) -> list[np.ndarray]:
        """Basis vectors as a list."""
        return [self.basis[:, j] for j in range(self.rank)]

    @property
    def projector(self) -> np.ndarray:
        """Euclidean orthogonal projector onto the subspace."""
        return self.basis @ self.basis.T

    def coordinates(self, v: Any) -> np.ndarray:
        """Coordinates of the orthogonal projection of v in this basis."""
        return self.basis.T @ np.asarray(v, dtype=np.float64)

    def embed(self, coords: Any) -> np.ndarray:
        """Ambient vector with the given coordinates."""
        return self.basis @ np.asarray(coords, dtype=np.float64)

    def distance(self, v: Any) -> float:
        """Euclidean distance from v to the subspace."""
        v = np.asarray(v, dtype=np.float64)
        return float(np.linalg.norm(v - self.projector @ v))

    def containment_residual(self, other: "Subspace") -> float:
        """Largest distance from a basis vector of other to this subspace."""
        if other.ambient_dim != self.ambient_dim:
            raise DimensionError(
                f"Ambient dimensions differ: {self.ambient_dim} vs {other.ambient_dim}"
            )
        if other.rank == 0:
            return 0.0
        gap = other.basis - self.projector @ other.basis
        return float(np.max(np.linalg.norm(gap, axis=0)))

    def contains(self, other: "Subspace", tol: float = CONTAINMENT_TOL) -> bool:
        return self.containment_residual(other) <= tol

    def complement(self) -> "Subspace":
        """Euclidean orthogonal complement in the ambient space."""
        return annihilator(self, Pairing.standard(self.ambient_dim), Side.LEFT)


class LinearOperator(BaseModel):
    """A dense matrix between two coordinate spaces, each with its pairing.

    A zero-dimensional side carries no pairing.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    domain_dim: int = Field(ge=0)
    codomain_dim: int = Field(ge=0)
    matrix: np.ndarray = Field(description="codomain_dim x domain_dim")
    domain_pairing: Pairing | None = None
    codomain_pairing: Pairing | None = None

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "matrix" not in data:
            return data
        data = dict(data)
        matrix = np.array(data["matrix"], dtype=np.float64)
        rows, cols = data.get("codomain_dim"), data.get("domain_dim")
        if matrix.size == 0 and rows is not None and cols is not None:
            matrix = np.zeros((int(rows), int(cols)))
        data["matrix"] = frozen_array(matrix, ndim=2)
        for dim_key, pairing_key in (
            ("domain_dim", "domain_pairing"),
            ("codomain_dim", "codomain_pairing"),
        ):
            dim = data.get(dim_key)
            if data.get(pairing_key) is None and dim is not None and int(dim) > 0:
                data[pairing_key] = Pairing.standard(int(dim))
        return data

    @model_validator(mode="after")
    def _check_shapes(self) -> "LinearOperator":
        if self.matrix.shape != (self.codomain_dim, self.domain_dim):
            raise ValueError(
                f"Matrix shape {self.matrix.shape} does not match "
                f"{self.codomain_dim} x {self.domain_dim}"
            )
        for dim, pairing, name in (
            (self.domain_dim, self.domain_pairing, "domain"),
            (self.codomain_dim, self.codomain_pairing, "codomain"),
        ):
            if dim == 0 and pairing is not None:
                raise ValueError(f"Zero-dimensional {name} cannot carry a pairing")
            if dim > 0 and (pairing is None or pairing.dim != dim):
                raise ValueError(f"{name.capitalize()} pairing does not match dimension {dim}")
        return self

    @classmethod
    def from_matrix(
        cls,
        matrix: Any,
        domain_pairing: Pairing | None = None,
        codomain_pairing: Pairing | None = None,
    ) -> "LinearOperator":
        """Create an operator, reading the dimensions off the matrix."""
        matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        return cls(
            domain_dim=matrix.shape[1],
            codomain_dim=matrix.shape[0],
            matrix=matrix,
            domain_pairing=domain_pairing,
            codomain_pairing=codomain_pairing,
        )

    @classmethod
    def identity(cls, pairing: Pairing) -> "LinearOperator":
        return cls(
            domain_dim=pairing.dim,
            codomain_dim=pairing.dim,
            matrix=np.eye(pairing.dim),
            domain_pairing=pairing,
            codomain_pairing=pairing,
        )

    def apply(self, x: Any) -> np.ndarray:
        """Apply to a vector, or to each row of a 2-d array of vectors."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            return x @ self.matrix.T
        return self.matrix @ x

    def with_pairings(
        self, domain_pairing: Pairing | None, codomain_pairing: Pairing | None
    ) -> "LinearOperator":
        """Same matrix, different pairings."""
        return LinearOperator(
            domain_dim=self.domain_dim,
            codomain_dim=self.codomain_dim,
            matrix=self.matrix,
            domain_pairing=domain_pairing,
            codomain_pairing=codomain_pairing,
        )

    def compose(self, inner: "LinearOperator") -> "LinearOperator":
        """Return self after inner."""
        if inner.codomain_dim != self.domain_dim:
            raise DimensionError(
                f"Cannot compose: inner codomain {inner.codomain_dim} != domain {self.domain_dim}"
            )
        return LinearOperator(
            domain_dim=inner.domain_dim,
            codomain_dim=self.codomain_dim,
            matrix=self.matrix @ inner.matrix,
            domain_pairing=inner.domain_pairing,
            codomain_pairing=self.codomain_pairing,
        )


class RankReport(BaseModel):
    """Outcome of a singular-value rank decision."""

    model_config = ConfigDict(frozen=True)

    rank: int = Field(ge=0)
    singular_values: tuple[float, ...] = Field(description="Descending, nonnegative")
    tolerance_used: float = Field(ge=0)

    @model_validator(mode="after")
    def _check_rank(self) -> "RankReport":
        counted = sum(1 for s in self.singular_values if s > self.tolerance_used)
        if counted != self.rank:
            raise ValueError(f"Rank {self.rank} disagrees with {counted} singular values above tol")
        return self


def rank_report(matrix: Any, rel_tol: float = DEFAULT_RANK_TOL) -> RankReport:
    """Decide the numerical rank of a matrix.

    Singular values at or below rel_tol times the largest one count as zero.

    Args:
        matrix: A 2-d array.
        rel_tol: Relative threshold.

    Returns:
        The rank decision with the singular values it was based on.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    singular_values = scipy.linalg.svdvals(matrix) if matrix.size else np.zeros(0)
    tolerance = float(rel_tol * singular_values[0]) if singular_values.size else 0.0
    return RankReport(
        rank=int(np.sum(singular_values > tolerance)),
        singular_values=tuple(float(s) for s in singular_values),
        tolerance_used=tolerance,
    )


def _stack_vectors(vectors: Any, ambient_dim: int | None) -> np.ndarray | None:
    """Stack vectors as columns; None for an empty list."""
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        if vectors.shape[0] == 0:
            return None
        rows = list(vectors)
    else:
        rows = [np.asarray(v, dtype=np.float64).ravel() for v in vectors]
        if not rows:
            return None
    sizes = {len(r) for r in rows}
    if len(sizes) != 1:
        raise DimensionError(f"Vectors have differing dimensions: {sorted(sizes)}")
    dim = sizes.pop()
    if dim < 1:
        raise DimensionError("Vectors must have at least one entry")
    if ambient_dim is not None and dim != ambient_dim:
        raise DimensionError(f"Vectors have dimension {dim}, expected {ambient_dim}")
    return np.column_stack(rows)


def orthonormal_span(
    vectors: Any,
    rel_tol: float = DEFAULT_RANK_TOL,
    ambient_dim: int | None = None,
) -> Subspace:
    """Orthonormal basis for the span of a list of vectors.

    The rank is read off the singular values of the stacked vectors; values at
    or below rel_tol times the largest count as zero. The basis is the leading
    left singular vectors with canonical signs, or the standard basis when the
    vectors span the whole space.

    Args:
        vectors: Sequence of equal-length vectors, or a 2-d array of row vectors.
        rel_tol: Relative rank threshold, must be positive.
        ambient_dim: Dimension of the ambient space. Required for an empty list.

    Returns:
        The spanned subspace.

    Raises:
        DimensionError: If the list is empty and ambient_dim is not given, or
            the vectors disagree in length.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    stacked = _stack_vectors(vectors, ambient_dim)
    if stacked is None:
        if ambient_dim is None:
            raise DimensionError("Cannot infer the ambient dimension of an empty span")
        return Subspace.zero(ambient_dim)
    left, singular_values, _ = scipy.linalg.svd(stacked, full_matrices=False)
    rank = int(np.sum(singular_values > rel_tol * singular_values[0]))
    return Subspace.from_columns(left[:, :rank])


def complement_columns(columns: np.ndarray, rel_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of a column span.

    Singular values below rel_tol times the largest count as zero.
    """
    if columns.shape[1] == 0:
        return np.eye(columns.shape[0])
    return scipy.linalg.null_space(columns.T, rcond=rel_tol)


def annihilator(V: Subspace, pairing: Pairing, side: Side | str = Side.LEFT) -> Subspace:
    """Annihilator of a subspace under a pairing.

    With side=left, V lives in the primal space and the result is
    {alpha : x^T G alpha = 0 for all x in V}. With side=right, V lives in the
    dual and the result is {x : x^T G alpha = 0 for all alpha in V}.

    Args:
        V: The subspace to annihilate.
        pairing: The pairing, of the same dimension as V's ambient space.
        side: Left (annihilator in the dual) or right (pre-annihilator).

    Returns:
        A subspace of rank ambient_dim - rank(V).

    Raises:
        DimensionError: If dimensions do not match.
    """
    side = Side(side)
    if V.ambient_dim != pairing.dim:
        raise DimensionError(
            f"Subspace lives in R^{V.ambient_dim}, pairing has dimension {pairing.dim}"
        )
    gram = pairing.gram if side is Side.LEFT else pairing.gram.T
    if V.rank == V.ambient_dim:
        return Subspace.zero(V.ambient_dim)
    null = complement_columns(gram.T @ V.basis)
    return Subspace.from_columns(null)


def _gram(pairing: Pairing | None, dim: int) -> np.ndarray:
    return pairing.gram if pairing is not None else np.eye(dim)


def adjoint(S: LinearOperator) -> LinearOperator:
    """Adjoint of an operator with respect to its pairings.

    S* = G_dom^-1 S^T G_cod, so that <S x, beta> = <x, S* beta>. The adjoint's
    domain is the codomain's dual and each side carries the transposed pairing,
    which makes adjoint an involution for non-symmetric pairings too.

    Args:
        S: The operator.

    Returns:
        The adjoint operator.

    Raises:
        SingularPairingError: If the domain Gram matrix cannot be inverted.
    """
    if S.domain_dim == 0 or S.codomain_dim == 0:
        matrix = np.zeros((S.domain_dim, S.codomain_dim))
    else:
        try:
            matrix = scipy.linalg.solve(
                _gram(S.domain_pairing, S.domain_dim),
                S.matrix.T @ _gram(S.codomain_pairing, S.codomain_dim),
            )
        except np.linalg.LinAlgError as e:
            raise SingularPairingError(f"Domain pairing is singular: {e}") from e
    return LinearOperator(
        domain_dim=S.codomain_dim,
        codomain_dim=S.domain_dim,
        matrix=matrix,
        domain_pairing=S.codomain_pairing.transpose() if S.codomain_pairing else None,
        codomain_pairing=S.domain_pairing.transpose() if S.domain_pairing else None,
    )


def quotient_projection(
    L: Subspace, M: Subspace, tol: float = CONTAINMENT_TOL
) -> tuple[LinearOperator, Subspace]:
    """Canonical projection L -> L/M with concrete representatives.

    The representatives of L/M are the Euclidean orthogonal complement of M
    inside L, so the quotient norm of a coset is the Euclidean norm of its
    representative.

    Args:
        L: The ambient subspace.
        M: A subspace of L.
        tol: Containment tolerance.

    Returns:
        (P, reps) where P maps L-coordinates to reps-coordinates.

    Raises:
        ContainmentError: If M is not inside L.
    """
    if L.ambient_dim != M.ambient_dim:
        raise DimensionError(f"L in R^{L.ambient_dim} but M in R^{M.ambient_dim}")
    gap = L.containment_residual(M)
    if gap > tol:
        raise ContainmentError(f"M is not contained in L (distance {gap:.3g})")
    m_coords = L.basis.T @ M.basis
    reps_coords = complement_columns(m_coords)
    if reps_coords.shape[1] == 0:
        reps = Subspace.zero(L.ambient_dim)
    else:
        reps = Subspace.from_columns(L.basis @ reps_coords)
    projection = LinearOperator(
        domain_dim=L.rank,
        codomain_dim=reps.rank,
        matrix=reps.basis.T @ L.basis,
    )
    return projection, reps


def restriction(L: Subspace, f_pairing: Pairing) -> LinearOperator:
    """Canonical restriction F* -> L*, beta -> (<b_i, beta>)_i over L's basis."""
    if L.ambient_dim != f_pairing.dim:
        raise DimensionError("Subspace and pairing dimensions differ")
    return LinearOperator(
        domain_dim=f_pairing.dim,
        codomain_dim=L.rank,
        matrix=L.basis.T @ f_pairing.gram,
        domain_pairing=f_pairing.transpose(),
    )


def quotient_injection(P: LinearOperator) -> LinearOperator:
    """Canonical injection (L/M)* -> L*, the functionals vanishing on M."""
    return LinearOperator(domain_dim=P.codomain_dim, codomain_dim=P.domain_dim, matrix=P.matrix.T)


def quotient_norm(x: Any, M: Subspace) -> float:
    """Quotient norm inf over m in M of ||x + m||."""
    return M.distance(x)


def minimal_extension(L: Subspace, f_pairing: Pairing, functional: Any) -> np.ndarray:
    """Extend a functional on L to F* by zero on the pairing complement of L.

    The result beta satisfies R beta = functional and <y, beta> = 0 for every y
    with y^T G L = 0. When L^T G L is singular or ill-conditioned, beta
    vanishes on the Euclidean complement of L instead.
    For an inner product the result is the extension of least pairing norm.
    """
    values = np.asarray(functional, dtype=np.float64)
    if L.rank == 0:
        return np.zeros(f_pairing.dim)
    compressed = L.basis.T @ f_pairing.gram @ L.basis
    if np.linalg.cond(compressed) < CONDITION_LIMIT:
        return L.basis @ scipy.linalg.solve(compressed, values)
    return scipy.linalg.solve(f_pairing.gram, L.basis @ values)


def embedded_quotient_dual(W: Subspace, pairing: Pairing) -> tuple[Subspace, Subspace]:
    """Realize (C / W-perp)* inside C* through the canonical injection.

    Args:
        W: A subspace of the dual C*.
        pairing: Pairing of C with C*.

    Returns:
        (K, image) with K the pre-annihilator of W and image the functionals on
        C that vanish on K; image coincides with W.
    """
    kernel = annihilator(W, pairing, Side.RIGHT)
    return kernel, annihilator(kernel, pairing, Side.LEFT)


def same_span(U: Subspace, V: Subspace, tol: float = CONTAINMENT_TOL) -> bool:
    """Mutual containment of two subspaces."""
    return U.contains(V, tol) and V.contains(U, tol)


def operator_norm(S: LinearOperator) -> float:
    """Largest singular value of the matrix."""
    if S.matrix.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(S.matrix)[0])


def condition_number(S: LinearOperator, rel_tol: float = DEFAULT_RANK_TOL) -> float:
    """Ratio of extreme singular values; infinite for singular or non-square maps."""
    if S.domain_dim != S.codomain_dim or S.matrix.size == 0:
        return float("inf")
    singular_values = scipy.linalg.svdvals(S.matrix)
    if singular_values[0] == 0 or singular_values[-1] <= rel_tol * singular_values[0]:
        return float("inf")
    return float(singular_values[0] / singular_values[-1])


def is_invertible(S: LinearOperator, rel_tol: float = DEFAULT_RANK_TOL) -> bool:
    return bool(np.isfinite(condition_number(S, rel_tol)))


def is_injective(S: LinearOperator, rel_tol: float = DEFAULT_RANK_TOL) -> bool:
    return rank_report(S.matrix, rel_tol).rank == S.domain_dim


def is_surjective(S: LinearOperator, rel_tol: float = DEFAULT_RANK_TOL) -> bool:
    return rank_report(S.matrix, rel_tol).rank == S.codomain_dim
