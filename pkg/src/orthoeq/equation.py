"""Sampled map pairs and verification of the orthogonality equation."""

from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.spatial.distance import cdist

from orthoeq.config import (
    DEFAULT_RANK_TOL,
    DUPLICATE_INPUT_TOL,
    LOOKUP_TOL,
    VERIFY_TOL,
    WELL_DEFINED_TOL,
)
from orthoeq.exceptions import CoverageError, DimensionError, EmptyInstanceError, NotLinearError
from orthoeq.linalg_core import LinearOperator, Pairing, frozen_array, rank_report


class PointMap(BaseModel):
    """A finite sample table of a possibly nonlinear map.

    Row i of inputs is sent to row i of outputs.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    domain_dim: int = Field(ge=1)
    codomain_dim: int = Field(ge=1)
    inputs: np.ndarray = Field(description="N x domain_dim")
    outputs: np.ndarray = Field(description="N x codomain_dim")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        for key, dim_key in (("inputs", "domain_dim"), ("outputs", "codomain_dim")):
            if key not in data:
                continue
            arr = np.array(data[key], dtype=np.float64)
            dim = data.get(dim_key)
            if arr.size == 0 and dim is not None:
                arr = np.zeros((0, int(dim)))
            elif arr.ndim == 1 and dim is not None and int(dim) == 1:
                arr = arr.reshape(-1, 1)
            data[key] = frozen_array(arr, ndim=2)
        return data

    @model_validator(mode="after")
    def _check_table(self) -> "PointMap":
        if self.inputs.shape[1] != self.domain_dim:
            raise ValueError(
                f"Inputs have {self.inputs.shape[1]} entries, expected {self.domain_dim}"
            )
        if self.outputs.shape[1] != self.codomain_dim:
            raise ValueError(
                f"Outputs have {self.outputs.shape[1]} entries, expected {self.codomain_dim}"
            )
        if self.inputs.shape[0] != self.outputs.shape[0]:
            raise ValueError("Inputs and outputs have different sample counts")
        if len(self) > 1:
            near = np.argwhere(cdist(self.inputs, self.inputs) <= DUPLICATE_INPUT_TOL)
            for i, j in near:
                if i < j and np.max(np.abs(self.outputs[i] - self.outputs[j])) > WELL_DEFINED_TOL:
                    raise ValueError(f"Samples {i} and {j} share an input but not an output")
        return self

    @classmethod
    def from_samples(
        cls,
        samples: Sequence[tuple[Any, Any]],
        domain_dim: int | None = None,
        codomain_dim: int | None = None,
    ) -> "PointMap":
        """Create a table from (input, output) pairs.

        Args:
            samples: The pairs. May be empty if both dimensions are given.
            domain_dim: Input dimension, inferred when omitted.
            codomain_dim: Output dimension, inferred when omitted.

        Returns:
            The sample table.
        """
        if not samples:
            if domain_dim is None or codomain_dim is None:
                raise DimensionError("Dimensions are required for an empty sample table")
            return cls(domain_dim=domain_dim, codomain_dim=codomain_dim, inputs=[], outputs=[])
        inputs = np.array([np.atleast_1d(np.asarray(x, dtype=np.float64)) for x, _ in samples])
        outputs = np.array([np.atleast_1d(np.asarray(y, dtype=np.float64)) for _, y in samples])
        return cls(
            domain_dim=domain_dim or inputs.shape[1],
            codomain_dim=codomain_dim or outputs.shape[1],
            inputs=inputs,
            outputs=outputs,
        )

    @classmethod
    def tabulate(
        cls, fn: Callable[[np.ndarray], Any], inputs: Any, codomain_dim: int
    ) -> "PointMap":
        """Sample a function at each row of inputs."""
        inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
        outputs = np.array([np.atleast_1d(fn(x)) for x in inputs], dtype=np.float64)
        return cls(
            domain_dim=inputs.shape[1],
            codomain_dim=codomain_dim,
            inputs=inputs,
            outputs=outputs.reshape(len(inputs), codomain_dim),
        )

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def samples(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.inputs, self.outputs, strict=True))

    def nearest(self, key: Any) -> tuple[int, float]:
        """Index of the sample input nearest to key, and its distance."""
        if len(self) == 0:
            return -1, float("inf")
        distances = np.linalg.norm(self.inputs - np.asarray(key, dtype=np.float64), axis=1)
        index = int(np.argmin(distances))
        return index, float(distances[index])

    def lookup(self, key: Any, tol: float = LOOKUP_TOL, name: str = "section") -> np.ndarray:
        """Output stored for key.

        Raises:
            CoverageError: If no sample input lies within tol of key.
        """
        index, distance = self.nearest(key)
        if distance > tol:
            raise CoverageError(name, np.asarray(key).tolist(), distance)
        return self.outputs[index]

    def covers(self, key: Any, tol: float = LOOKUP_TOL) -> bool:
        return self.nearest(key)[1] <= tol


class Instance(BaseModel):
    """Sampled data of the equation <f(x), g(alpha)>_F = <x, alpha>_E."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    e_pairing: Pairing
    f_pairing: Pairing
    f: PointMap = Field(description="Samples of f: E -> F")
    g: PointMap = Field(description="Samples of g: E* -> F*, in dual coordinates")

    @model_validator(mode="after")
    def _check_dims(self) -> "Instance":
        n, m = self.e_pairing.dim, self.f_pairing.dim
        for name, table in (("f", self.f), ("g", self.g)):
            if (table.domain_dim, table.codomain_dim) != (n, m):
                raise ValueError(
                    f"{name} maps R^{table.domain_dim} -> R^{table.codomain_dim}, "
                    f"expected R^{n} -> R^{m}"
                )
        return self

    @property
    def n(self) -> int:
        return self.e_pairing.dim

    @property
    def m(self) -> int:
        return self.f_pairing.dim

    def scale(self) -> float:
        """1 + max |<x, alpha>| over the sample grid."""
        if len(self.f) == 0 or len(self.g) == 0:
            return 1.0
        pairings = self.f.inputs @ self.e_pairing.gram @ self.g.inputs.T
        return 1.0 + float(np.max(np.abs(pairings)))


class ResidualReport(BaseModel):
    """Worst violation of the equation over all sample pairs."""

    model_config = ConfigDict(frozen=True)

    max_abs_residual: float = Field(ge=0)
    argmax_pair: tuple[int, int] = Field(description="(f sample index, g sample index)")
    pair_count: int = Field(ge=1)

    def passes(self, tol: float) -> bool:
        return self.max_abs_residual <= tol


def residual(inst: Instance) -> ResidualReport:
    """Evaluate |<f(x), g(alpha)> - <x, alpha>| over every sample pair.

    Args:
        inst: The instance.

    Returns:
        The maximum residual and the index pair attaining it.

    Raises:
        EmptyInstanceError: If either sample list is empty.
    """
    if len(inst.f) == 0 or len(inst.g) == 0:
        raise EmptyInstanceError("Both f and g need at least one sample")
    lhs = inst.f.outputs @ inst.f_pairing.gram @ inst.g.outputs.T
    rhs = inst.f.inputs @ inst.e_pairing.gram @ inst.g.inputs.T
    gaps = np.abs(lhs - rhs)
    i, j = np.unravel_index(int(np.argmax(gaps)), gaps.shape)
    return ResidualReport(
        max_abs_residual=float(gaps[i, j]),
        argmax_pair=(int(i), int(j)),
        pair_count=int(gaps.size),
    )


def least_squares(pm: PointMap) -> tuple[np.ndarray, float]:
    """Minimal-norm least-squares matrix for a table and its worst sample residual."""
    if len(pm) == 0:
        raise EmptyInstanceError("Cannot fit a map with no samples")
    solution, *_ = scipy.linalg.lstsq(pm.inputs, pm.outputs)
    gaps = pm.inputs @ solution - pm.outputs
    return np.asarray(solution).T, float(np.max(np.linalg.norm(gaps, axis=1)))


def fit_linear(pm: PointMap, rel_tol: float = VERIFY_TOL) -> LinearOperator:
    """Fit a linear operator to a sample table and certify the fit.

    The operator minimizes sum ||S x_i - y_i||^2, taking the minimal Frobenius
    norm solution when underdetermined. It is accepted iff every sample
    residual is at most rel_tol * (1 + max ||y_i||). The result carries
    standard pairings; callers attach their own.

    Args:
        pm: The samples.
        rel_tol: Relative acceptance threshold.

    Returns:
        The fitted operator.

    Raises:
        NotLinearError: If the residual exceeds the threshold.
    """
    matrix, worst = least_squares(pm)
    threshold = rel_tol * (1.0 + float(np.max(np.linalg.norm(pm.outputs, axis=1))))
    if worst > threshold:
        raise NotLinearError(worst, threshold)
    return LinearOperator(domain_dim=pm.domain_dim, codomain_dim=pm.codomain_dim, matrix=matrix)


class LinearityReport(BaseModel):
    """Which of f and g the density hypotheses certify as linear."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    f_outputs_dense: bool = Field(description="f's outputs span F")
    g_outputs_dense: bool = Field(description="g's outputs span F*")
    f_residual: float
    g_residual: float
    f_operator: LinearOperator | None = None
    g_operator: LinearOperator | None = None

    @property
    def g_certified(self) -> bool:
        return self.f_outputs_dense and self.g_operator is not None

    @property
    def f_certified(self) -> bool:
        return self.g_outputs_dense and self.f_operator is not None


def linear_parts(
    inst: Instance,
    rel_tol: float = VERIFY_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> LinearityReport:
    """Check both linearity criteria on an instance.

    If f's outputs span F then g must be linear, and if g's outputs span F*
    then f must be. Both fits are attempted; the density flags say which
    conclusions the data is entitled to.

    Args:
        inst: A sampled solution pair.
        rel_tol: Fit acceptance threshold.
        rank_tol: Rank threshold for the density tests.

    Returns:
        The report, with fitted operators carrying the instance's pairings.
    """
    _, f_residual = least_squares(inst.f)
    _, g_residual = least_squares(inst.g)
    f_dense = rank_report(inst.f.outputs, rank_tol).rank == inst.m
    g_dense = rank_report(inst.g.outputs, rank_tol).rank == inst.m

    f_operator = g_operator = None
    try:
        f_operator = fit_linear(inst.f, rel_tol).with_pairings(inst.e_pairing, inst.f_pairing)
    except NotLinearError:
        pass
    try:
        g_operator = fit_linear(inst.g, rel_tol).with_pairings(
            inst.e_pairing.transpose(), inst.f_pairing.transpose()
        )
    except NotLinearError:
        pass
    return LinearityReport(
        f_outputs_dense=f_dense,
        g_outputs_dense=g_dense,
        f_residual=f_residual,
        g_residual=g_residual,
        f_operator=f_operator,
        g_operator=g_operator,
    )
