"""Decompositions f = phi A, g = psi I (A*)^-1 and the Hilbert-space corollary.

Coordinates used throughout:

* F and F* are R^m, paired through G_F.
* L-coordinates are coefficients in L's stored orthonormal basis; the
  restriction R sends beta in F* to (<b_i, beta>)_i, so L-coordinates and
  L*-coordinates are paired by the dot product.
* L/M is represented by the Euclidean complement of M in L (reps), paired
  with (L/M)* by the dot product; the injection I into L* is P^T.
"""

import logging
from functools import cached_property
from typing import Any

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from orthoeq.config import (
    CONDITION_LIMIT,
    CONTAINMENT_TOL,
    DEFAULT_RANK_TOL,
    IDENTITY_TOL,
    LOOKUP_TOL,
    VERIFY_TOL,
)
from orthoeq.equation import Instance, PointMap, fit_linear, residual
from orthoeq.exceptions import (
    DimensionError,
    EmptyInstanceError,
    ExtractionError,
    IllConditionedError,
    NotHilbertError,
    NotLinearError,
)
from orthoeq.linalg_core import (
    LinearOperator,
    Pairing,
    Side,
    Subspace,
    adjoint,
    annihilator,
    condition_number,
    minimal_extension,
    operator_norm,
    orthonormal_span,
    quotient_injection,
    quotient_projection,
    rank_report,
    restriction,
)

logger = logging.getLogger(__name__)

SECTION_TOL = 1e-9


def _section_limit(table: PointMap) -> float:
    """Allowed section identity gap, SECTION_TOL relative to the table's largest entry."""
    magnitude = max(
        np.max(np.abs(table.inputs), initial=0.0), np.max(np.abs(table.outputs), initial=0.0)
    )
    return SECTION_TOL * (1.0 + float(magnitude))


class Decomposition(BaseModel):
    """Certificate (L, M, A, phi, psi) that a pair (f, g) solves the equation.

    A maps E into reps(L/M) coordinates, phi maps reps coordinates to
    L-coordinates with P phi = id, and psi maps L*-coordinates to F* with
    R psi = id.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    L: Subspace
    M: Subspace
    A: LinearOperator
    phi: PointMap
    psi: PointMap
    e_pairing: Pairing
    f_pairing: Pairing

    @model_validator(mode="after")
    def _check_certificate(self) -> "Decomposition":
        m = self.f_pairing.dim
        if self.L.ambient_dim != m or self.M.ambient_dim != m:
            raise ValueError(f"L and M must be subspaces of R^{m}")
        projection, reps = quotient_projection(self.L, self.M, CONTAINMENT_TOL)
        if (self.A.domain_dim, self.A.codomain_dim) != (self.e_pairing.dim, reps.rank):
            raise ValueError(
                f"A is {self.A.codomain_dim} x {self.A.domain_dim}, expected "
                f"{reps.rank} x {self.e_pairing.dim}"
            )
        condition = condition_number(self.A)
        if not condition < CONDITION_LIMIT:
            raise ValueError(f"A is not invertible (condition number {condition:.3g})")
        if (self.phi.domain_dim, self.phi.codomain_dim) != (reps.rank, self.L.rank):
            raise ValueError("phi must map reps(L/M) coordinates to L-coordinates")
        if (self.psi.domain_dim, self.psi.codomain_dim) != (self.L.rank, m):
            raise ValueError("psi must map L*-coordinates to F* coordinates")
        if len(self.phi):
            gap = np.max(np.abs(projection.apply(self.phi.outputs) - self.phi.inputs))
            if gap > _section_limit(self.phi):
                raise ValueError(f"P phi differs from the identity by {gap:.3g}")
        if len(self.psi):
            restricted = self.psi.outputs @ restriction(self.L, self.f_pairing).matrix.T
            gap = np.max(np.abs(restricted - self.psi.inputs))
            if gap > _section_limit(self.psi):
                raise ValueError(f"R psi differs from the identity by {gap:.3g}")
        return self

    @cached_property
    def quotient(self) -> tuple[LinearOperator, Subspace]:
        """(P, reps) for L/M."""
        return quotient_projection(self.L, self.M, CONTAINMENT_TOL)

    @property
    def projection(self) -> LinearOperator:
        return self.quotient[0]

    @property
    def reps(self) -> Subspace:
        return self.quotient[1]

    @property
    def injection(self) -> LinearOperator:
        return quotient_injection(self.projection)

    @property
    def restriction(self) -> LinearOperator:
        return restriction(self.L, self.f_pairing)

    @cached_property
    def a_adjoint(self) -> LinearOperator:
        """A* from (L/M)* to E*."""
        return adjoint(self.A.with_pairings(self.e_pairing, Pairing.standard(self.A.codomain_dim)))

    @cached_property
    def dual_map(self) -> np.ndarray:
        """Matrix of I (A*)^-1 from E* to L*."""
        return self.injection.matrix @ scipy.linalg.inv(self.a_adjoint.matrix)

    def phi_keys(self, x_grid: Any) -> np.ndarray:
        """A x for each row x."""
        return self.A.apply(np.atleast_2d(np.asarray(x_grid, dtype=np.float64)))

    def psi_keys(self, alpha_grid: Any) -> np.ndarray:
        """I (A*)^-1 alpha for each row alpha."""
        return np.atleast_2d(np.asarray(alpha_grid, dtype=np.float64)) @ self.dual_map.T


def synthesize(
    dec: Decomposition,
    x_grid: Any,
    alpha_grid: Any,
    extend_psi: bool = False,
) -> Instance:
    """Build the solution pair f = phi A, g = psi I (A*)^-1 on sample grids.

    Args:
        dec: The certificate.
        x_grid: Rows are points of E.
        alpha_grid: Rows are points of E*.
        extend_psi: Use the minimal extension where psi has no sample.

    Returns:
        The sampled instance.

    Raises:
        CoverageError: If phi (or psi, without extend_psi) lacks a needed sample.
        IllConditionedError: If A is not safely invertible.
    """
    condition = condition_number(dec.A)
    if not condition < CONDITION_LIMIT:
        raise IllConditionedError(condition, CONDITION_LIMIT)
    x_grid = np.asarray(x_grid, dtype=np.float64).reshape(-1, dec.e_pairing.dim)
    alpha_grid = np.asarray(alpha_grid, dtype=np.float64).reshape(-1, dec.e_pairing.dim)

    f_outputs = [
        dec.L.embed(dec.phi.lookup(key, LOOKUP_TOL, "phi")) for key in dec.phi_keys(x_grid)
    ]
    g_outputs = []
    for key in dec.psi_keys(alpha_grid):
        if extend_psi and not dec.psi.covers(key):
            g_outputs.append(minimal_extension(dec.L, dec.f_pairing, key))
        else:
            g_outputs.append(dec.psi.lookup(key, LOOKUP_TOL, "psi"))

    n, m = dec.e_pairing.dim, dec.f_pairing.dim
    f = PointMap(
        domain_dim=n, codomain_dim=m, inputs=x_grid, outputs=np.reshape(f_outputs, (-1, m))
    )
    g = PointMap(
        domain_dim=n, codomain_dim=m, inputs=alpha_grid, outputs=np.reshape(g_outputs, (-1, m))
    )
    return Instance(e_pairing=dec.e_pairing, f_pairing=dec.f_pairing, f=f, g=g)


class ExtractionResult(BaseModel):
    """A certificate together with the pipeline's internal checks."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    decomposition: Decomposition
    q0: LinearOperator = Field(description="R g as a linear operator E* -> L*")
    q0_hat: LinearOperator = Field(description="Q0 with codomain (L/M)*")
    identity_residual: float = Field(description="max |A* Q0_hat - id|")
    q0_hat_norm: float = Field(description="||Q0_hat|| with E* carrying the dual norm")
    norm_bound_slack: float = Field(description="max over samples of ||x|| - ||Q0_hat|| ||A x||")
    equation_residual: float
    condition_number: float


def _span_rank(vectors: np.ndarray, rank_tol: float) -> int:
    return rank_report(vectors, rank_tol).rank if len(vectors) else 0


def run_extraction(
    inst: Instance,
    rel_tol: float = VERIFY_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> ExtractionResult:
    """Construct a certificate from a sampled solution pair.

    Follows the only-if construction: L is the span of f's outputs, Q0 = R g
    is fitted as a linear map, M is the annihilator of Q0's range inside L,
    A = Q1 = P f is fitted on the quotient, and phi, psi are read off the
    samples.

    Args:
        inst: A sampled solution pair whose inputs span E and E*.
        rel_tol: Tolerance for the equation residual (relative to the
            instance scale) and for both linear fits.
        rank_tol: Relative rank threshold for spans.

    Returns:
        The certificate and the internal checks.

    Raises:
        ExtractionError: Naming the failing stage.
    """
    n, m = inst.n, inst.m
    try:
        report = residual(inst)
    except EmptyInstanceError as e:
        raise ExtractionError("precondition", str(e)) from e
    scale = inst.scale()
    if report.max_abs_residual > rel_tol * scale:
        raise ExtractionError(
            "precondition",
            f"not a solution pair: residual {report.max_abs_residual:.6g} at samples "
            f"{report.argmax_pair} exceeds {rel_tol * scale:.3g}",
        )
    for name, table in (("f", inst.f), ("g", inst.g)):
        spanned = _span_rank(table.inputs, rank_tol)
        if spanned < n:
            raise ExtractionError(
                "precondition",
                f"{name} sample inputs span {spanned} of {n} dimensions; linear parts are "
                "not identifiable",
            )

    L = orthonormal_span(inst.f.outputs, rank_tol, ambient_dim=m)
    logger.debug("span: rank L = %d", L.rank)
    if L.rank == 0:
        raise ExtractionError("span", "f outputs span only the zero subspace")

    restrict = restriction(L, inst.f_pairing)
    restricted_g = PointMap(
        domain_dim=n,
        codomain_dim=L.rank,
        inputs=inst.g.inputs,
        outputs=restrict.apply(inst.g.outputs),
    )
    try:
        q0 = fit_linear(restricted_g, rel_tol)
    except NotLinearError as e:
        raise ExtractionError("fit-Q0", f"R g is not linear: {e}") from e
    q0 = q0.with_pairings(inst.e_pairing.transpose(), Pairing.standard(L.rank))

    q0_range = orthonormal_span(q0.matrix.T, rank_tol, ambient_dim=L.rank)
    if q0_range.rank != n:
        raise ExtractionError(
            "annihilator", f"range of Q0 has rank {q0_range.rank}, expected dim E = {n}"
        )
    m_coords = annihilator(q0_range, Pairing.standard(L.rank), Side.RIGHT)
    M = (
        Subspace.from_columns(L.basis @ m_coords.basis)
        if m_coords.rank
        else Subspace.zero(m)
    )
    projection, reps = quotient_projection(L, M)
    logger.debug("annihilator: rank M = %d, rank L/M = %d", M.rank, reps.rank)

    l_coords = inst.f.outputs @ L.basis
    projected_f = PointMap(
        domain_dim=n,
        codomain_dim=reps.rank,
        inputs=inst.f.inputs,
        outputs=projection.apply(l_coords),
    )
    try:
        q1 = fit_linear(projected_f, rel_tol)
    except NotLinearError as e:
        raise ExtractionError("fit-Q1", f"P f is not linear: {e}") from e

    A = q1.with_pairings(inst.e_pairing, Pairing.standard(reps.rank))
    condition = condition_number(A)
    logger.debug("invertibility: cond(A) = %.6g", condition)
    if not condition < CONDITION_LIMIT:
        raise ExtractionError(
            "invertibility", f"A has condition number {condition:.3g} (limit {CONDITION_LIMIT:.0e})"
        )

    q0_hat = LinearOperator(
        domain_dim=n,
        codomain_dim=reps.rank,
        matrix=projection.matrix @ q0.matrix,
        domain_pairing=inst.e_pairing.transpose(),
    )
    a_star = adjoint(A)
    identity_residual = float(np.max(np.abs(a_star.matrix @ q0_hat.matrix - np.eye(n))))
    logger.debug("identity-check: max |A* Q0_hat - id| = %.3g", identity_residual)
    if identity_residual > IDENTITY_TOL:
        raise ExtractionError(
            "identity-check", f"A* Q0_hat differs from the identity by {identity_residual:.3g}"
        )

    dual_normed = LinearOperator.from_matrix(
        q0_hat.matrix @ scipy.linalg.inv(inst.e_pairing.gram)
    )
    q0_hat_norm = operator_norm(dual_normed)
    slack = np.linalg.norm(inst.f.inputs, axis=1) - q0_hat_norm * np.linalg.norm(
        A.apply(inst.f.inputs), axis=1
    )

    injection_of_dual = quotient_injection(projection).matrix @ scipy.linalg.inv(a_star.matrix)
    try:
        decomposition = Decomposition(
            L=L,
            M=M,
            A=A,
            phi=PointMap(
                domain_dim=reps.rank,
                codomain_dim=L.rank,
                inputs=A.apply(inst.f.inputs),
                outputs=l_coords,
            ),
            psi=PointMap(
                domain_dim=L.rank,
                codomain_dim=m,
                inputs=inst.g.inputs @ injection_of_dual.T,
                outputs=inst.g.outputs,
            ),
            e_pairing=inst.e_pairing,
            f_pairing=inst.f_pairing,
        )
    except ValidationError as e:
        raise ExtractionError("sections", f"sections fail their certificate checks: {e}") from e

    return ExtractionResult(
        decomposition=decomposition,
        q0=q0,
        q0_hat=q0_hat,
        identity_residual=identity_residual,
        q0_hat_norm=q0_hat_norm,
        norm_bound_slack=float(np.max(slack)),
        equation_residual=report.max_abs_residual,
        condition_number=condition,
    )


def extract(inst: Instance, rel_tol: float = VERIFY_TOL) -> Decomposition:
    """Extract a certificate (L, M, A, phi, psi) from a sampled solution pair.

    See run_extraction for the pipeline and its errors.
    """
    return run_extraction(inst, rel_tol).decomposition


class ClauseCheck(BaseModel):
    """One clause of a certificate check."""

    model_config = ConfigDict(frozen=True)

    name: str
    value: float
    threshold: float
    passed: bool


class VerificationReport(BaseModel):
    """Every clause of f = phi A, g = psi I (A*)^-1 checked against an instance."""

    model_config = ConfigDict(frozen=True)

    checks: list[ClauseCheck]
    scale: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> ClauseCheck:
        for clause in self.checks:
            if clause.name == name:
                return clause
        raise KeyError(name)

    def failures(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]


def _section_residual(
    table: PointMap, keys: np.ndarray, targets: np.ndarray, embed: Any = None
) -> float:
    """Worst mismatch between table lookups at keys and targets.

    A key with no sample within tolerance is charged its distance to the
    nearest sample, on top of that sample's mismatch.
    """
    worst = 0.0
    for key, target in zip(keys, targets, strict=True):
        index, distance = table.nearest(key)
        if index < 0:
            return float("inf")
        value = table.outputs[index] if embed is None else embed(table.outputs[index])
        miss = float(np.linalg.norm(value - target))
        if distance > LOOKUP_TOL:
            miss += distance
        worst = max(worst, miss)
    return worst


def verify_decomposition(
    dec: Decomposition, inst: Instance, tol: float = VERIFY_TOL
) -> VerificationReport:
    """Check a certificate clause by clause against an instance.

    Failures are reported, never raised. A clause passes when its residual is
    at most tol times the instance scale; invertibility compares the
    condition number of A with the fixed limit.

    Args:
        dec: The certificate.
        inst: The sampled pair it should describe.
        tol: Relative tolerance.

    Returns:
        The report.

    Raises:
        DimensionError: If dimensions of dec and inst disagree.
    """
    if (dec.e_pairing.dim, dec.f_pairing.dim) != (inst.n, inst.m):
        raise DimensionError(
            f"Certificate is for R^{dec.e_pairing.dim} -> R^{dec.f_pairing.dim}, "
            f"instance for R^{inst.n} -> R^{inst.m}"
        )
    scale = inst.scale()
    limit = tol * scale
    projection = dec.projection

    def clause(name: str, value: float, threshold: float = limit) -> ClauseCheck:
        return ClauseCheck(name=name, value=value, threshold=threshold, passed=value <= threshold)

    condition = condition_number(dec.A)
    p_phi = (
        float(np.max(np.abs(projection.apply(dec.phi.outputs) - dec.phi.inputs)))
        if len(dec.phi)
        else 0.0
    )
    r_psi = (
        float(np.max(np.abs(dec.restriction.apply(dec.psi.outputs) - dec.psi.inputs)))
        if len(dec.psi)
        else 0.0
    )
    f_fact = g_fact = 0.0
    if len(inst.f):
        f_fact = _section_residual(
            dec.phi, dec.phi_keys(inst.f.inputs), inst.f.outputs, embed=dec.L.embed
        )
    if len(inst.g):
        g_fact = _section_residual(dec.psi, dec.psi_keys(inst.g.inputs), inst.g.outputs)
    try:
        equation = residual(inst).max_abs_residual
    except EmptyInstanceError:
        equation = float("inf")

    checks = [
        clause("M_in_L", dec.L.containment_residual(dec.M)),
        ClauseCheck(
            name="A_invertible",
            value=condition,
            threshold=CONDITION_LIMIT,
            passed=condition < CONDITION_LIMIT,
        ),
        clause("P_phi_identity", p_phi),
        clause("R_psi_identity", r_psi),
        clause("f_factorization", f_fact),
        clause("g_factorization", g_fact),
        clause("equation_residual", equation),
    ]
    report = VerificationReport(checks=checks, scale=scale, tolerance=tol)
    logger.debug("verification: passed=%s failures=%s", report.passed, report.failures())
    return report


def _leaks(table: PointMap, target: Subspace) -> float:
    """Worst relative distance of table outputs from target."""
    worst = 0.0
    for value in table.outputs:
        worst = max(worst, target.distance(value) / (1.0 + float(np.linalg.norm(value))))
    return worst


class HilbertReport(BaseModel):
    """Residuals of a Hilbert decomposition against an instance."""

    model_config = ConfigDict(frozen=True)

    orthogonality: float = Field(description="Largest Gram entry between distinct parts")
    rank_sum: int
    dim: int
    mu_leak: float = Field(description="Relative distance of mu outputs from F2")
    nu_leak: float = Field(description="Relative distance of nu outputs from F3")
    f_reconstruction: float = Field(description="max ||B x + mu(x) - f(x)||")
    g_reconstruction: float = Field(description="max ||(B*)^-1 alpha + nu(alpha) - g(alpha)||")

    def passes(self, tol: float = VERIFY_TOL) -> bool:
        return (
            self.rank_sum == self.dim
            and self.orthogonality <= 1e-10
            and max(self.mu_leak, self.nu_leak) <= SECTION_TOL
            and max(self.f_reconstruction, self.g_reconstruction) <= tol
        )


class HilbertDecomposition(BaseModel):
    """f = B + mu, g = (B*)^-1 + nu with F = F1 + F2 + F3 pairwise orthogonal.

    B maps E to F1-coordinates; F1 carries the inner product restricted from
    F. mu is sampled on E with values in F2, nu on E* with values in F3.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    F1: Subspace
    F2: Subspace
    F3: Subspace
    B: LinearOperator
    mu: PointMap
    nu: PointMap
    e_pairing: Pairing
    f_pairing: Pairing

    @model_validator(mode="after")
    def _check_orthogonal_sum(self) -> "HilbertDecomposition":
        m = self.f_pairing.dim
        if any(part.ambient_dim != m for part in (self.F1, self.F2, self.F3)):
            raise ValueError(f"F1, F2, F3 must be subspaces of R^{m}")
        if self.F1.rank + self.F2.rank + self.F3.rank != m:
            raise ValueError("Ranks of F1, F2, F3 do not add up to dim F")
        if self.orthogonality() > 1e-10:
            raise ValueError("F1, F2, F3 are not pairwise orthogonal")
        if (self.B.domain_dim, self.B.codomain_dim) != (self.e_pairing.dim, self.F1.rank):
            raise ValueError("B must map E onto F1-coordinates")
        condition = condition_number(self.B)
        if not condition < CONDITION_LIMIT:
            raise ValueError(f"B is not invertible (condition number {condition:.3g})")
        return self

    def orthogonality(self) -> float:
        """Largest entry of the Gram blocks between distinct parts."""
        parts = (self.F1, self.F2, self.F3)
        worst = 0.0
        for i, j in ((0, 1), (0, 2), (1, 2)):
            block = parts[i].basis.T @ self.f_pairing.gram @ parts[j].basis
            if block.size:
                worst = max(worst, float(np.max(np.abs(block))))
        return worst

    @property
    def b_matrix(self) -> np.ndarray:
        """B in F-coordinates."""
        return self.F1.basis @ self.B.matrix

    @cached_property
    def b_adjoint_inverse(self) -> np.ndarray:
        """(B*)^-1 from E* into F, in F-coordinates."""
        return self.F1.basis @ scipy.linalg.inv(adjoint(self.B).matrix)

    def f_at(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self.b_matrix @ x + self.mu.lookup(x, LOOKUP_TOL, "mu")

    def g_at(self, alpha: Any) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=np.float64)
        return self.b_adjoint_inverse @ alpha + self.nu.lookup(alpha, LOOKUP_TOL, "nu")

    def verify(self, inst: Instance) -> HilbertReport:
        """Measure orthogonality, section placement and reconstruction on inst's grids.

        Raises:
            CoverageError: If mu or nu has no sample at one of inst's inputs.
        """
        f_rec = max(
            (float(np.linalg.norm(self.f_at(x) - y)) for x, y in inst.f.samples), default=0.0
        )
        g_rec = max(
            (float(np.linalg.norm(self.g_at(a) - b)) for a, b in inst.g.samples), default=0.0
        )
        return HilbertReport(
            orthogonality=self.orthogonality(),
            rank_sum=self.F1.rank + self.F2.rank + self.F3.rank,
            dim=self.f_pairing.dim,
            mu_leak=_leaks(self.mu, self.F2),
            nu_leak=_leaks(self.nu, self.F3),
            f_reconstruction=f_rec,
            g_reconstruction=g_rec,
        )


def _require_inner_product(pairing: Pairing, name: str) -> None:
    if not pairing.is_positive_definite():
        raise NotHilbertError(f"{name} is not symmetric positive definite")


def hilbert_decompose(inst: Instance, rel_tol: float = VERIFY_TOL) -> HilbertDecomposition:
    """Split a solution pair for inner-product pairings into linear and orthogonal parts.

    Runs extract, then takes F2 = M, F1 the complement of M in L and F3 the
    complement of L in F, both orthogonal for the inner product G_F.

    Args:
        inst: A sampled solution pair with SPD pairings.
        rel_tol: Tolerance passed to extract.

    Returns:
        The decomposition with mu and nu tabulated on the instance's grids.

    Raises:
        NotHilbertError: If a pairing is not symmetric positive definite.
        ExtractionError: From extract, or at stage hilbert-sections when mu or
            nu leave F2 or F3.
    """
    _require_inner_product(inst.e_pairing, "E pairing")
    _require_inner_product(inst.f_pairing, "F pairing")
    dec = extract(inst, rel_tol)
    L, M, gram = dec.L, dec.M, inst.f_pairing.gram

    m_in_l = orthonormal_span((L.basis.T @ M.basis).T, ambient_dim=L.rank)
    l_inner = Pairing(dim=L.rank, gram=L.basis.T @ gram @ L.basis)
    f1_coords = annihilator(m_in_l, l_inner, Side.LEFT)
    F1 = Subspace.from_columns(L.basis @ f1_coords.basis)
    F3 = annihilator(L, inst.f_pairing, Side.LEFT)

    # B x is the component of f(x) in F1 along M; its reps-coordinates are A x.
    coupling = dec.reps.basis.T @ F1.basis
    B = LinearOperator(
        domain_dim=inst.n,
        codomain_dim=F1.rank,
        matrix=scipy.linalg.solve(coupling, dec.A.matrix),
        domain_pairing=inst.e_pairing,
        codomain_pairing=Pairing(dim=F1.rank, gram=F1.basis.T @ gram @ F1.basis),
    )
    b_inverse_adjoint = F1.basis @ scipy.linalg.inv(adjoint(B).matrix)

    mu = PointMap(
        domain_dim=inst.n,
        codomain_dim=inst.m,
        inputs=inst.f.inputs,
        outputs=inst.f.outputs - B.apply(inst.f.inputs) @ F1.basis.T,
    )
    nu = PointMap(
        domain_dim=inst.n,
        codomain_dim=inst.m,
        inputs=inst.g.inputs,
        outputs=inst.g.outputs - inst.g.inputs @ b_inverse_adjoint.T,
    )
    mu_leak, nu_leak = _leaks(mu, M), _leaks(nu, F3)
    logger.debug("hilbert-sections: mu leak %.3g, nu leak %.3g", mu_leak, nu_leak)
    if mu_leak > SECTION_TOL or nu_leak > SECTION_TOL:
        raise ExtractionError(
            "hilbert-sections",
            f"mu leaves F2 by {mu_leak:.3g} or nu leaves F3 by {nu_leak:.3g}",
        )
    return HilbertDecomposition(
        F1=F1,
        F2=M,
        F3=F3,
        B=B,
        mu=mu,
        nu=nu,
        e_pairing=inst.e_pairing,
        f_pairing=inst.f_pairing,
    )
