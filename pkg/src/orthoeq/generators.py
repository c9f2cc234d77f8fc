"""Seeded generation of certificates and solution pairs.

All randomness comes from NumPy's PCG64 bit generator seeded with the
configuration's seed, so a configuration always yields the same arrays.
"""

import logging
from collections.abc import Iterable
from enum import Enum

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, model_validator

from orthoeq.decomposition import Decomposition, synthesize
from orthoeq.equation import Instance, PointMap
from orthoeq.linalg_core import (
    LinearOperator,
    Pairing,
    Side,
    adjoint,
    annihilator,
    minimal_extension,
    orthonormal_span,
    quotient_injection,
    quotient_projection,
)

logger = logging.getLogger(__name__)

SINGULAR_VALUE_RANGE = (0.5, 2.0)


class PairingMode(str, Enum):
    """How the Gram matrices of E and F are drawn."""

    STANDARD = "standard"
    RANDOM_SPD = "random-spd"
    RANDOM_INVERTIBLE = "random-invertible"


class SectionMode(str, Enum):
    """Nonlinearity added to phi (into M) and psi (into the annihilator of L)."""

    ZERO = "zero"
    POLYNOMIAL = "polynomial"
    TRIGONOMETRIC = "trigonometric"


class GenConfig(BaseModel):
    """Parameters of a generated certificate."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1, description="dim E")
    m: int = Field(ge=1, description="dim F")
    rank_l: int = Field(ge=1)
    rank_m: int = Field(ge=0)
    pairing_mode: PairingMode = PairingMode.STANDARD
    section_mode: SectionMode = SectionMode.POLYNOMIAL
    seed: int = Field(default=0, ge=0, lt=2**64)
    grid_size: int = Field(default=12, ge=1, description="Samples per map")

    @model_validator(mode="after")
    def _check_ranks(self) -> "GenConfig":
        if not self.rank_m <= self.rank_l <= self.m:
            raise ValueError(
                f"Need rank_m <= rank_l <= m, got {self.rank_m}, {self.rank_l}, {self.m}"
            )
        if self.rank_l - self.rank_m != self.n:
            raise ValueError(
                f"rank_l - rank_m must equal n: {self.rank_l} - {self.rank_m} != {self.n}"
            )
        if self.grid_size < self.n:
            raise ValueError(f"grid_size {self.grid_size} cannot span E of dimension {self.n}")
        return self


class GeneratedCase(BaseModel):
    """A generated certificate with the grids its tables were built on."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    config: GenConfig
    decomposition: Decomposition
    x_grid: np.ndarray
    alpha_grid: np.ndarray

    def instance(self) -> Instance:
        return synthesize(self.decomposition, self.x_grid, self.alpha_grid)


def make_rng(seed: int) -> np.random.Generator:
    """Generator backed by PCG64."""
    return np.random.Generator(np.random.PCG64(seed))


def _orthogonal(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = scipy.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _clamped_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random square matrix with singular values clamped into SINGULAR_VALUE_RANGE."""
    u, s, vt = scipy.linalg.svd(rng.standard_normal((dim, dim)))
    return u @ np.diag(np.clip(s, *SINGULAR_VALUE_RANGE)) @ vt


def random_pairing(rng: np.random.Generator, dim: int, mode: PairingMode) -> Pairing:
    """Draw a Gram matrix with singular values in SINGULAR_VALUE_RANGE."""
    if mode is PairingMode.STANDARD:
        return Pairing.standard(dim)
    spectrum = rng.uniform(*SINGULAR_VALUE_RANGE, size=dim)
    left = _orthogonal(rng, dim)
    right = left if mode is PairingMode.RANDOM_SPD else _orthogonal(rng, dim)
    gram = left @ np.diag(spectrum) @ right.T
    if mode is PairingMode.RANDOM_SPD:
        gram = (gram + gram.T) / 2
    return Pairing(dim=dim, gram=gram)


def section_features(points: np.ndarray, mode: SectionMode, count: int) -> np.ndarray:
    """Nonlinear features of each row, count per coordinate.

    Polynomial features are q^p for p = 2 .. count + 1; trigonometric features
    are sin(p q) for p = 1 .. count.
    """
    if mode is SectionMode.POLYNOMIAL:
        columns = [points**p for p in range(2, count + 2)]
    elif mode is SectionMode.TRIGONOMETRIC:
        columns = [np.sin(p * points) for p in range(1, count + 1)]
    else:
        columns = [np.zeros_like(points)]
    return np.hstack(columns)


def _nonlinear_part(
    rng: np.random.Generator,
    keys: np.ndarray,
    target: np.ndarray,
    mode: SectionMode,
) -> np.ndarray:
    """Rows target @ W @ features(key), or zeros when target is trivial."""
    rank = target.shape[1]
    if rank == 0 or mode is SectionMode.ZERO:
        return np.zeros((len(keys), target.shape[0]))
    # Keys are rescaled into the unit cube so high powers stay O(1).
    scaled = keys / (1.0 + float(np.max(np.abs(keys))))
    features = section_features(scaled, mode, rank)
    mixing = 0.5 * rng.standard_normal((rank, features.shape[1]))
    return features @ mixing.T @ target.T


def gen_case(cfg: GenConfig) -> GeneratedCase:
    """Generate a certificate and the grids it is sampled on.

    Args:
        cfg: The configuration.

    Returns:
        The generated case; equal configurations give equal arrays.
    """
    rng = make_rng(cfg.seed)
    e_pairing = random_pairing(rng, cfg.n, cfg.pairing_mode)
    f_pairing = random_pairing(rng, cfg.m, cfg.pairing_mode)

    frame, _ = scipy.linalg.qr(rng.standard_normal((cfg.m, cfg.rank_l)), mode="economic")
    L = orthonormal_span(frame.T, ambient_dim=cfg.m)
    M = orthonormal_span(frame[:, : cfg.rank_m].T, ambient_dim=cfg.m)
    projection, _ = quotient_projection(L, M)

    A = LinearOperator(
        domain_dim=cfg.n,
        codomain_dim=cfg.n,
        matrix=_clamped_matrix(rng, cfg.n),
        domain_pairing=e_pairing,
    )
    dual_map = quotient_injection(projection).matrix @ scipy.linalg.inv(adjoint(A).matrix)

    x_grid = rng.standard_normal((cfg.grid_size, cfg.n))
    alpha_grid = rng.standard_normal((cfg.grid_size, cfg.n))

    # phi(q) = P^T q + eta(q), eta valued in M's L-coordinates
    phi_keys = A.apply(x_grid)
    m_coords = L.basis.T @ M.basis
    phi_values = phi_keys @ projection.matrix + _nonlinear_part(
        rng, phi_keys, m_coords, cfg.section_mode
    )

    # psi(l) = minimal extension of l + theta(l), theta valued in the annihilator of L
    psi_keys = alpha_grid @ dual_map.T
    beyond_l = annihilator(L, f_pairing, Side.LEFT)
    psi_values = np.array(
        [minimal_extension(L, f_pairing, key) for key in psi_keys]
    ) + _nonlinear_part(rng, psi_keys, beyond_l.basis, cfg.section_mode)

    decomposition = Decomposition(
        L=L,
        M=M,
        A=A,
        phi=PointMap(
            domain_dim=cfg.n, codomain_dim=L.rank, inputs=phi_keys, outputs=phi_values
        ),
        psi=PointMap(
            domain_dim=L.rank, codomain_dim=cfg.m, inputs=psi_keys, outputs=psi_values
        ),
        e_pairing=e_pairing,
        f_pairing=f_pairing,
    )
    logger.debug(
        "generated seed=%d n=%d m=%d rank L=%d rank M=%d",
        cfg.seed,
        cfg.n,
        cfg.m,
        L.rank,
        M.rank,
    )
    return GeneratedCase(
        config=cfg, decomposition=decomposition, x_grid=x_grid, alpha_grid=alpha_grid
    )


def gen_decomposition(cfg: GenConfig) -> Decomposition:
    """Generate a certificate (L, M, A, phi, psi) for cfg."""
    return gen_case(cfg).decomposition


def gen_instance(cfg: GenConfig) -> Instance:
    """Generate a certificate and synthesize its solution pair on the seeded grids."""
    return gen_case(cfg).instance()


def configs_for_seeds(
    seeds: Iterable[int],
    max_n: int = 4,
    max_extra: int = 4,
    grid_size: int = 12,
) -> list[GenConfig]:
    """Spread seeds over dimensions, ranks and both modes.

    Each seed picks n in [1, max_n], m in [n, n + max_extra] and a rank of M
    compatible with them, drawing from its own PCG64 stream.
    """
    configs = []
    pairing_modes = list(PairingMode)
    section_modes = list(SectionMode)
    for seed in seeds:
        rng = make_rng(seed)
        n = int(rng.integers(1, max_n + 1))
        m = int(rng.integers(n, n + max_extra + 1))
        rank_m = int(rng.integers(0, m - n + 1))
        configs.append(
            GenConfig(
                n=n,
                m=m,
                rank_l=n + rank_m,
                rank_m=rank_m,
                pairing_mode=pairing_modes[seed % len(pairing_modes)],
                section_mode=section_modes[(seed // len(pairing_modes)) % len(section_modes)],
                seed=seed,
                grid_size=grid_size,
            )
        )
    return configs
