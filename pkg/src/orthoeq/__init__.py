"""Finite-dimensional toolkit for the orthogonality equation <f(x), g(a)> = <x, a>."""

from orthoeq.decomposition import (
    Decomposition,
    HilbertDecomposition,
    extract,
    hilbert_decompose,
    synthesize,
    verify_decomposition,
)
from orthoeq.equation import Instance, PointMap, fit_linear, linear_parts, residual
from orthoeq.generators import GenConfig, PairingMode, SectionMode, gen_decomposition, gen_instance
from orthoeq.linalg_core import LinearOperator, Pairing, Side, Subspace

__all__ = [
    "Decomposition",
    "HilbertDecomposition",
    "extract",
    "hilbert_decompose",
    "synthesize",
    "verify_decomposition",
    "Instance",
    "PointMap",
    "fit_linear",
    "linear_parts",
    "residual",
    "GenConfig",
    "PairingMode",
    "SectionMode",
    "gen_decomposition",
    "gen_instance",
    "LinearOperator",
    "Pairing",
    "Side",
    "Subspace",
]
