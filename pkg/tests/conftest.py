"""Shared fixtures: small instances whose decompositions are known by hand."""

import numpy as np
import pytest

from orthoeq.equation import Instance, PointMap
from orthoeq.linalg_core import Pairing


def make_instance(
    f_samples: list[tuple[list[float], list[float]]],
    g_samples: list[tuple[list[float], list[float]]],
    e_gram: list[list[float]] | None = None,
    f_gram: list[list[float]] | None = None,
) -> Instance:
    """Build an instance from (input, output) pairs."""
    n = len(f_samples[0][0])
    m = len(f_samples[0][1])
    return Instance(
        e_pairing=Pairing(dim=n, gram=e_gram if e_gram is not None else np.eye(n)),
        f_pairing=Pairing(dim=m, gram=f_gram if f_gram is not None else np.eye(m)),
        f=PointMap.from_samples(f_samples, n, m),
        g=PointMap.from_samples(g_samples, n, m),
    )


@pytest.fixture
def identity_instance() -> Instance:
    """f = g = id on R^2 with standard pairings, sampled at e1 and e2.

    Returns:
        The instance.
    """
    basis = [[1.0, 0.0], [0.0, 1.0]]
    samples = [(v, v) for v in basis]
    return make_instance(samples, samples)


@pytest.fixture
def square_instance() -> Instance:
    """f(x) = (x, x^2) at {1, 2, -1} and g(a) = (a, 0) at {1, 2}.

    Returns:
        The instance.
    """
    return make_instance(
        [([x], [x, x * x]) for x in (1.0, 2.0, -1.0)],
        [([a], [a, 0.0]) for a in (1.0, 2.0)],
    )


@pytest.fixture
def weighted_instance() -> Instance:
    """G_E = [2]: f(x) = (2x, 0) at {1, -1} and g(a) = (a, a^3) at {1, 2}.

    Returns:
        The instance.
    """
    return make_instance(
        [([x], [2 * x, 0.0]) for x in (1.0, -1.0)],
        [([a], [a, a**3]) for a in (1.0, 2.0)],
        e_gram=[[2.0]],
    )


@pytest.fixture
def tampered_instance() -> Instance:
    """f = id and g = 2 id on R^2; the equation fails by exactly 1.

    Returns:
        The instance.
    """
    basis = [[1.0, 0.0], [0.0, 1.0]]
    return make_instance([(v, v) for v in basis], [(v, [2 * c for c in v]) for v in basis])
