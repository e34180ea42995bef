import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.stats import unitary_group

from qgraph.boundary import BoundaryConditions
from qgraph.graph import ExternalEdge, InternalEdge, MetricGraph

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=100, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_self_adjoint(rng, d):
    """A = U - I, B = i(U + I) with U Haar-unitary: always self-adjoint."""
    if d == 1:
        U = np.exp(2j * np.pi * rng.random()) * np.eye(1)
    else:
        U = unitary_group.rvs(d, random_state=rng)
    I = np.eye(d)
    return BoundaryConditions(U - I, 1j * (U + I))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def interval():
    return MetricGraph.interval(1.0)


@pytest.fixture
def lasso_like():
    """One internal edge with a half-line attached at each end (d = 4)."""
    return MetricGraph((0, 1), (InternalEdge("i", 0, 1, 1.0),), (ExternalEdge("x", 0), ExternalEdge("y", 1)))


@pytest.fixture
def half_line_plus_edge():
    """An external edge and an internal edge sharing vertex 0 (d = 3)."""
    return MetricGraph((0, 1), (InternalEdge("i", 0, 1, 1.0),), (ExternalEdge("x", 0),))
