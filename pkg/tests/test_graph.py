import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgraph.errors import GraphError, GridError
from qgraph.graph import (
    EdgeFunction,
    ExternalEdge,
    InternalEdge,
    MetricGraph,
    deficiency_index,
    edge_slices,
    endpoint_derivatives,
    trace,
    uniform_grid,
)


def test_deficiency_examples(lasso_like):
    assert deficiency_index(MetricGraph.interval()) == 2
    assert deficiency_index(MetricGraph.star(3)) == 3
    assert deficiency_index(lasso_like) == 4


def test_validation():
    with pytest.raises(GraphError):
        MetricGraph((0,), (InternalEdge("e", 0, 1, 1.0),))
    with pytest.raises(GraphError):
        MetricGraph((0, 1), (InternalEdge("e", 0, 1, -1.0),))
    with pytest.raises(GraphError):
        MetricGraph((0, 1), (InternalEdge("e", 0, 1, 1.0),), (ExternalEdge("e", 0),))
    with pytest.raises(GraphError, match="vertices"):
        MetricGraph.from_dict({"internal_edges": []})


def test_dict_round_trip(lasso_like):
    assert MetricGraph.from_dict(lasso_like.to_dict()) == lasso_like


def test_trace_layout(lasso_like):
    slots = lasso_like.trace_index()
    assert [(s.edge, s.endpoint) for s in slots] == [("x", "initial"), ("y", "initial"), ("i", "initial"), ("i", "terminal")]
    ext, at0, ata = edge_slices(lasso_like)
    assert (ext, at0, ata) == (slice(0, 2), slice(2, 3), slice(3, 4))
    assert lasso_like.vertex_slots() == {0: [0, 2], 1: [1, 3]}


def test_trace_examples(interval):
    f = EdgeFunction.sample(interval, lambda j, x: x, h=1e-2)
    v, d = trace(interval, f)
    assert np.allclose(v, [0, 1]) and np.allclose(d, [1, -1])

    f = EdgeFunction.sample(interval, lambda j, x: 3.0 + 0 * x, h=1e-2)
    v, d = trace(interval, f)
    assert np.allclose(v, [3, 3]) and np.allclose(d, 0, atol=1e-10)

    f = EdgeFunction.sample(interval, lambda j, x: np.sin(np.pi * x), h=1e-3)
    v, d = trace(interval, f)
    assert np.allclose(v, 0, atol=1e-12)
    assert np.allclose(d, [np.pi, np.pi], rtol=1e-5)


@pytest.mark.parametrize("order", [2, 3, 4])
def test_endpoint_derivative_order(order):
    errs = []
    for h in (1e-2, 5e-3):
        x = uniform_grid(1.0, h)
        d0, d1 = endpoint_derivatives(x, np.exp(x), order)
        errs.append(max(abs(d0 - 1), abs(d1 - np.e)))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(order, abs=0.3)


def test_uniform_grid_even_cells():
    x = uniform_grid(1.0, 0.3)
    assert (x.size - 1) % 2 == 0 and x[-1] == 1.0


def test_edge_function_algebra(lasso_like):
    f = EdgeFunction.sample(lasso_like, lambda j, x: np.exp(-x), h=1e-3, radius=20)
    g = 2 * f
    assert (g - f - f).max_abs() == 0
    # ||e^{-x}||^2 on two half-lines truncated at 20 plus [0,1]
    expected = 2 * 0.5 * (1 - np.exp(-40)) + 0.5 * (1 - np.exp(-2))
    assert f.norm() ** 2 == pytest.approx(expected, rel=1e-9)
    other = EdgeFunction.sample(lasso_like, None, h=2e-3, radius=20)
    with pytest.raises(GridError):
        f + other


@given(st.floats(0.1, 5.0), st.floats(-3, 3), st.floats(-3, 3))
def test_trace_of_linear_functions_is_exact(a, c0, c1):
    g = MetricGraph.interval(a)
    f = EdgeFunction.sample(g, lambda j, x: c0 + c1 * x, h=a / 50)
    v, d = trace(g, f)
    assert np.allclose(v, [c0, c0 + c1 * a], atol=1e-9)
    assert np.allclose(d, [c1, -c1], atol=1e-8)
