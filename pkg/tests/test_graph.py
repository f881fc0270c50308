import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphext.graph import (GraphError, MetricGraphSpec, OperatorOrder, Topology, TraceVector,
                            grid_points, load_graph, sample, synthesize_with_trace, trace_index,
                            trace_length, trace_of)

coeff = st.floats(-3, 3).filter(lambda v: abs(v) > 0.1)


def test_constructors_and_layout():
    g = MetricGraphSpec.looping_edge(3, 2.0)
    assert g.n_points == 5
    assert g.vertex == 2.0 and g.edge0 == (-2.0, 2.0)
    assert g.point_edges() == [0, 0, 1, 2, 3]
    assert list(g.point_signs()) == [1, -1, 1, 1, 1]
    t = MetricGraphSpec.t_shaped(2, 1.5)
    assert t.vertex == 0.0 and t.edge0 == (-1.5, 0.0)
    assert MetricGraphSpec.tadpole().topology is Topology.TADPOLE


@pytest.mark.parametrize("kwargs, msg", [
    (dict(topology="looping_edge", L=0.0, N=1), "positive"),
    (dict(topology="looping_edge", L=1.0, N=0), "positive integer"),
    (dict(topology="tadpole", L=1.0, N=2), "exactly one"),
    (dict(topology="looping_edge", L=1.0, N=2, coefficients=[(1, 1)]), "expected 3"),
])
def test_invalid_graphs(kwargs, msg):
    with pytest.raises(GraphError, match=msg):
        MetricGraphSpec(**kwargs)


def test_degenerate_airy_edge():
    g = MetricGraphSpec.tadpole(1.0, [(1.0, 1.0), (0.0, 1.0)])
    with pytest.raises(GraphError, match="degenerate Airy edge"):
        g.require_airy()


@given(N=st.integers(1, 5), L=st.floats(0.1, 10), data=st.data())
def test_dict_round_trip(N, L, data):
    coeffs = [(data.draw(coeff), data.draw(coeff)) for _ in range(N + 1)]
    g = MetricGraphSpec.looping_edge(N, L, coeffs)
    assert MetricGraphSpec.from_dict(json.loads(json.dumps(g.to_dict()))) == g


def test_load_graph_reports_position(tmp_path):
    p = tmp_path / "g.json"
    p.write_text('{"topology": "tadpole",\n "L": 1.0 "N": 1}')
    with pytest.raises(GraphError, match="line 2, column 11"):
        load_graph(p)
    p.write_text('{"graph": {"topology": "tadpole", "L": 2.0, "N": 1}}')
    assert load_graph(p).L == 2.0


def test_trace_vector_layout():
    g = MetricGraphSpec.tadpole()
    assert trace_length(g, OperatorOrder.AIRY3) == 9
    assert trace_index(g, OperatorOrder.SCHRODINGER2, 2, 1) == 5
    t = TraceVector.from_blocks(OperatorOrder.AIRY3, np.arange(9).reshape(3, 3))
    assert list(t.derivative(2)) == [2, 5, 8]
    with pytest.raises(GraphError):
        TraceVector(OperatorOrder.AIRY3, np.zeros(8))
    with pytest.raises(ValueError):
        t.values[0] = 1.0


def test_grid_must_divide_lengths():
    with pytest.raises(GraphError, match="does not divide"):
        grid_points(MetricGraphSpec.tadpole(), 0.3)


def test_trace_of_polynomial():
    g = MetricGraphSpec.tadpole()
    f = sample(g, lambda x: x**3 - x, lambda x: 2 + x**2, h=1 / 64)
    t = trace_of(f, OperatorOrder.AIRY3).blocks()
    np.testing.assert_allclose(t[0], [0, 2, -6], atol=1e-9)
    np.testing.assert_allclose(t[1], [0, 2, 6], atol=1e-9)
    np.testing.assert_allclose(t[2], [3, 2, 2], atol=1e-9)


def test_trace_needs_enough_samples():
    g = MetricGraphSpec.tadpole(1.0)
    with pytest.raises(GraphError, match="insufficient stencil"):
        trace_of(sample(g, np.sin, np.cos, h=0.5, R=1.0), OperatorOrder.SCHRODINGER2)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 3))
def test_synthesis_reproduces_trace(seed, N):
    rng = np.random.default_rng(seed)
    g = MetricGraphSpec.looping_edge(N)
    n = g.n_points * 3
    target = TraceVector(OperatorOrder.AIRY3, rng.standard_normal(n) + 1j * rng.standard_normal(n))
    f = synthesize_with_trace(g, target, h=1 / 128, R=2.0)
    got = trace_of(f, OperatorOrder.AIRY3)
    assert np.abs(got.values - target.values).max() < 1e-8 * (1 + np.abs(target.values).max())
    # compact support: zero beyond half the loop length from every point
    far = f.halfline_grid() > g.vertex + g.L / 2
    assert np.abs(f.halfline_samples[0][far]).max() < 1e-12
