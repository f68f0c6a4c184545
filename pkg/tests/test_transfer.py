import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bandedge import (bloch_trace, bloch_trace_derivative, build_crystal, cell_matrix, layer_matrix,
                      propagate_to)
from bandedge.errors import PositionOutOfCell

from conftest import OMEGA0
from oracles import central_difference


def test_layer_matrix_static_limit():
    np.testing.assert_array_equal(layer_matrix(1.0, 1.0, 0.0), [[1.0, 1.0], [0.0, 1.0]])


def test_layer_matrix_half_wave():
    np.testing.assert_allclose(layer_matrix(1.0, 1.0, math.pi), [[-1, 0], [0, -1]], atol=1e-15)


def test_layer_matrix_quarter_wave():
    expected = [[0.0, 2 / (3 * math.pi)], [-1.5 * math.pi, 0.0]]
    np.testing.assert_allclose(layer_matrix(2.0, 1 / 3, 3 * math.pi / 4), expected, atol=1e-15)


def test_uniform_cell_is_one_layer():
    c = build_crystal([(1.7, 0.9)])
    np.testing.assert_allclose(cell_matrix(c, 2.3), layer_matrix(1.7, 0.9, 2.3), atol=1e-15)


def test_canonical_midgap_trace(canonical):
    # product of two quarter-wave matrices is diag(-n1/n2, -n2/n1)
    t = cell_matrix(canonical, OMEGA0)
    np.testing.assert_allclose(t, [[-0.5, 0.0], [0.0, -2.0]], atol=1e-14)
    assert bloch_trace(canonical, OMEGA0) == pytest.approx(-1.25, abs=1e-14)


def test_static_cell_is_shear(any_crystal):
    t = cell_matrix(any_crystal, 0.0)
    np.testing.assert_allclose(t, [[1.0, any_crystal.period], [0.0, 1.0]], atol=1e-15)
    assert bloch_trace(any_crystal, 0.0) == 1.0


def test_propagate_endpoints(canonical):
    w = 1.3
    np.testing.assert_array_equal(propagate_to(canonical, w, 0.0), np.eye(2))
    np.testing.assert_allclose(propagate_to(canonical, w, 1.0), cell_matrix(canonical, w), atol=1e-15)
    np.testing.assert_allclose(propagate_to(canonical, w, 2 / 3), layer_matrix(1.0, 2 / 3, w), atol=1e-15)
    with pytest.raises(PositionOutOfCell):
        propagate_to(canonical, w, 1.5)


def test_uniform_trace_closed_form():
    n = 1.4
    c = build_crystal([(n, 1.0)])
    for w in (0.3, 1.7, 5.2):
        assert bloch_trace(c, w) == pytest.approx(math.cos(n * w), abs=1e-14)
        assert bloch_trace_derivative(c, w) == pytest.approx(-n * math.sin(n * w), abs=1e-13)


def test_derivative_matches_finite_difference_at_midgap(canonical):
    analytic = bloch_trace_derivative(canonical, OMEGA0)
    fd = central_difference(lambda w: bloch_trace(canonical, w), OMEGA0, 1e-6 * OMEGA0)
    # midgap of the canonical stack is an extremum of the trace, so compare absolutely
    assert analytic == pytest.approx(fd, abs=1e-8)


layers_st = st.lists(st.tuples(st.floats(1.0, 4.0), st.floats(0.05, 1.0)), min_size=1, max_size=4)


@settings(max_examples=1000, deadline=None)
@given(layers_st, st.floats(0.0, 30.0))
def test_unimodular(layers, w):
    c = build_crystal(layers)
    t = cell_matrix(c, w)
    assert t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0] == pytest.approx(1.0, abs=1e-12)
    for l in c.layers:
        assert np.linalg.det(layer_matrix(l.index, l.thickness, w)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(layers_st, st.floats(0.01, 20.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_composition(layers, w, f1, f2):
    c = build_crystal(layers)
    x1, x2 = sorted((f1 * c.period, f2 * c.period))
    # transfer from x1 to x2 assembled from the layer pieces in between
    seg = np.eye(2)
    pts = sorted({x1, x2, *[b for b in c.boundaries if x1 < b < x2]})
    for a, b in zip(pts[:-1], pts[1:]):
        j = int(c.layer_of(0.5 * (a + b)))
        seg = layer_matrix(c.layers[j].index, b - a, w) @ seg
    lhs = propagate_to(c, w, x2)
    rhs = seg @ propagate_to(c, w, x1)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * max(1.0, np.abs(lhs).max()))


@settings(max_examples=200, deadline=None)
@given(layers_st, st.floats(0.01, 20.0), st.floats(0.1, 10.0))
def test_scale_invariance(layers, w, s):
    c = build_crystal(layers)
    assert bloch_trace(c.scaled(s), w / s) == pytest.approx(bloch_trace(c, w), abs=1e-12 * max(1, abs(bloch_trace(c, w))))


@settings(max_examples=200, deadline=None)
@given(layers_st, st.floats(0.05, 20.0))
def test_derivative_vs_finite_difference(layers, w):
    c = build_crystal(layers)
    analytic = bloch_trace_derivative(c, w)
    h = 1e-6 * w
    fd = central_difference(lambda v: bloch_trace(c, v), w, h)
    # away from stationary points of the trace only
    second = abs(central_difference(lambda v: bloch_trace_derivative(c, v), w, h))
    if abs(analytic) < 1e-3 * max(1.0, second * w):
        return
    assert analytic == pytest.approx(fd, rel=1e-6)


def test_vectorized_trace_matches_scalar(canonical):
    ws = np.linspace(0.0, 20.0, 101)
    vec = bloch_trace(canonical, ws)
    np.testing.assert_allclose(vec, [bloch_trace(canonical, float(w)) for w in ws], atol=0)
