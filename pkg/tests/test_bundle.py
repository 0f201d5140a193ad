import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cqm.bundle import (Config, GaugeField, ModelParams, Shift,
                        decompose_shift, gauge_apply, right_action)

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)


def vec(n):
    return arrays(np.float64, n, elements=finite)


def test_right_action_example():
    p = Config(0.0, [1.0, 2.0])
    q = right_action(p, Shift([3.0, -1.0]))
    assert q.t == 0.0
    assert np.array_equal(q.x, [4.0, 1.0])


def test_right_action_identity():
    p = Config(0.3, [1.0, 2.0, -0.5])
    q = right_action(p, Shift([0.0, 0.0, 0.0]))
    assert np.array_equal(q.x, p.x)


def test_right_action_dimension_mismatch():
    with pytest.raises(ValueError):
        right_action(Config(0.0, [1.0]), Shift([1.0, 2.0]))


@settings(max_examples=200, deadline=None)
@given(vec(3), vec(3), vec(3))
def test_right_action_composition(x, a, b):
    p = Config(0.0, x)
    lhs = right_action(right_action(p, Shift(a)), Shift(b))
    rhs = right_action(p, Shift(a) + Shift(b))
    assert np.abs(lhs.x - rhs.x).max() <= 1e-15 * (1 + np.abs(rhs.x).max())


def test_gauge_apply_boost():
    G = GaugeField.boost(np.array([2.0]), 0.0, 4.0)
    p = gauge_apply(Config(3.0, [1.0]), G)
    assert p.t == 3.0
    assert np.allclose(p.x, [7.0], atol=1e-14)


def test_gauge_apply_zero_field():
    G = GaugeField.constant(np.zeros(2))
    p = Config(0.7, [1.0, -2.0])
    assert np.array_equal(gauge_apply(p, G).x, p.x)


def test_gauge_apply_outside_support():
    G = GaugeField.bump(np.array([1.0]), 1.0, 2.0)
    p = Config(0.5, [3.0])
    assert np.array_equal(gauge_apply(p, G).x, p.x)
    assert np.array_equal(gauge_apply(Config(2.0, [3.0]), G).x, [3.0])


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-5, max_value=5, allow_nan=False))
def test_gauge_apply_preserves_time(t):
    G = GaugeField.boost(np.array([1.0, -0.5]), -5.0, 5.0)
    p = Config(t, [0.0, 0.0])
    assert gauge_apply(p, G).t == t


def test_gauge_field_validation():
    with pytest.raises(ValueError):
        GaugeField(np.array([0.0, 0.0]), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        # nonzero sample at the support boundary
        GaugeField(np.array([0.0, 1.0]), np.array([[1.0], [0.0]]),
                   support=(0.0, 1.0))


def test_gauge_field_json_roundtrip():
    G = GaugeField.bump(np.array([1.0, 2.0]), 0.0, 1.0, n=9)
    G2 = GaugeField.from_dict(G.to_dict())
    assert np.array_equal(G.values, G2.values)
    assert G.support == G2.support


def test_decompose_particle_anchor():
    params = ModelParams(2, 1, np.array([1.0, 1.0]))
    dec = decompose_shift(params, Shift([1.0, 3.0]), anchor=0)
    assert np.array_equal(dec.external.v, [1.0, 1.0])
    assert np.array_equal(dec.internal.v, [0.0, 2.0])


def test_decompose_mean_anchor():
    params = ModelParams(2, 1, np.array([1.0, 1.0]))
    dec = decompose_shift(params, Shift([1.0, 3.0]), anchor="mean")
    assert np.array_equal(dec.external.v, [2.0, 2.0])
    assert np.array_equal(dec.internal.v, [-1.0, 1.0])


def test_decompose_diagonal_shift():
    params = ModelParams(3, 2, np.array([1.0, 1.0, 1.0]))
    X = Shift(params.replicate(np.array([0.4, -1.2])))
    for anchor in (0, 2, "mean"):
        dec = decompose_shift(params, X, anchor=anchor)
        assert np.abs(dec.internal.v).max() <= 1e-15


@settings(max_examples=150, deadline=None)
@given(vec(6))
def test_decompose_projection_pair(v):
    params = ModelParams(3, 2, np.array([1.0, 1.0, 1.0]))
    dec = decompose_shift(params, Shift(v), anchor=1)
    again = decompose_shift(params, dec.internal, anchor=1)
    assert np.array_equal(again.external.v, np.zeros(6))
    assert np.array_equal(again.internal.v, dec.internal.v)
    # recombination is exact up to one rounding of the subtraction
    assert np.abs(dec.internal.v + dec.external.v - v).max() <= 1e-13 * (
        1 + np.abs(v).max())


def test_decompose_anchor_out_of_range():
    params = ModelParams(2, 1, np.array([1.0, 1.0]))
    with pytest.raises(IndexError):
        decompose_shift(params, Shift([1.0, 2.0]), anchor=5)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0, 1, np.array([]))
    with pytest.raises(ValueError):
        ModelParams(1, 1, np.array([-1.0]))
    with pytest.raises(ValueError):
        ModelParams(1, 1, np.array([1.0]), hbar=0.0)


def test_model_params_json_roundtrip():
    params = ModelParams(2, 3, np.array([1.0, 2.5]), hbar=0.7)
    back = ModelParams.from_dict(params.to_dict())
    assert back.n_particles == params.n_particles
    assert back.spatial_dim == params.spatial_dim
    assert np.array_equal(back.masses, params.masses)
    assert back.hbar == params.hbar


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-3, max_value=6, allow_nan=False))
def test_gauge_support_window_property(t):
    G = GaugeField.bump(np.array([1.0, -2.0]), 1.0, 2.0)
    p = Config(t, [0.5, 0.5])
    moved = gauge_apply(p, G)
    if t <= 1.0 or t >= 2.0:
        assert np.array_equal(moved.x, p.x)


@settings(max_examples=150, deadline=None)
@given(vec(6))
def test_decompose_mean_anchor_invariants(v):
    params = ModelParams(3, 2, np.array([1.0, 1.0, 1.0]))
    dec = decompose_shift(params, Shift(v), anchor="mean")
    blocks = dec.internal.v.reshape(3, 2)
    scale = 1 + np.abs(v).max()
    assert np.abs(blocks.mean(axis=0)).max() <= 1e-14 * scale
    ext = dec.external.v.reshape(3, 2)
    assert np.array_equal(ext[0], ext[1]) and np.array_equal(ext[1], ext[2])
