import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lubrication import (AnalyticProfile, GeometrySpec, PiecewiseConstant, PiecewiseLinear,
                         build_profile, eval_height, sample_pwc, sample_pwl)
from lubrication.errors import InvalidGeometry, OutOfDomain

from conftest import BFS, LOGISTIC, SINUSOID, WEDGE


def test_bfs_is_two_component_constant(bfs):
    assert isinstance(bfs, PiecewiseConstant)
    np.testing.assert_array_equal(bfs.knots, [0, 8, 16])
    np.testing.assert_array_equal(bfs.values, [2, 1])


def test_wedge_is_three_component_linear(wedge):
    assert isinstance(wedge, PiecewiseLinear)
    assert wedge.n_components == 3
    np.testing.assert_array_equal(wedge.slopes, [0, -0.5, 0])


@pytest.mark.parametrize("spec", [LOGISTIC, SINUSOID,
                                  GeometrySpec("sinusoid-cavity", {"H_0": 1, "delta": 0.5, "k": 4,
                                                                   "l": 2, "L": 3})])
def test_smooth_geometries_are_analytic(spec):
    assert isinstance(build_profile(spec), AnalyticProfile)


def test_bfs_rejects_inverted_step():
    with pytest.raises(InvalidGeometry, match="H_in"):
        build_profile(GeometrySpec("bfs", {"H_in": 1, "H_out": 2, "l": 8, "L": 16}))


@pytest.mark.parametrize("name,params,field", [
    ("logistic", {"H_in": 2, "H_out": 1, "lambda": 0, "L": 16}, "lambda"),
    ("sinusoid-periodic", {"H_0": 1, "delta": 1.0, "alpha": 1}, "delta"),
    ("sinusoid-cavity", {"H_0": 1, "delta": 0.5, "k": 1.5, "l": 2, "L": 3}, "k"),
    ("wedge", {"H_in": 2, "H_out": 1, "l_in": 1, "l_out": 1, "l_wedge": 0}, "l_wedge"),
    ("bfs", {"H_in": 2, "H_out": 1, "l": 8}, "L"),
])
def test_parameter_invariants(name, params, field):
    with pytest.raises(InvalidGeometry) as err:
        build_profile(GeometrySpec(name, params))
    assert err.value.field == field


def test_unknown_geometry_and_parameter():
    with pytest.raises(InvalidGeometry):
        GeometrySpec("teapot", {})
    with pytest.raises(InvalidGeometry):
        build_profile(GeometrySpec("bfs", {"H_in": 2, "H_out": 1, "l": 8, "L": 16, "bogus": 1}))


def test_one_sided_limits_at_step(bfs):
    assert eval_height(bfs, 8.0, "left") == 2.0
    assert eval_height(bfs, 8.0, "right") == 1.0


def test_logistic_midpoint(logistic):
    assert eval_height(logistic, 8.0) == pytest.approx(1.5, abs=1e-15)


def test_out_of_domain(bfs):
    with pytest.raises(OutOfDomain):
        bfs(16.5)


def test_sample_flat_profile():
    flat = PiecewiseConstant([0, 1], [1.0])
    np.testing.assert_array_equal(sample_pwc(flat, 7).values, np.ones(7))
    np.testing.assert_array_equal(sample_pwl(flat, 5).slopes, np.zeros(5))


def test_sample_pwc_logistic_two_intervals(logistic):
    np.testing.assert_allclose(sample_pwc(logistic, 2).values, [1.75, 1.25], atol=1e-12)


def test_sample_pwc_is_idempotent_on_matching_knots(bfs):
    again = sample_pwc(bfs, 2)
    np.testing.assert_array_equal(again.knots, bfs.knots)
    np.testing.assert_array_equal(again.values, bfs.values)


def test_sample_pwl_reproduces_wedge_on_its_knots():
    w = build_profile(GeometrySpec("wedge", {"H_in": 2, "H_out": 1, "l_in": 2, "l_out": 2,
                                             "l_wedge": 2}))
    s = sample_pwl(w, 3)
    np.testing.assert_array_equal(s.start, w.start)
    np.testing.assert_array_equal(s.end, w.end)


def test_sample_pwl_sinusoid_quarter_periods():
    s = sample_pwl(build_profile(SINUSOID), 4)
    heights = np.append(s.start, s.end[-1])
    np.testing.assert_allclose(heights, [1.5, 1, 0.5, 1, 1.5], atol=1e-15)


def test_sampling_rejects_nonpositive_heights():
    with pytest.raises(InvalidGeometry):
        AnalyticProfile("dip", 0, 1, lambda x: 0.5 - x)


def test_pwl_interpolation_error_is_second_order(logistic):
    # the step has width ~1/32, so the asymptotic regime starts near N ~ 512
    sizes = [512, 1024, 2048, 4096]
    errs = []
    for n in sizes:
        s = sample_pwl(logistic, n)
        x = 0.5 * (s.knots[:-1] + s.knots[1:])
        errs.append(np.max(np.abs(eval_height(s, x) - logistic(x))))
    slope = -np.polyfit(np.log(sizes), np.log(errs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)


def test_spec_json_round_trip():
    text = WEDGE.to_json()
    assert json.loads(text) == {"geometry": "wedge", "params": WEDGE.params}
    assert GeometrySpec.from_json(text) == WEDGE


def test_cavity_is_shifted_to_positive_domain():
    p = build_profile(GeometrySpec("sinusoid-cavity", {"H_0": 1, "delta": 0.5, "k": 2,
                                                       "l": 2, "L": 3}))
    assert (p.x0, p.xN) == (0.0, 6.0)
    assert p(3.0) == pytest.approx(1.5)          # centre of the textured region
    assert p(0.0) == pytest.approx(1.5)          # even k: flat at the crest height


def test_custom_piecewise_and_expression():
    pc = build_profile(GeometrySpec("custom", {"x": [0, 1, 3], "h": [2, 1]}))
    assert isinstance(pc, PiecewiseConstant)
    pl = build_profile(GeometrySpec("custom", {"x": [0, 1, 3], "h": [2, 1, 1]}))
    assert isinstance(pl, PiecewiseLinear)
    ex = build_profile(GeometrySpec("custom", {"expr": "1 + 0.5*sin(x)", "x0": 0, "xN": 3}))
    assert ex(0.0) == pytest.approx(1.0)


heights = st.lists(st.floats(0.1, 10.0), min_size=2, max_size=12)


@settings(max_examples=50, deadline=None)
@given(heights, st.integers(1, 40))
def test_samples_positive_and_idempotent(hs, n):
    prof = PiecewiseLinear.from_nodes(np.linspace(0, 1, len(hs)), hs)
    s = sample_pwl(prof, n)
    assert np.all(s.start > 0) and np.all(s.end > 0)
    t = sample_pwl(s, n)
    np.testing.assert_array_equal(t.start, s.start)
    np.testing.assert_array_equal(t.end, s.end)
