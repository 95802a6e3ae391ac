"""Scalar and vector prox rules, plus the postcomposition solver."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenppa.errors import (
    DimensionMismatch,
    InfeasibleConstraint,
    InnerNotConverged,
    RankDeficient,
)
from degenppa.proxfn import (
    AbsQuadratic,
    AbsValue,
    AffineShiftSquare,
    IndicatorAffine,
    InfimalPostcomposition,
    Linear,
    OneNorm,
    Quadratic,
    ScaledArg,
    Zero,
    eval_prox,
    moreau_complement,
    prox_infimal_postcomposition,
    soft_threshold,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def test_soft_threshold_exact_branches():
    # the three branches return exact float arithmetic, no rounding detours
    assert soft_threshold(2.0, 1.0) == 1.0
    assert soft_threshold(-3.0, 1.0) == -2.0
    assert soft_threshold(0.5, 1.0) == 0.0
    assert soft_threshold(1.0, 1.0) == 0.0
    assert soft_threshold(-1.0, 1.0) == 0.0
    assert soft_threshold(0.0, 0.0) == 0.0
    assert soft_threshold(7.25, 0.25) == 7.0


@given(finite, st.floats(0.0, 1e6, allow_nan=False))
def test_soft_threshold_shrinks_toward_zero(b, thr):
    s = soft_threshold(b, thr)
    assert abs(s) <= abs(b)
    assert s * b >= 0.0


def test_absvalue_prox_is_soft_thresholding():
    f = AbsValue(2.0)
    np.testing.assert_allclose(eval_prox(f, 0.5, 3.0), [2.0])
    np.testing.assert_allclose(eval_prox(f, 0.5, -0.5), [0.0])
    assert f.value(-3.0) == 6.0
    assert f.separable_coords() == [("abs", 2.0)]


def test_onenorm_prox_componentwise():
    f = OneNorm(1.0, 3)
    np.testing.assert_allclose(eval_prox(f, 1.0, [2.0, -0.5, -4.0]), [1.0, 0.0, -3.0])
    assert f.value([1.0, -2.0, 0.5]) == 3.5
    assert f.separable_coords() == [("abs", 1.0)] * 3


def test_quadratic_prox_solves_the_linear_system():
    P = np.array([[2.0, 0.0], [0.0, 4.0]])
    q = np.array([1.0, -1.0])
    f = Quadratic(P, q)
    u = eval_prox(f, 0.5, [1.0, 1.0])
    np.testing.assert_allclose(u, [0.25, 0.5])
    # stationarity: P u + q + (u - z)/tau = 0
    np.testing.assert_allclose(P @ u + q + (u - np.array([1.0, 1.0])) / 0.5,
                               [0.0, 0.0], atol=1e-14)
    assert f.quad_lipschitz == pytest.approx(4.0)


def test_quadratic_separability_needs_a_diagonal():
    diag = Quadratic(np.diag([1.0, 3.0]), [0.5, 0.0])
    assert diag.separable_coords() == [("affine", 1.0, 0.5), ("affine", 3.0, 0.0)]
    full = Quadratic(np.array([[1.0, 0.5], [0.5, 1.0]]), [0.0, 0.0])
    assert full.separable_coords() is None


def test_affine_shift_square():
    f = AffineShiftSquare(2.0, [1.0, -1.0])
    assert f.value([1.0, -1.0]) == 0.0
    assert f.value([2.0, -1.0]) == 1.0
    np.testing.assert_allclose(eval_prox(f, 0.5, [3.0, 3.0]), [2.0, 1.0])
    P, q = f.quad_parts()
    np.testing.assert_allclose(P, 2.0 * np.eye(2))
    np.testing.assert_allclose(q, [-2.0, 2.0])
    with pytest.raises(ValueError):
        AffineShiftSquare(0.0, [1.0])


def test_indicator_affine_projects():
    f = IndicatorAffine([[1.0, 1.0]], [2.0])
    np.testing.assert_allclose(eval_prox(f, 1.0, [0.0, 0.0]), [1.0, 1.0])
    assert f.value([1.5, 0.5]) == 0.0
    assert f.value([0.0, 0.0]) == math.inf
    # scaling an indicator changes nothing
    assert f.scale(7.0) is f


def test_indicator_affine_empty_set_raises():
    f = IndicatorAffine([[1.0, 1.0], [1.0, 1.0]], [0.0, 1.0])
    with pytest.raises(InfeasibleConstraint):
        eval_prox(f, 1.0, [0.0, 0.0])


def test_linear_and_zero_prox():
    f = Linear([2.0, -1.0])
    np.testing.assert_allclose(eval_prox(f, 0.25, [1.0, 1.0]), [0.5, 1.25])
    assert f.separable_coords() == [("linear", 2.0), ("linear", -1.0)]
    z = Zero(2)
    np.testing.assert_allclose(eval_prox(z, 5.0, [3.0, -4.0]), [3.0, -4.0])
    assert z.separable_coords() == [("zero",), ("zero",)]


def test_absquadratic_prox_frozen():
    # min |t| + (1/2)(t-3)^2 + (1/2)(t-3)^2 has stationary point t = 2.5
    f = AbsQuadratic(1.0, 1.0, 3.0)
    np.testing.assert_allclose(eval_prox(f, 1.0, 3.0), [2.5])
    assert f.value(2.5) == pytest.approx(2.5 + 0.125)
    assert f.separable_coords() == [("absquad", 1.0, 1.0, 3.0)]
    # kink wins when the pull toward the shift is small
    np.testing.assert_allclose(eval_prox(AbsQuadratic(2.0, 1.0, 0.5), 1.0, 0.5), [0.0])


def test_scaled_arg_matches_direct_computation():
    # h(x) = |3x| = 3|x|, so prox_h(5) = soft_threshold(5, 3) = 2
    h = ScaledArg(AbsValue(1.0), 3.0)
    np.testing.assert_allclose(eval_prox(h, 1.0, 5.0), [2.0])
    np.testing.assert_allclose(eval_prox(h, 1.0, 2.0), [0.0])
    assert h.value(2.0) == pytest.approx(6.0)


def test_scale_multiplies_the_function():
    f = AbsValue(1.0).scale(2.0)
    assert f.weight == 2.0
    g = Quadratic(np.eye(1), [1.0]).scale(3.0)
    P, q = g.quad_parts()
    np.testing.assert_allclose(P, [[3.0]])
    np.testing.assert_allclose(q, [3.0])


def test_eval_prox_rejects_bad_tau():
    with pytest.raises(ValueError):
        eval_prox(AbsValue(1.0), 0.0, 1.0)
    with pytest.raises(ValueError):
        eval_prox(AbsValue(1.0), -1.0, 1.0)


def test_moreau_complement_of_abs_is_a_clip():
    # a - soft_threshold(a, w) clips a to [-w, w]
    assert moreau_complement(AbsValue(1.0), 1.0, 3.0) == pytest.approx(1.0)
    assert moreau_complement(AbsValue(1.0), 1.0, -5.0) == pytest.approx(-1.0)
    assert moreau_complement(AbsValue(1.0), 1.0, 0.5) == pytest.approx(0.5)


scalar_fns = st.sampled_from([
    AbsValue(1.0),
    AbsValue(0.25),
    AbsQuadratic(1.0, 1.0, 3.0),
    AbsQuadratic(0.5, 2.0, -1.0),
    AffineShiftSquare(1.0, [2.0]),
    Linear([1.5]),
    Zero(1),
])


@given(scalar_fns, finite, finite, st.floats(1e-3, 1e3))
@settings(max_examples=200, deadline=None)
def test_prox_is_nonexpansive(f, z1, z2, tau):
    p1 = eval_prox(f, tau, z1)[0]
    p2 = eval_prox(f, tau, z2)[0]
    assert abs(p1 - p2) <= abs(z1 - z2) + 1e-9 * (1.0 + abs(z1 - z2))


@given(scalar_fns, st.floats(-100.0, 100.0), st.floats(-100.0, 100.0),
       st.floats(1e-2, 1e2))
@settings(max_examples=200, deadline=None)
def test_prox_minimizes_the_envelope_objective(f, z, y, tau):
    p = eval_prox(f, tau, z)[0]
    obj = lambda t: f.value(t) + (t - z) ** 2 / (2.0 * tau)
    assert obj(p) <= obj(y) + 1e-7 * (1.0 + abs(obj(y)))


def test_subdiff_dist_abs():
    f = AbsValue(1.0)
    assert f.subdiff_dist(2.0, 1.0) == 0.0
    assert f.subdiff_dist(2.0, 0.0) == 1.0
    assert f.subdiff_dist(0.0, 0.3) == 0.0  # kink interval [-1, 1]
    assert f.subdiff_dist(0.0, 1.5) == pytest.approx(0.5)


def test_postcomposition_route_scaled_identity():
    # min_t (1/2) t^2 + (1/2)(2t - 3)^2 at t = 6/5
    q, t = prox_infimal_postcomposition(Quadratic(np.eye(1), [0.0]), [[2.0]], 1.0, [3.0])
    np.testing.assert_allclose(t, [1.2])
    np.testing.assert_allclose(q, [2.4])
    # same route with a kink: min |t| + (1/2)(2t - 3)^2 at t = 5/4
    q2, t2 = prox_infimal_postcomposition(AbsValue(1.0), [[2.0]], 1.0, [3.0])
    np.testing.assert_allclose(t2, [1.25])
    np.testing.assert_allclose(q2, [2.5])


def test_postcomposition_route_quadratic_normal_equations():
    # min (1/2)||t||^2 + (1/2)(t1 + t2 - 4)^2 at t = (4/3, 4/3)
    g = Quadratic(np.eye(2), [0.0, 0.0])
    q, t = prox_infimal_postcomposition(g, [[1.0, 1.0]], 1.0, [4.0])
    np.testing.assert_allclose(t, [4.0 / 3.0, 4.0 / 3.0], atol=1e-12)
    np.testing.assert_allclose(q, [8.0 / 3.0], atol=1e-12)


def test_postcomposition_route_proximal_gradient():
    # min |t1| + |t2| + (1/2)(t1 + t2 - 4)^2; the sum lands on soft_threshold(4, 1)
    g = OneNorm(1.0, 2)
    q, t = prox_infimal_postcomposition(g, [[1.0, 1.0]], 1.0, [4.0], inner_tol=1e-12)
    assert q[0] == pytest.approx(3.0, abs=1e-8)
    assert np.all(t >= -1e-10)


def test_postcomposition_rank_deficient_rejected():
    with pytest.raises(RankDeficient):
        prox_infimal_postcomposition(OneNorm(1.0, 2), [[1.0, 1.0], [1.0, 1.0]], 1.0, [0.0, 1.0])


def test_postcomposition_dimension_checked():
    with pytest.raises(DimensionMismatch):
        prox_infimal_postcomposition(OneNorm(1.0, 2), [[1.0]], 1.0, [0.0])


def test_postcomposition_flat_direction_detected():
    # g(t) = t with B = 0 has no stationary point
    with pytest.raises(InnerNotConverged):
        prox_infimal_postcomposition(Quadratic([[0.0]], [1.0]), [[0.0]], 1.0, [0.0])


def test_infimal_postcomposition_wrapper_prox():
    fn = InfimalPostcomposition(Quadratic(np.eye(1), [0.0]), [[2.0]])
    np.testing.assert_allclose(eval_prox(fn, 1.0, [3.0]), [2.4])
