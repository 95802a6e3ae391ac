"""Resolvent solves across strategies: analytic tables, cascade, prox, grids."""

import math

import numpy as np
import pytest

from degenppa.errors import (
    StrategyMismatch,
    UnboundedSearch,
    ValidationError,
)
from degenppa.metric import build_metric
from degenppa.operators import (
    BlockOp,
    Graph2DOp,
    SubdiffOp,
    build_alm_embedding,
    build_drs_embedding,
)
from degenppa.proxfn import (
    AbsQuadratic,
    AbsValue,
    AffineShiftSquare,
    OneNorm,
    Zero,
)
from degenppa.resolvent import (
    STRATEGIES,
    Empty,
    MultiValued,
    RangeUnique,
    Unique,
    check_moreau_identity,
    eval_equality_chain,
    eval_fixed_point_map,
    grid_residual_search,
    solve_resolvent,
)


def residual(op, Q, x, y):
    """dist(Q(x - y), A(y)), the certificate every solution must annul."""
    Qm = Q.matrix if hasattr(Q, "matrix") else np.asarray(Q, dtype=float)
    return op.value_dist(y, Qm @ (np.asarray(x, float) - np.asarray(y, float)))


def test_abs_pinned_coordinate():
    out = solve_resolvent(Graph2DOp("EG1"), np.diag([0.0, 1.0]), (1.5, 2.0))
    assert isinstance(out, Unique)
    np.testing.assert_allclose(out.select(), [0.0, 2.0])


def test_abs_soft_threshold_coordinate():
    Q = build_metric(np.diag([1.0, 0.0]))
    out = solve_resolvent(Graph2DOp("L1X"), Q, (3.0, 0.0))
    assert isinstance(out, RangeUnique)
    np.testing.assert_allclose(out.select(), [2.0, 0.0])
    np.testing.assert_allclose(out.range_part(Q), [2.0, 0.0])
    # kernel offsets run along the second axis
    assert out.kernel_set.contains((0.0, 17.0))
    # inside the threshold the first coordinate collapses to zero
    out2 = solve_resolvent(Graph2DOp("L1X"), Q, (0.5, 0.0))
    np.testing.assert_allclose(out2.select(), [0.0, 0.0])


def test_exp_empty_exactly_on_the_left_branch():
    Q = np.diag([1.0, 0.0])
    op = Graph2DOp("EG2")
    for x1 in (-1.5, -2.0, -10.0, -1.0):
        assert solve_resolvent(op, Q, (x1, 0.0)).is_empty
    for x1 in (0.5, 1.0, 3.0, -0.5):
        assert not solve_resolvent(op, Q, (x1, 0.0)).is_empty


def test_exp_multivalued_pieces_carry_zero_residual():
    Q = build_metric(np.diag([1.0, 0.0]))
    op = Graph2DOp("EG2")
    out = solve_resolvent(op, Q, (0.5, 0.0))
    assert isinstance(out, MultiValued)
    assert len(out.samples) >= 3
    for y in out.samples:
        assert residual(op, Q, (0.5, 0.0), y) <= 1e-9
    # the ray and the curve arc disagree in the range coordinate
    with pytest.raises(ValidationError):
        out.range_part(Q)
    with pytest.raises(ValidationError):
        out.select()


def test_exp_second_axis_metric_roots():
    Q = build_metric(np.diag([0.0, 1.0]))
    op = Graph2DOp("EG3")
    x = (0.0, 0.5)
    out = solve_resolvent(op, Q, x)
    assert isinstance(out, MultiValued)
    for y in out.samples:
        assert residual(op, Q, x, y) <= 1e-9
    # the lowest curve sample solves t + ln t = x2 to full precision
    t_min = min(s[0] for s in out.samples)
    assert abs(t_min + math.log(t_min) - 0.5) < 1e-12


def test_exp_full_rank_region_one_root():
    op = Graph2DOp("EG2")
    out = solve_resolvent(op, np.eye(2), (-2.0, 3.0))
    assert isinstance(out, Unique)
    y = out.select()
    assert y[0] == pytest.approx(-1.0)
    # region-I stationarity: e^{y2} + y2 - 3 = 0
    assert abs(math.exp(y[1]) + y[1] - 3.0) < 1e-10


def test_exp_full_rank_region_two_identity():
    out = solve_resolvent(Graph2DOp("EG2"), np.eye(2), (2.0, 0.0))
    assert isinstance(out, Unique)
    np.testing.assert_allclose(out.select(), [2.0, 0.0])


def test_exp_rank_zero_metric_returns_the_zero_set():
    out = solve_resolvent(Graph2DOp("EG2"), np.zeros((2, 2)), (5.0, 5.0))
    assert isinstance(out, MultiValued)
    op = Graph2DOp("EG2")
    for y in out.samples:
        assert op.value_dist(y, (0.0, 0.0)) <= 1e-12
    assert out.description.contains((1.0, -1.0))


def test_grid_search_agrees_with_analytic_on_abs():
    Q = build_metric(np.diag([0.0, 1.0]))
    y, r = grid_residual_search(Graph2DOp("EG1"), Q, (1.5, 2.0))
    assert r <= 1e-9
    np.testing.assert_allclose(y, [0.0, 2.0], atol=2e-4)


def test_grid_search_flags_the_escaping_minimizing_sequence():
    # no solution exists left of the fold; the residual keeps improving as the
    # grid follows e^{y2} -> 0, and the search refuses to certify
    Q = build_metric(np.diag([1.0, 0.0]))
    with pytest.raises(UnboundedSearch):
        grid_residual_search(Graph2DOp("EG2"), Q, (-2.0, 0.0))


def test_grid_strategy_confirms_feasible_points():
    out = solve_resolvent(Graph2DOp("EG2"), np.diag([1.0, 0.0]), (0.5, 0.0),
                          strategy="grid2d")
    assert not out.is_empty


def test_cascade_matches_closed_form_drs():
    op, Q = build_drs_embedding(AbsValue(1.0), AffineShiftSquare(1.0, [3.0]), 1.0)
    rng = np.random.default_rng(7)
    for _ in range(25):
        x = rng.normal(scale=3.0, size=3)
        a = solve_resolvent(op, Q, x, strategy="cascade")
        b = solve_resolvent(op, Q, x, strategy="closed_form_drs")
        np.testing.assert_allclose(a.range_part(Q), b.range_part(Q), atol=1e-12)
        assert residual(op, Q, x, b.select()) <= 1e-12


def test_cascade_matches_closed_form_alm():
    op, Q = build_alm_embedding(AffineShiftSquare(1.0, [0.0]), [2.0], 1.0)
    rng = np.random.default_rng(8)
    for _ in range(25):
        x = rng.normal(scale=3.0, size=2)
        a = solve_resolvent(op, Q, x, strategy="cascade")
        b = solve_resolvent(op, Q, x, strategy="closed_form_alm")
        np.testing.assert_allclose(a.range_part(Q), b.range_part(Q), atol=1e-12)


def test_auto_strategy_keeps_embeddings_on_the_cascade():
    # the dispatcher must not shortcut tagged embeddings through the closed
    # form, otherwise comparing the two routes would test nothing
    op, Q = build_drs_embedding(AbsValue(1.0), AffineShiftSquare(1.0, [3.0]), 1.0)
    out_auto = solve_resolvent(op, Q, (0.0, 0.0, 0.0))
    out_cascade = solve_resolvent(op, Q, (0.0, 0.0, 0.0), strategy="cascade")
    np.testing.assert_allclose(out_auto.select(), out_cascade.select(), atol=0.0)


def test_cascade_block_without_coupling():
    op = BlockOp((1, 1), (SubdiffOp(AbsQuadratic(1.0, 1.0, 3.0)), SubdiffOp(Zero(1))), {})
    Q = build_metric(np.diag([1.0, 0.0]))
    out = solve_resolvent(op, Q, (3.0, 7.0), strategy="cascade")
    assert isinstance(out, RangeUnique)
    np.testing.assert_allclose(out.range_part(Q), [2.5, 0.0])
    assert out.kernel_set.contains((0.0, -4.0))


def test_cascade_set_valued_feed_rejected():
    # a free block feeding a coupled row cannot be eliminated symbolically
    op = BlockOp((1, 1),
                 (SubdiffOp(Zero(1)), SubdiffOp(AffineShiftSquare(1.0, [0.0]))),
                 {(1, 0): 1.0})
    Q = build_metric(np.diag([0.0, 1.0]))
    with pytest.raises(StrategyMismatch):
        solve_resolvent(op, Q, (1.0, 1.0), strategy="cascade")


def test_prox_direct_uniform_and_diagonal():
    op = SubdiffOp(OneNorm(1.0, 2))
    out = solve_resolvent(op, 2.0 * np.eye(2), (3.0, -0.25), strategy="prox_direct")
    np.testing.assert_allclose(out.select(), [2.5, 0.0])
    # a kink coordinate with zero metric weight is pinned, not free:
    # 0 in d|y| has the single solution y = 0
    Q = build_metric(np.diag([1.0, 0.0]))
    out2 = solve_resolvent(op, Q, (3.0, -0.25), strategy="prox_direct")
    assert isinstance(out2, Unique)
    np.testing.assert_allclose(out2.select(), [2.0, 0.0])
    # a flat coordinate is genuinely free
    out3 = solve_resolvent(SubdiffOp(Zero(2)), Q, (3.0, -0.25), strategy="prox_direct")
    assert isinstance(out3, RangeUnique)
    np.testing.assert_allclose(out3.range_part(Q), [3.0, 0.0])
    assert out3.kernel_set.contains((0.0, 11.0))


def test_strategy_mismatch_surfaces():
    with pytest.raises(StrategyMismatch):
        solve_resolvent(Graph2DOp("EG1"), np.eye(2), (0.0, 0.0), strategy="cascade")
    with pytest.raises(StrategyMismatch):
        solve_resolvent(SubdiffOp(AbsValue(1.0)), np.eye(1), (0.0,),
                        strategy="closed_form_drs")
    with pytest.raises(ValidationError):
        solve_resolvent(Graph2DOp("EG1"), np.eye(2), (0.0, 0.0), strategy="nope")
    assert "auto" in STRATEGIES


def test_nondiagonal_metric_rejected_by_analytic2d():
    M = np.array([[1.0, 0.5], [0.5, 1.0]])
    with pytest.raises(StrategyMismatch):
        solve_resolvent(Graph2DOp("EG1"), M, (1.0, 1.0), strategy="analytic2d")


def test_fixed_point_map_sees_only_the_range_projection():
    Q = build_metric(np.diag([1.0, 0.0]))
    op = Graph2DOp("L1X")
    a = eval_fixed_point_map(op, Q, (3.0, 7.0))
    b = solve_resolvent(op, Q, (3.0, 0.0))
    np.testing.assert_allclose(a.range_part(Q), b.range_part(Q), atol=0.0)


def test_equality_chain_routes_agree():
    op = SubdiffOp(AbsValue(1.0))
    for q in (1.0, 2.0):
        for t in (-2.0, -0.4, 0.0, 0.3, 5.0):
            chain = eval_equality_chain(op, np.array([[q]]), [t])
            vals = np.array([chain[k][0] for k in "abcde"])
            assert np.max(np.abs(vals - vals[0])) <= 1e-12
            # the residual is the clipped pull toward the kink
            assert vals[0] == pytest.approx(min(max(q * t, -1.0), 1.0))


def test_equality_chain_on_the_planar_table():
    Q = np.diag([1.0, 0.0])
    chain = eval_equality_chain(Graph2DOp("L1X"), Q, (0.7, 3.0))
    vals = np.stack([chain[k] for k in "abcde"])
    assert np.max(np.abs(vals - vals[0])) <= 1e-12
    np.testing.assert_allclose(vals[0], [0.7, 0.0])


def test_equality_chain_unavailable_for_coupled_blocks():
    from degenppa.errors import InverseUnavailable
    op, Q = build_drs_embedding(AbsValue(1.0), AffineShiftSquare(1.0, [3.0]), 1.0)
    with pytest.raises(InverseUnavailable):
        eval_equality_chain(op, Q, np.zeros(3))


def test_moreau_identity_scalar_and_block():
    assert check_moreau_identity(SubdiffOp(AbsValue(1.0)), np.array([[1.0]]), [2.7]) <= 1e-12
    op, Q = build_drs_embedding(AbsValue(1.0), AffineShiftSquare(1.0, [3.0]), 1.0)
    rng = np.random.default_rng(9)
    for _ in range(10):
        x = rng.normal(scale=2.0, size=3)
        assert check_moreau_identity(op, Q, x) <= 1e-9


def test_moreau_identity_needs_a_selectable_solution():
    with pytest.raises(ValidationError):
        check_moreau_identity(Graph2DOp("EG2"), np.diag([1.0, 0.0]), (0.5, 0.0))
