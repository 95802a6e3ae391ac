"""Iteration driver, reference points, and the certificate reports."""

import numpy as np
import pytest

from degenppa.builtins import get_problem
from degenppa.errors import NotAFixedPoint, NotAZero, ValidationError
from degenppa.iteration import (
    StopRule,
    fejer_margins,
    fejer_report,
    fix_equals_projected_zeros,
    iterate,
    lipschitz_probe,
    reference_fixed_point,
    summability_report,
)
from degenppa.metric import build_metric, project_range


def test_stop_rule_defaults():
    stop = StopRule()
    assert stop.max_iters == 10000
    assert stop.q_res_tol == 1e-10
    assert stop.full_res_tol is None


def test_iterate_l1x_halving():
    # 0 in sign(y) + (y - 3) + (y - x) gives y = 1 + x/2 while x stays
    # above the kink, so the first coordinate is exactly 2 + 2^-k.
    p = get_problem("l1x")
    trace = iterate(p.op, p.metric, p.x0)
    assert trace.stop_reason == "tol"
    # stop once 2^-(k+1) <= 1e-10 * (1 + 3), i.e. after 32 residuals
    assert trace.k == 32
    for k in range(min(trace.k, 12)):
        assert trace.iterates[k][0] == pytest.approx(2.0 + 2.0 ** -k, abs=1e-12)
        assert trace.iterates[k][1] == 0.0
    assert trace.final[0] == pytest.approx(2.0, abs=1e-9)
    assert all(name == "RangeUnique" for name in trace.outcomes)
    assert trace.failure_index is None


def test_iterate_l1y_unique_outcomes():
    # kernel coordinate is pinned at the kink, range coordinate halves
    # its distance to 3; the Q-scale is 1 because x0 has no range part
    p = get_problem("l1y")
    trace = iterate(p.op, p.metric, p.x0)
    assert trace.stop_reason == "tol"
    assert trace.k == 35
    assert all(name == "Unique" for name in trace.outcomes)
    for k in range(1, min(trace.k, 12)):
        assert trace.iterates[k][1] == pytest.approx(3.0 - 3.0 * 2.0 ** -k, abs=1e-12)
    assert trace.final == pytest.approx([0.0, 3.0], abs=1e-9)


def test_iterate_eg1_stops_immediately():
    # Q = diag(0, 1) ignores the first coordinate, and the solve keeps
    # the second one, so the very first Q-residual is exactly zero
    p = get_problem("eg1")
    trace = iterate(p.op, p.metric, p.x0)
    assert trace.stop_reason == "tol"
    assert trace.k == 1
    assert trace.q_residuals[0] == 0.0
    assert trace.final == pytest.approx([0.0, 2.0])


def test_iterate_eg2_empty_is_solver_failure():
    p = get_problem("eg2")
    trace = iterate(p.op, p.metric, p.x0)
    assert trace.stop_reason == "solver_failure"
    assert trace.failure_index == 0
    assert trace.k == 0
    assert trace.outcomes == ["Empty"]
    assert trace.final == pytest.approx(p.x0)


def test_iterate_eg3_multivalued_is_solver_failure():
    p = get_problem("eg3")
    trace = iterate(p.op, p.metric, p.x0)
    assert trace.stop_reason == "solver_failure"
    assert trace.failure_index == 0
    assert trace.outcomes == ["MultiValued"]


def test_iterate_max_iters():
    p = get_problem("l1x")
    trace = iterate(p.op, p.metric, p.x0, stop=StopRule(max_iters=3))
    assert trace.stop_reason == "max_iters"
    assert trace.k == 3


def test_iterate_full_residual_stop():
    # the kernel coordinate collapses to zero after one step, so the
    # Euclidean test fires at the same iteration as the seminorm test
    p = get_problem("l1x")
    trace = iterate(p.op, p.metric, p.x0,
                    stop=StopRule(full_res_tol=1e-10))
    assert trace.stop_reason == "tol"
    assert trace.k == 32


def test_iterate_rejects_rank_zero_metric():
    p = get_problem("l1x")
    with pytest.raises(ValidationError):
        iterate(p.op, build_metric(np.zeros((2, 2))), p.x0)


def test_iterate_rejects_dim_mismatch():
    p = get_problem("l1x")
    with pytest.raises(ValidationError):
        iterate(p.op, p.metric, np.array([1.0, 2.0, 3.0]))


def test_reference_fixed_point_l1x():
    p = get_problem("l1x")
    ref = reference_fixed_point(p.op, p.metric, p.x0)
    assert ref == pytest.approx([2.0, 0.0], abs=1e-11)


def test_reference_fixed_point_failure():
    p = get_problem("eg2")
    with pytest.raises(NotAFixedPoint):
        reference_fixed_point(p.op, p.metric, p.x0)


def test_fejer_margins_closed_form():
    # with e_k = 2^-k the margin telescopes to e_k^2 - e_{k+1}^2 - (e_k
    # - e_{k+1})^2 = 4^-k / 2, strictly positive at every step
    p = get_problem("l1x")
    trace = iterate(p.op, p.metric, p.x0)
    margins = fejer_margins(trace, np.array([2.0, 0.0]))
    assert len(margins) == trace.k
    for k in range(min(trace.k, 10)):
        assert margins[k] == pytest.approx(0.5 * 4.0 ** -k, rel=1e-12)
    assert np.all(margins >= -1e-12)


def test_fejer_report_clean():
    p = get_problem("l1x")
    trace = iterate(p.op, p.metric, p.x0)
    rep = fejer_report(trace, np.array([2.0, 0.0]))
    assert rep.check_name == "fejer"
    assert rep.clean
    assert rep.n_samples == trace.k
    assert "stop_reason=tol" in rep.notes


def test_fejer_rejects_non_fixed_reference():
    p = get_problem("l1x")
    trace = iterate(p.op, p.metric, p.x0)
    with pytest.raises(NotAFixedPoint):
        fejer_margins(trace, np.array([5.0, 0.0]))


def test_fejer_rejects_set_valued_reference():
    p = get_problem("eg2")
    trace = iterate(p.op, p.metric, p.x0)
    with pytest.raises(NotAFixedPoint, match="single-valued"):
        fejer_margins(trace, np.array([1.0, 0.0]))


def test_summability_slack():
    # residual squares sum to 1/4 + 1/16 + ... = 1/3, against the
    # initial budget |3 - 2|^2 = 1
    p = get_problem("l1x")
    trace = iterate(p.op, p.metric, p.x0)
    rep = summability_report(trace, np.array([2.0, 0.0]))
    assert rep.check_name == "summability"
    assert rep.clean
    assert "sum=" in rep.notes and "budget=" in rep.notes
    assert rep.worst_margin == pytest.approx(2.0 / 3.0, abs=1e-9)


def test_summability_default_reference():
    p = get_problem("l1x")
    trace = iterate(p.op, p.metric, p.x0)
    rep = summability_report(trace)
    assert rep.clean
    assert "reference taken from the final iterate" in rep.notes
    assert rep.worst_margin == pytest.approx(2.0 / 3.0, abs=1e-6)


def test_fixzer_clean_on_l1x():
    p = get_problem("l1x")
    rep = fix_equals_projected_zeros(p.op, p.metric, p.known_zeros, p.fix_probes)
    assert rep.check_name == "fixzer"
    assert rep.clean
    assert f"{len(p.known_zeros)} zeros checked" in rep.notes


def test_fixzer_rejects_bogus_zero():
    p = get_problem("l1x")
    with pytest.raises(NotAZero):
        fix_equals_projected_zeros(p.op, p.metric, [(1.0, 0.0)], p.fix_probes)


def test_fixzer_flags_eg2_zeros():
    # both zeros project to probes whose solve is set-valued, so the
    # projected-zero inclusion cannot be certified for either of them
    p = get_problem("eg2")
    rep = fix_equals_projected_zeros(p.op, p.metric, p.known_zeros, p.fix_probes)
    assert not rep.clean
    assert rep.n_violations == 2


def test_lipschitz_probe_counter_block():
    # T x = (x1 / 2, 5 x1 / 2): the kernel image moves 2.5 times the
    # range input on every pair, so the sampled maximum is exact
    p = get_problem("counter-block")

    def sampler(rng):
        return rng.uniform(-3.0, 3.0, size=2), rng.uniform(-3.0, 3.0, size=2)

    xi_hat, ratios = lipschitz_probe(p.op, p.metric, sampler, n_pairs=200)
    assert len(ratios) > 100
    assert xi_hat == pytest.approx(2.5, rel=1e-12)


def test_lipschitz_probe_uncoupled_is_zero():
    p = get_problem("l1x")

    def sampler(rng):
        return rng.uniform(-3.0, 3.0, size=2), rng.uniform(-3.0, 3.0, size=2)

    xi_hat, _ = lipschitz_probe(p.op, p.metric, sampler, n_pairs=200)
    assert xi_hat == 0.0


def test_trace_range_parts_live_in_range():
    p = get_problem("l1y")
    trace = iterate(p.op, p.metric, p.x0)
    for xr in trace.range_parts:
        assert xr == pytest.approx(project_range(p.metric, xr))
