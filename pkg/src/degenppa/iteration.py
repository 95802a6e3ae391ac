"""The preconditioned proximal point loop x_{k+1} in T(x_k) and the
certificates attached to its trace: Fejer monotonicity of the range parts,
residual summability, the fixed-point/zero correspondence, and a sampled
bound on the kernel part's Lipschitz modulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotAFixedPoint, NotAZero, ValidationError
from .metric import PsdMetric, project_kernel, project_range, q_seminorm
from .operators import SetValuedOp
from .report import CheckReport
from .resolvent import Empty, MultiValued, RangeUnique, Unique, solve_resolvent, _as_metric

__all__ = [
    "StopRule",
    "IterationTrace",
    "iterate",
    "reference_fixed_point",
    "fejer_report",
    "summability_report",
    "fix_equals_projected_zeros",
    "lipschitz_probe",
]


@dataclass(frozen=True)
class StopRule:
    """Stop on max_iters, or once the Q-seminorm step drops below
    q_res_tol * (1 + |x_r^0|_Q); full_res_tol adds the same test on the
    plain Euclidean step when set."""

    max_iters: int = 10000
    q_res_tol: float = 1e-10
    full_res_tol: float | None = None


@dataclass
class IterationTrace:
    iterates: list
    range_parts: list
    q_residuals: list
    outcomes: list
    stop_reason: str  # 'tol' | 'max_iters' | 'solver_failure'
    failure_index: int | None
    op: SetValuedOp
    metric: PsdMetric

    @property
    def k(self) -> int:
        return len(self.q_residuals)

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]


def iterate(op: SetValuedOp, Q, x0, stop: StopRule | None = None,
            strategy: str = "auto") -> IterationTrace:
    """Run x_{k+1} = T(x_k); a set-valued or empty resolvent step stops the
    trace with stop_reason 'solver_failure' at that index."""
    Q = _as_metric(Q)
    if Q.rank == 0:
        raise ValidationError("iteration needs a metric of positive rank")
    stop = stop or StopRule()
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if x.shape != (op.dim,):
        raise ValidationError(f"x0 must have dim {op.dim}")
    iterates = [x.copy()]
    range_parts = [project_range(Q, x)]
    q_residuals: list = []
    outcomes: list = []
    scale_q = 1.0 + q_seminorm(Q, x)
    scale_full = 1.0 + float(np.linalg.norm(x))
    stop_reason = "max_iters"
    failure_index = None
    for k in range(stop.max_iters):
        out = solve_resolvent(op, Q, x, strategy=strategy)
        if isinstance(out, (Empty, MultiValued)):
            stop_reason = "solver_failure"
            failure_index = k
            outcomes.append(type(out).__name__)
            break
        y = out.select()
        outcomes.append(type(out).__name__)
        qres = q_seminorm(Q, x - y)
        q_residuals.append(qres)
        iterates.append(y)
        range_parts.append(out.range_part(Q))
        done = qres <= stop.q_res_tol * scale_q
        if done and stop.full_res_tol is not None:
            done = float(np.linalg.norm(x - y)) <= stop.full_res_tol * scale_full
        x = y
        if done:
            stop_reason = "tol"
            break
    return IterationTrace(iterates, range_parts, q_residuals, outcomes,
                          stop_reason, failure_index, op, Q)


def reference_fixed_point(op: SetValuedOp, Q, x0, budget: int = 100000,
                          tol: float = 1e-13, strategy: str = "auto") -> np.ndarray:
    """A high-accuracy fixed point for use as a Fejer reference."""
    tr = iterate(op, Q, x0, StopRule(max_iters=budget, q_res_tol=tol), strategy)
    if tr.stop_reason != "tol":
        raise NotAFixedPoint(f"reference run stopped with {tr.stop_reason}")
    return tr.final


def _verify_reference(op: SetValuedOp, Q: PsdMetric, ref, tol: float = 1e-8) -> np.ndarray:
    ref = np.atleast_1d(np.asarray(ref, dtype=float))
    out = solve_resolvent(op, Q, ref)
    if isinstance(out, (Empty, MultiValued)):
        raise NotAFixedPoint("reference point has no single-valued resolvent")
    ref_r = project_range(Q, ref)
    qres = q_seminorm(Q, ref - out.select())
    if qres > tol * (1.0 + float(np.linalg.norm(ref_r))):
        raise NotAFixedPoint(f"reference residual {qres:.3e} too large")
    return ref_r


def fejer_margins(trace: IterationTrace, ref) -> np.ndarray:
    """m_k = |x_r^k - ref|_Q^2 - |x_r^{k+1} - ref|_Q^2 - |x_r^k - x_r^{k+1}|_Q^2."""
    Q = trace.metric
    ref_r = _verify_reference(trace.op, Q, ref)
    margins = []
    for k in range(trace.k):
        a = q_seminorm(Q, trace.range_parts[k] - ref_r) ** 2
        b = q_seminorm(Q, trace.range_parts[k + 1] - ref_r) ** 2
        s = trace.q_residuals[k] ** 2
        margins.append(a - b - s)
    return np.array(margins)


def fejer_report(trace: IterationTrace, ref, tol: float = 1e-10) -> CheckReport:
    """Quasi-contraction margins along the trace against a verified reference."""
    margins = fejer_margins(trace, ref)
    bad = [int(k) for k in np.nonzero(margins < -tol)[0]]
    worst = float(np.min(margins)) if margins.size else 0.0
    return CheckReport(
        check_name="fejer",
        n_samples=int(margins.size),
        n_violations=len(bad),
        worst_margin=worst,
        witnesses=tuple({"k": k, "margin": float(margins[k])} for k in bad[:32]),
        notes=f"stop_reason={trace.stop_reason}",
    )


def summability_report(trace: IterationTrace, ref_point=None,
                       tol: float = 1e-8) -> CheckReport:
    """sum of squared Q-residuals against the initial squared Q-distance."""
    Q = trace.metric
    notes = f"stop_reason={trace.stop_reason}"
    if ref_point is None:
        ref_r = trace.range_parts[-1]
        notes += "; reference taken from the final iterate"
    else:
        ref_r = _verify_reference(trace.op, Q, ref_point)
    total = float(np.sum(np.asarray(trace.q_residuals) ** 2))
    budget = q_seminorm(Q, trace.range_parts[0] - ref_r) ** 2
    slack = budget - total
    return CheckReport(
        check_name="summability",
        n_samples=trace.k,
        n_violations=0 if slack >= -tol else 1,
        worst_margin=slack,
        notes=notes + f"; sum={total:.6g} budget={budget:.6g}",
    )


def fix_equals_projected_zeros(op: SetValuedOp, Q, known_zeros, probe_grid,
                               zero_tol: float = 1e-8, fix_tol: float = 1e-6,
                               strategy: str = "auto") -> CheckReport:
    """Both inclusions between Fix(T restricted to ran Q) and P(zer A).

    Claimed zeros must contain 0 in their operator value (NotAZero otherwise)
    and project onto fixed points; probes that are fixed must map to zeros.
    """
    Q = _as_metric(Q)
    known_zeros = [np.atleast_1d(np.asarray(z, dtype=float)) for z in known_zeros]
    witnesses = []
    n_viol = 0
    worst = math.inf
    n = 0
    for z in known_zeros:
        dz = op.value_dist(z, np.zeros_like(z))
        if dz > zero_tol * (1.0 + float(np.linalg.norm(z))):
            raise NotAZero(f"claimed zero {z} has residual {dz:.3e}")
        zp = project_range(Q, z)
        out = solve_resolvent(op, Q, zp, strategy=strategy)
        if isinstance(out, (Empty,)):
            n_viol += 1
            witnesses.append({"zero": z.tolist(), "issue": "empty resolvent"})
            n += 1
            continue
        try:
            yr = out.range_part(Q)
            gap = float(np.linalg.norm(yr - zp))
        except ValidationError:
            gap = math.inf
        worst = min(worst, zero_tol * (1.0 + float(np.linalg.norm(zp))) - gap)
        if gap > zero_tol * (1.0 + float(np.linalg.norm(zp))):
            n_viol += 1
            witnesses.append({"zero": z.tolist(), "gap": gap})
        n += 1
    n_fixed = 0
    for x in probe_grid:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = solve_resolvent(op, Q, x, strategy=strategy)
        if isinstance(out, (Empty, MultiValued)):
            continue
        y = out.select()
        if q_seminorm(Q, x - y) > zero_tol * (1.0 + q_seminorm(Q, x)):
            continue  # probe is not a fixed point; nothing to test
        n_fixed += 1
        dz = op.value_dist(y, np.zeros_like(y))
        lim = fix_tol * (1.0 + float(np.linalg.norm(y)))
        worst = min(worst, lim - dz)
        if dz > lim:
            n_viol += 1
            witnesses.append({"probe": x.tolist(), "image_residual": dz})
        n += 1
    return CheckReport(
        check_name="fixzer",
        n_samples=n,
        n_violations=n_viol,
        worst_margin=0.0 if math.isinf(worst) else worst,
        witnesses=tuple(witnesses[:32]),
        notes=f"{len(known_zeros)} zeros checked, {n_fixed} fixed probes",
    )


def lipschitz_probe(op: SetValuedOp, Q, sampler, n_pairs: int = 1000,
                    seed: int = 0, strategy: str = "auto"):
    """Sampled kernel-vs-range Lipschitz ratios of the iteration map.

    Each ratio is |P_ker(T x1 - T x2)| / |P_ran(x1 - x2)|; returns the
    maximum and the full list. Pairs with matching range parts are skipped.
    """
    Q = _as_metric(Q)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(n_pairs):
        x1, x2 = sampler(rng)
        den = float(np.linalg.norm(project_range(Q, np.asarray(x1) - np.asarray(x2))))
        if den <= 1e-14:
            continue
        o1 = solve_resolvent(op, Q, x1, strategy=strategy)
        o2 = solve_resolvent(op, Q, x2, strategy=strategy)
        if not (isinstance(o1, (Unique, RangeUnique)) and isinstance(o2, (Unique, RangeUnique))):
            continue
        num = float(np.linalg.norm(project_kernel(Q, o1.select() - o2.select())))
        ratios.append(num / den)
    xi_hat = max(ratios) if ratios else 0.0
    return xi_hat, ratios
