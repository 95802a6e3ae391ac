"""Sampled and enumerated verification of the structural claims: graph
monotonicity restricted to the metric range, firm nonexpansiveness of the
iteration map in the seminorm, range coverage (both by closed-form interval
analysis and by direct solves), the interior-style range condition, solution
multiplicity, and the decomposition identities.

Graph points come from constructive sections wherever the operator has a
recognizable block structure, so membership is exact by construction and
restricted sampling never relies on rejection alone.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SamplerStarved, UnknownCheck, UnsupportedShape
from .iteration import (
    StopRule,
    fejer_report,
    fix_equals_projected_zeros,
    iterate,
    lipschitz_probe,
    reference_fixed_point,
)
from .metric import PsdMetric, project_kernel, project_range, q_inner, q_seminorm
from .operators import BlockOp, Graph2DOp, SetValuedOp, SubdiffOp, inverse_graph_eval
from .proxfn import eval_prox, soft_threshold
from .realsets import BoxSet, EmptySet, RangeDescription, FULL_LINE, interval_point
from .report import CheckReport
from .resolvent import (
    Empty,
    MultiValued,
    RangeUnique,
    Unique,
    check_moreau_identity,
    eval_equality_chain,
    solve_resolvent,
    _as_metric,
)

__all__ = [
    "GraphSampler",
    "CheckReport",
    "check_restricted_monotonicity",
    "check_firm_nonexpansive",
    "check_minty_range",
    "check_full_domain",
    "check_sri_condition",
    "check_single_valuedness",
    "check_equality_and_moreau",
    "metric_range_description",
    "default_axis_probes",
    "CHECK_NAMES",
    "run_check",
]


# ---------------------------------------------------------------------------
# Graph sampling


def _coord_subdiff_sample(desc, t: float, rng) -> float:
    kind = desc[0]
    if kind == "abs":
        w = desc[1]
        return w if t > 0.0 else (-w if t < 0.0 else rng.uniform(-w, w))
    if kind == "affine":
        return desc[1] * t + desc[2]
    if kind == "linear":
        return desc[1]
    if kind == "zero":
        return 0.0
    w, s, m = desc[1], desc[2], desc[3]
    base = s * (t - m)
    return base + (w if t > 0.0 else (-w if t < 0.0 else rng.uniform(-w, w)))


def _coord_zero_point(desc, fallback: float) -> float:
    """A point whose coordinate subdifferential contains zero."""
    kind = desc[0]
    if kind == "abs":
        return 0.0 if desc[1] > 0.0 else fallback
    if kind == "affine":
        p, c = desc[1], desc[2]
        if p > 0.0:
            return -c / p
        if c == 0.0:
            return fallback
        raise SamplerStarved(f"coordinate value is the constant {c}, never zero")
    if kind == "linear":
        if desc[1] == 0.0:
            return fallback
        raise SamplerStarved(f"coordinate value is the constant {desc[1]}, never zero")
    if kind == "zero":
        return fallback
    w, s, m = desc[1], desc[2], desc[3]
    return soft_threshold(m, w / s)


class GraphSampler:
    """Produces points (x, u) with u in A(x), exactly by construction.

    section 'auto' picks the constructive section matching the operator's
    structure; 'generic' always evaluates the operator at a random point.
    sample_restricted additionally guarantees u lies in ran Q, using the
    section when it already does and rejection otherwise.
    """

    def __init__(self, op: SetValuedOp, Q, section: str = "auto", scale: float = 2.0):
        self.op = op
        self.Q = _as_metric(Q)
        self.scale = scale
        if section == "auto":
            if isinstance(op, BlockOp) and op.structure:
                section = op.structure[0] if op.structure[0] in ("drs", "alm", "counter") else "generic"
            elif isinstance(op, Graph2DOp):
                section = "graph"
            elif self._separable_descriptors() is not None:
                section = "separable"
            else:
                section = "generic"
        self.section = section

    def _separable_descriptors(self):
        """Coordinatewise descriptors when the operator decouples and the
        metric is diagonal; None otherwise."""
        d = np.diag(self.Q.matrix)
        if np.max(np.abs(self.Q.matrix - np.diag(d))) > 0.0:
            return None
        if isinstance(self.op, SubdiffOp):
            descs = self.op.fn.separable_coords()
        elif isinstance(self.op, BlockOp) and not self.op.offdiag:
            descs = []
            for blk in self.op.diag:
                if not isinstance(blk, SubdiffOp):
                    return None
                part = blk.fn.separable_coords()
                if part is None:
                    return None
                descs.extend(part)
        else:
            return None
        return None if descs is None else list(zip(descs, d))

    # -- unrestricted membership sampling

    def sample(self, rng):
        if self.section == "graph":
            return self._sample_graph(rng)
        return self._sample_generic(rng)

    def _sample_generic(self, rng):
        x = self.scale * rng.standard_normal(self.op.dim)
        if isinstance(self.op, SubdiffOp) and rng.uniform() < 0.25:
            x[rng.integers(self.op.dim)] = 0.0  # land on a kink exactly
        return x, self.op.sample_value(x, rng)

    def _sample_graph(self, rng):
        op: Graph2DOp = self.op
        if op.family == "abs":
            x = self.scale * rng.standard_normal(2)
            if rng.uniform() < 0.25:
                x[0] = 0.0
            return x, op.sample_value(x, rng)
        if rng.uniform() < 0.4:  # on the switching curve, value in the rectangle
            t = math.exp(rng.uniform(-2.0, 2.0))
            x = np.array([t, math.log(t)])
        else:
            x = self.scale * rng.standard_normal(2)
        return x, op.sample_value(x, rng)

    # -- restricted sampling: u must sit in ran Q

    def sample_restricted(self, rng):
        make = getattr(self, f"_restricted_{self.section}", None)
        if make is not None:
            return make(rng)
        return self._restricted_reject(rng)

    def _restricted_drs(self, rng):
        _, f, g, tau = self.op.structure
        n = self.op.block_dims[0]
        x1 = self.scale * rng.standard_normal(n)
        s_g = g.scale(tau).subdiff_sample(x1, rng)
        x2 = eval_prox(f, tau, x1 - s_g)
        x3 = s_g + x2
        x = np.concatenate([x1, x2, x3])
        u = np.concatenate([np.zeros(n), np.zeros(n), x1 - x2])
        return x, u

    def _restricted_alm(self, rng):
        _, F, b, tau = self.op.structure
        n = self.op.block_dims[0]
        x1 = self.scale * rng.standard_normal(n)
        x2 = F.subdiff_sample(x1, rng)
        x = np.concatenate([x1, x2])
        u = np.concatenate([np.zeros(n), x1 - b])
        return x, u

    def _restricted_counter(self, rng):
        m = self.op.structure[1]
        t = self.scale * rng.standard_normal(1)
        return np.array([t[0], m * t[0]]), np.array([t[0], 0.0])

    def _restricted_graph(self, rng):
        op: Graph2DOp = self.op
        d = np.diag(self.Q.matrix)
        if op.family == "abs":
            if d[0] > 0.0:
                return self._sample_graph(rng)  # values (s, 0) already lie in ran Q
            x = np.array([0.0, self.scale * rng.standard_normal()])
            return x, np.zeros(2)
        t = math.exp(rng.uniform(-2.0, 2.0))
        if d[0] > 0.0:
            # curve rectangle at height 0, or region II with value (0, 0)
            if rng.uniform() < 0.5:
                return np.array([t, math.log(t)]), np.array([rng.uniform(-1.0, 0.0), 0.0])
            return np.array([t, math.log(t) - rng.uniform(0.1, 2.0)]), np.zeros(2)
        if rng.uniform() < 0.5:
            return np.array([t, math.log(t)]), np.array([0.0, rng.uniform(0.0, t)])
        return np.array([t, math.log(t) - rng.uniform(0.1, 2.0)]), np.zeros(2)

    def _restricted_separable(self, rng):
        pairs = self._separable_descriptors()
        x = np.empty(len(pairs))
        u = np.empty(len(pairs))
        for i, (desc, q) in enumerate(pairs):
            kind = desc[0]
            if q > 0.0:
                t = self.scale * rng.standard_normal()
                if kind in ("abs", "absquad") and rng.uniform() < 0.25:
                    t = 0.0
                x[i] = t
                u[i] = _coord_subdiff_sample(desc, t, rng)
                continue
            # kernel coordinate: the value must vanish, so x sits at a
            # zero of the coordinate subdifferential
            x[i] = _coord_zero_point(desc, self.scale * rng.standard_normal())
            u[i] = 0.0
        return x, u

    def _restricted_reject(self, rng, budget: int = 4000):
        for _ in range(budget):
            x, u = self.sample(rng)
            if float(np.linalg.norm(project_kernel(self.Q, u))) <= 1e-10 * (1.0 + float(np.linalg.norm(u))):
                return x, u
        raise SamplerStarved(f"no range-restricted graph point in {budget} draws")


# ---------------------------------------------------------------------------
# Pairwise sampled checks


def check_restricted_monotonicity(op: SetValuedOp, Q, n_pairs: int = 2000,
                                  seed: int = 0, tol: float = 1e-10,
                                  restricted: bool = True,
                                  section: str = "auto") -> CheckReport:
    """<u1 - u2, x1 - x2> >= -tol over graph pairs; restricted draws only
    pairs whose values lie in ran Q."""
    Q = _as_metric(Q)
    rng = np.random.default_rng(seed)
    sampler = GraphSampler(op, Q, section=section)
    draw = sampler.sample_restricted if restricted else sampler.sample
    worst = math.inf
    witnesses = []
    n_viol = 0
    for _ in range(n_pairs):
        x1, u1 = draw(rng)
        x2, u2 = draw(rng)
        m = float((u1 - u2) @ (x1 - x2))
        worst = min(worst, m)
        if m < -tol:
            n_viol += 1
            if len(witnesses) < 32:
                witnesses.append({"x1": x1.tolist(), "u1": u1.tolist(),
                                  "x2": x2.tolist(), "u2": u2.tolist(), "margin": m})
    return CheckReport(
        check_name="monotone" if restricted else "monotone-unrestricted",
        n_samples=n_pairs, n_violations=n_viol,
        worst_margin=0.0 if math.isinf(worst) else worst,
        seed=seed, witnesses=tuple(witnesses),
        notes=f"restricted={restricted}, section={sampler.section}",
    )


def check_firm_nonexpansive(op: SetValuedOp, Q, n_pairs: int = 500,
                            seed: int = 0, tol: float = 1e-9,
                            scale: float = 2.0,
                            strategy: str = "auto") -> CheckReport:
    """<T x1 - T x2, x1 - x2>_Q >= |T x1 - T x2|_Q^2 - tol over input pairs."""
    Q = _as_metric(Q)
    rng = np.random.default_rng(seed)
    worst = math.inf
    witnesses = []
    n_viol = n_done = n_skipped = 0
    for _ in range(n_pairs):
        x1 = scale * rng.standard_normal(op.dim)
        x2 = scale * rng.standard_normal(op.dim)
        o1 = solve_resolvent(op, Q, x1, strategy=strategy)
        o2 = solve_resolvent(op, Q, x2, strategy=strategy)
        if not (isinstance(o1, (Unique, RangeUnique)) and isinstance(o2, (Unique, RangeUnique))):
            n_skipped += 1
            continue
        dy = o1.select() - o2.select()
        m = q_inner(Q, dy, x1 - x2) - q_seminorm(Q, dy) ** 2
        worst = min(worst, m)
        n_done += 1
        if m < -tol:
            n_viol += 1
            if len(witnesses) < 32:
                witnesses.append({"x1": x1.tolist(), "x2": x2.tolist(), "margin": m})
    return CheckReport(
        check_name="fne", n_samples=n_done, n_violations=n_viol,
        worst_margin=0.0 if math.isinf(worst) else worst,
        seed=seed, witnesses=tuple(witnesses),
        notes=f"{n_skipped} pairs skipped (set-valued or empty resolvent)",
    )


# ---------------------------------------------------------------------------
# Range coverage


def default_axis_probes(axis: int, dim: int = 2, lo: float = -10.0,
                        hi: float = 10.0, n: int = 401):
    """Probe points w e_axis; the default grid lands on -1 exactly."""
    out = []
    for w in np.linspace(lo, hi, n):
        p = np.zeros(dim)
        p[axis] = w
        out.append(p)
    return out


def _range_axis(Q: PsdMetric) -> int:
    d = np.diag(Q.matrix)
    if np.max(np.abs(Q.matrix - np.diag(d))) > 0.0 or int(np.sum(d > 0.0)) != 1:
        raise UnsupportedShape("probe grids need a diagonal metric of rank one")
    return int(np.argmax(d > 0.0))


def _minty_covered(family: str, axis: int, w: float) -> bool:
    # Interval analysis of the restricted inverse along the range axis.
    # abs family: axis 0 needs w in y + d|y| whose range is the whole line;
    # axis 1 needs (0, w - y2) to meet d|y1| x {0}, solved by y = (0, w).
    # exp family: axis 1 region II gives (0, 0) at any height; axis 0 curve
    # points contribute w in t + [-1, 0] over t > 0, a cover of (-1, inf)
    # and nothing below it.
    if family == "abs":
        return True
    if axis == 0:
        return w > -1.0
    return True


def check_minty_range(op: SetValuedOp, Q, probes=None, seed: int = 0,
                      n: int = 100) -> CheckReport:
    """Coverage ran(Q + A) >= ran Q at the probes, decided by closed-form
    interval analysis for the planar tables and by direct solves otherwise."""
    Q = _as_metric(Q)
    witnesses = []
    if isinstance(op, Graph2DOp):
        axis = _range_axis(Q)
        if probes is None:
            probes = default_axis_probes(axis)
        n_viol = 0
        for p in probes:
            w = float(p[axis])
            if not _minty_covered(op.family, axis, w):
                n_viol += 1
                if len(witnesses) < 32:
                    witnesses.append({"probe": list(map(float, p))})
        return CheckReport(
            check_name="minty", n_samples=len(probes), n_violations=n_viol,
            worst_margin=0.0, seed=seed,
            witnesses=tuple(witnesses),
            notes=f"closed-form coverage, axis {axis}",
        )
    # fallback: a probe is covered when the solve at it is nonempty
    rng = np.random.default_rng(seed)
    if probes is None:
        probes = [project_range(Q, 3.0 * rng.standard_normal(op.dim)) for _ in range(n)]
    n_viol = 0
    for p in probes:
        out = solve_resolvent(op, Q, np.asarray(p, dtype=float))
        if isinstance(out, Empty):
            n_viol += 1
            if len(witnesses) < 32:
                witnesses.append({"probe": list(map(float, p))})
    return CheckReport(
        check_name="minty", n_samples=len(probes), n_violations=n_viol,
        worst_margin=0.0, seed=seed, witnesses=tuple(witnesses),
        notes="solve-based coverage surrogate (no interval table for this operator)",
    )


def check_full_domain(op: SetValuedOp, Q, probes=None, seed: int = 0,
                      n: int = 100, strategy: str = "auto") -> CheckReport:
    """dom T covers the probes: the solve at each probe must be nonempty."""
    Q = _as_metric(Q)
    if probes is None:
        if isinstance(op, Graph2DOp):
            probes = default_axis_probes(_range_axis(Q))
        else:
            rng = np.random.default_rng(seed)
            probes = [3.0 * rng.standard_normal(op.dim) for _ in range(n)]
    witnesses = []
    n_viol = 0
    for p in probes:
        out = solve_resolvent(op, Q, np.asarray(p, dtype=float), strategy=strategy)
        if isinstance(out, Empty):
            n_viol += 1
            if len(witnesses) < 32:
                witnesses.append({"probe": list(map(float, p))})
    return CheckReport(
        check_name="fulldomain", n_samples=len(probes), n_violations=n_viol,
        worst_margin=0.0, seed=seed, witnesses=tuple(witnesses),
    )


def metric_range_description(Q: PsdMetric) -> RangeDescription:
    d = np.diag(Q.matrix)
    if np.max(np.abs(Q.matrix - np.diag(d))) > 0.0:
        raise UnsupportedShape("range description needs a diagonal metric")
    return RangeDescription(tuple(FULL_LINE if q > 0.0 else interval_point(0.0)
                                  for q in d))


def check_sri_condition(op: SetValuedOp, Q) -> CheckReport:
    """0 in sri(ran Q - ran A), coordinatewise on the interval descriptions."""
    Q = _as_metric(Q)
    if not isinstance(op, Graph2DOp):
        raise UnsupportedShape("only the planar tables carry range descriptions")
    diff = metric_range_description(Q).minkowski_sub(op.range_description())
    holds = diff.sri_contains_zero()
    ivs = ", ".join(f"[{iv.lo:g}, {iv.hi:g}]" for iv in diff.intervals)
    return CheckReport(
        check_name="sri", n_samples=1, n_violations=0 if holds else 1,
        worst_margin=0.0,
        notes=f"ran Q - ran A = {ivs}; condition {'holds' if holds else 'fails'}",
    )


# ---------------------------------------------------------------------------
# Multiplicity and identities


def check_single_valuedness(op: SetValuedOp, Q, probes=None,
                            strategy: str = "auto") -> CheckReport:
    """Classify the solution set at each probe; resolvents that come back
    empty count as violations. For planar tables the preimage of Q x is
    classified alongside, since a single-valued solve can coexist with a
    multivalued inverse."""
    Q = _as_metric(Q)
    if probes is None:
        if isinstance(op, Graph2DOp):
            probes = default_axis_probes(_range_axis(Q), n=21)
        else:
            probes = [np.zeros(op.dim)]
    tally = {"unique": 0, "multi": 0, "empty": 0, "kernel_unknown": 0}
    inv_tally = {"empty": 0, "point": 0, "multi": 0}
    witnesses = []
    for p in probes:
        p = np.asarray(p, dtype=float)
        out = solve_resolvent(op, Q, p, strategy=strategy)
        if isinstance(out, Unique):
            tally["unique"] += 1
        elif isinstance(out, RangeUnique):
            if isinstance(out.kernel_set, BoxSet):
                degenerate = all(iv.lo == iv.hi for iv in out.kernel_set.intervals)
                tally["unique" if degenerate else "multi"] += 1
            else:
                tally["kernel_unknown"] += 1
        elif isinstance(out, MultiValued):
            tally["multi"] += 1
        else:
            tally["empty"] += 1
            if len(witnesses) < 32:
                witnesses.append({"probe": p.tolist(), "issue": "empty"})
        if isinstance(op, Graph2DOp):
            inv = inverse_graph_eval(op, Q.matrix @ p)
            if isinstance(inv, EmptySet):
                inv_tally["empty"] += 1
            elif isinstance(inv, BoxSet) and all(iv.lo == iv.hi for iv in inv.intervals):
                inv_tally["point"] += 1
            else:
                inv_tally["multi"] += 1
    notes = f"solutions {tally}"
    if isinstance(op, Graph2DOp):
        notes += f"; preimages of Qx {inv_tally}"
    return CheckReport(
        check_name="single", n_samples=len(probes), n_violations=tally["empty"],
        worst_margin=0.0, witnesses=tuple(witnesses), notes=notes,
    )


def check_equality_and_moreau(op: SetValuedOp, Q, n: int = 100, seed: int = 0,
                              tol: float = 1e-9, which: str = "both") -> CheckReport:
    """Agreement of the residual routes ('chain'), the decomposition identity
    ('moreau'), or both, over seeded inputs with kink mixing."""
    Q = _as_metric(Q)
    rng = np.random.default_rng(seed)
    worst = math.inf
    witnesses = []
    n_viol = 0
    for _ in range(n):
        x = 3.0 * rng.standard_normal(op.dim)
        if rng.uniform() < 0.2:
            x[rng.integers(op.dim)] = 0.0
        bad = None
        spread = resid = 0.0
        if which in ("chain", "both"):
            chain = eval_equality_chain(op, Q, x)
            vals = list(chain.values())
            spread = max(float(np.max(np.abs(a - b))) for a in vals for b in vals)
            if spread > tol:
                bad = {"x": x.tolist(), "chain_spread": spread}
        if which in ("moreau", "both"):
            resid = check_moreau_identity(op, Q, x)
            if resid > tol:
                bad = {"x": x.tolist(), "moreau_residual": resid}
        worst = min(worst, tol - max(spread, resid))
        if bad is not None:
            n_viol += 1
            if len(witnesses) < 32:
                witnesses.append(bad)
    return CheckReport(
        check_name=which if which != "both" else "chain+moreau",
        n_samples=n, n_violations=n_viol,
        worst_margin=0.0 if math.isinf(worst) else worst,
        seed=seed, witnesses=tuple(witnesses),
    )


# ---------------------------------------------------------------------------
# Named check registry for the command line


CHECK_NAMES = ("monotone", "fne", "minty", "fulldomain", "sri", "single",
               "moreau", "chain", "fejer", "lipschitz", "fixzer")


def _facet(problem, table_checks: bool):
    """Planar-table checks prefer the tabulated facet when the problem has one."""
    if table_checks and getattr(problem, "graph_op", None) is not None:
        return problem.graph_op
    return problem.op


def run_check(problem, name: str, n: int | None = None, seed: int = 0) -> CheckReport:
    Q = problem.metric
    if name == "monotone":
        return check_restricted_monotonicity(problem.op, Q, n_pairs=n or 2000, seed=seed)
    if name == "fne":
        return check_firm_nonexpansive(problem.op, Q, n_pairs=n or 500, seed=seed)
    if name == "minty":
        return check_minty_range(_facet(problem, True), Q, seed=seed, n=n or 100)
    if name == "fulldomain":
        return check_full_domain(_facet(problem, True), Q, seed=seed, n=n or 100)
    if name == "sri":
        return check_sri_condition(_facet(problem, True), Q)
    if name == "single":
        probes = getattr(problem, "single_probes", None)
        return check_single_valuedness(_facet(problem, True), Q, probes=probes)
    if name == "moreau":
        return check_equality_and_moreau(_facet(problem, True), Q, n=n or 100,
                                         seed=seed, which="moreau")
    if name == "chain":
        return check_equality_and_moreau(_facet(problem, True), Q, n=n or 100,
                                         seed=seed, which="chain")
    if name == "fejer":
        trace = iterate(problem.op, Q, problem.x0,
                        StopRule(max_iters=n or 10000))
        ref = getattr(problem, "known_fixed_point", None)
        if ref is None:
            ref = reference_fixed_point(problem.op, Q, problem.x0)
        return fejer_report(trace, ref)
    if name == "lipschitz":
        rng_dim = problem.op.dim

        def sampler(rng):
            return (3.0 * rng.standard_normal(rng_dim),
                    3.0 * rng.standard_normal(rng_dim))

        xi_hat, ratios = lipschitz_probe(problem.op, Q, sampler,
                                         n_pairs=n or 1000, seed=seed)
        bound = getattr(problem, "xi_bound", None)
        n_viol = 0
        if bound is not None:
            n_viol = int(np.sum(np.asarray(ratios) > bound + 1e-9))
        return CheckReport(
            check_name="lipschitz", n_samples=len(ratios), n_violations=n_viol,
            worst_margin=(bound - xi_hat) if bound is not None else 0.0,
            seed=seed,
            notes=f"xi_hat={xi_hat:.6g}" + (f", bound={bound:g}" if bound is not None else ""),
        )
    if name == "fixzer":
        probes = list(getattr(problem, "fix_probes", ()) or ())
        if not probes:
            probes = [problem.x0]
        return fix_equals_projected_zeros(problem.op, Q, problem.known_zeros, probes)
    raise UnknownCheck(f"unknown check {name!r}; choose from {', '.join(CHECK_NAMES)}")
