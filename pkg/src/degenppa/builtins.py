"""Named example problems: planar tables with rank-one metrics, scalar
l1 models in both metric orientations, splitting embeddings at desk scale,
and a non-monotone coupled block whose iteration map is still firmly
nonexpansive in the seminorm.

Each entry carries whatever frozen reference data the checks can use:
known zeros, a verified fixed point, a kernel-shift Lipschitz bound, and
probe grids. The TOML text attached to each problem is a config that
rebuilds the same iteration through the file route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownExample
from .iteration import StopRule
from .metric import PsdMetric, build_metric
from .operators import (
    BlockOp,
    Graph2DOp,
    SetValuedOp,
    SubdiffOp,
    build_alm_embedding,
    build_drs_embedding,
)
from .proxfn import AbsQuadratic, AbsValue, AffineShiftSquare, Zero
from .splitting import admm_to_drs

__all__ = ["ProblemSpec", "PROBLEM_NAMES", "get_problem"]


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    description: str
    op: SetValuedOp
    metric: PsdMetric
    x0: np.ndarray
    graph_op: Graph2DOp | None = None
    known_zeros: tuple = ()
    known_fixed_point: np.ndarray | None = None
    xi_bound: float | None = None
    single_probes: tuple | None = None
    fix_probes: tuple = ()
    splitting: dict | None = None
    stop: StopRule | None = None
    toml_text: str = ""


def _eg1() -> ProblemSpec:
    op = Graph2DOp("EG1")
    return ProblemSpec(
        name="eg1",
        description="planar abs table, metric on the second coordinate; "
                    "the solve pins the kink coordinate and every point of "
                    "ran Q is fixed",
        op=op, graph_op=op,
        metric=build_metric(np.diag([0.0, 1.0])),
        x0=np.array([1.5, 2.0]),
        known_zeros=((0.0, 2.0), (0.0, 0.0), (0.0, -1.0)),
        known_fixed_point=np.array([0.0, 2.0]),
        xi_bound=0.0,
        fix_probes=((0.0, 2.0), (0.0, -1.0), (1.5, 2.0), (0.3, -4.0)),
        toml_text="""\
[problem]
kind = "graph2d"
name = "EG1"

[metric]
diag = [0.0, 1.0]

[start]
x0 = [1.5, 2.0]
""",
    )


def _eg2() -> ProblemSpec:
    op = Graph2DOp("EG2")
    return ProblemSpec(
        name="eg2",
        description="planar exp table, metric on the first coordinate; "
                    "probes at or below -1 have empty solves, elsewhere the "
                    "solution set is a ray plus a curve arc",
        op=op, graph_op=op,
        metric=build_metric(np.diag([1.0, 0.0])),
        x0=np.array([-2.0, 0.0]),
        known_zeros=((1.0, 0.0), (2.0, 0.0)),
        fix_probes=((1.0, 0.0), (2.0, 0.0)),
        toml_text="""\
[problem]
kind = "graph2d"
name = "EG2"

[metric]
diag = [1.0, 0.0]

[start]
x0 = [-2.0, 0.0]
""",
    )


def _eg3() -> ProblemSpec:
    op = Graph2DOp("EG3")
    return ProblemSpec(
        name="eg3",
        description="planar exp table, metric on the second coordinate; "
                    "every solve is set-valued yet never empty",
        op=op, graph_op=op,
        metric=build_metric(np.diag([0.0, 1.0])),
        x0=np.array([0.0, 0.5]),
        known_zeros=((1.0, 0.0), (2.0, 0.0)),
        fix_probes=((0.0, 0.0),),
        toml_text="""\
[problem]
kind = "graph2d"
name = "EG3"

[metric]
diag = [0.0, 1.0]

[start]
x0 = [0.0, 0.5]
""",
    )


def _l1x() -> ProblemSpec:
    op = BlockOp(
        block_dims=(1, 1),
        diag=(SubdiffOp(AbsQuadratic(1.0, 1.0, 3.0)), SubdiffOp(Zero(1))),
        offdiag={},
    )
    return ProblemSpec(
        name="l1x",
        description="scalar |t| + 1/2 (t - 3)^2 against a free coordinate, "
                    "metric on the first coordinate; the solution set at "
                    "each probe is a vertical line",
        op=op, graph_op=Graph2DOp("L1X"),
        metric=build_metric(np.diag([1.0, 0.0])),
        x0=np.array([3.0, 0.0]),
        known_zeros=((2.0, 0.0), (2.0, 1.0), (2.0, -3.0)),
        known_fixed_point=np.array([2.0, 0.0]),
        xi_bound=0.0,
        single_probes=((-2.0, 0.0), (0.0, 0.0), (3.0, 0.0)),
        fix_probes=((2.0, 0.0), (2.0, 5.0), (3.0, 1.0), (0.0, 0.0), (-1.0, 2.0)),
        toml_text="""\
[problem]
kind = "block"

[[block]]
kind = "absquad"
weight = 1.0
scale = 1.0
shift = 3.0

[[block]]
kind = "zero"
dim = 1

[metric]
diag = [1.0, 0.0]

[start]
x0 = [3.0, 0.0]
""",
    )


def _l1y() -> ProblemSpec:
    op = BlockOp(
        block_dims=(1, 1),
        diag=(SubdiffOp(AbsValue(1.0)), SubdiffOp(AffineShiftSquare(1.0, [3.0]))),
        offdiag={},
    )
    return ProblemSpec(
        name="l1y",
        description="scalar |t| in the kernel coordinate against a shifted "
                    "square in the range coordinate; solves are unique even "
                    "though the metric is degenerate",
        op=op, graph_op=Graph2DOp("L1Y"),
        metric=build_metric(np.diag([0.0, 1.0])),
        x0=np.array([2.0, 0.0]),
        known_zeros=((0.0, 3.0),),
        known_fixed_point=np.array([0.0, 3.0]),
        xi_bound=0.0,
        single_probes=((0.0, -2.0), (0.0, 0.0), (0.0, 3.0)),
        fix_probes=((0.0, 3.0), (1.0, 0.0), (0.0, 0.0), (2.0, 0.0)),
        toml_text="""\
[problem]
kind = "block"

[[block]]
kind = "abs"
weight = 1.0

[[block]]
kind = "affinesq"
scale = 1.0
shift = [3.0]

[metric]
diag = [0.0, 1.0]

[start]
x0 = [2.0, 0.0]
""",
    )


def _drs_lasso() -> ProblemSpec:
    f = AbsValue(1.0)
    g = AffineShiftSquare(1.0, [3.0])
    tau = 1.0
    op, Q = build_drs_embedding(f, g, tau)
    return ProblemSpec(
        name="drs-lasso",
        description="|u| + 1/2 (u - 3)^2 split between the two prox rows; "
                    "the shift sequence halves its distance to 1 each sweep",
        op=op,
        metric=Q,
        x0=np.zeros(3),
        known_zeros=((2.0, 2.0, 1.0),),
        known_fixed_point=np.array([2.0, 2.0, 1.0]),
        xi_bound=float(np.sqrt(2.0)),
        fix_probes=((0.0, 0.0, 1.0), (0.0, 0.0, 0.0), (0.0, 0.0, 3.0)),
        splitting={"kind": "drs", "f": f, "g": g, "tau": tau},
        toml_text="""\
[problem]
kind = "drs"

[drs]
tau = 1.0

[drs.f]
kind = "abs"
weight = 1.0

[drs.g]
kind = "affinesq"
scale = 1.0
shift = [3.0]

[start]
x0 = [0.0, 0.0, 0.0]
""",
    )


def _alm_basic() -> ProblemSpec:
    F = AffineShiftSquare(1.0, [0.0])
    b = np.array([2.0])
    tau = 1.0
    op, Q = build_alm_embedding(F, b, tau)
    return ProblemSpec(
        name="alm-basic",
        description="1/2 q^2 subject to q = 2 by the multiplier iteration; "
                    "primal and multiplier meet at 2",
        op=op,
        metric=Q,
        x0=np.zeros(2),
        known_zeros=((2.0, 2.0),),
        known_fixed_point=np.array([2.0, 2.0]),
        xi_bound=1.0 / tau,
        fix_probes=((0.0, 2.0), (0.0, 0.0), (1.0, 3.0)),
        splitting={"kind": "alm", "F": F, "b": b, "tau": tau},
        toml_text="""\
[problem]
kind = "alm"

[alm]
tau = 1.0
b = [2.0]

[alm.F]
kind = "affinesq"
scale = 1.0
shift = [0.0]

[start]
x0 = [0.0, 0.0]
""",
    )


def _admm_basic() -> ProblemSpec:
    f = AffineShiftSquare(1.0, [0.0])
    g = AbsValue(1.0)
    A = np.eye(1)
    B = np.eye(1)
    tau = 1.0
    bridge = admm_to_drs(f, A, g, B, tau)
    op, Q = build_drs_embedding(bridge.f_t, bridge.g_t, tau)
    return ProblemSpec(
        name="admm-basic",
        description="1/2 s^2 + |t| with s + t = u eliminated; runs as the "
                    "two-prox embedding of the transformed pair",
        op=op,
        metric=Q,
        x0=np.array([0.0, 0.0, 3.0]),
        known_zeros=((0.0, 0.0, 0.0),),
        known_fixed_point=np.zeros(3),
        xi_bound=float(np.sqrt(2.0)),
        fix_probes=((0.0, 0.0, 0.0), (0.0, 0.0, 3.0)),
        splitting={"kind": "admm", "f": f, "g": g, "A": A, "B": B,
                   "tau": tau, "bridge": bridge},
        toml_text="""\
[problem]
kind = "admm"

[admm]
tau = 1.0
A = [1.0]
A_shape = [1, 1]
B = [1.0]
B_shape = [1, 1]

[admm.f]
kind = "affinesq"
scale = 1.0
shift = [0.0]

[admm.g]
kind = "abs"
weight = 1.0

[start]
x0 = [0.0, 0.0, 3.0]
""",
    )


def _counter_block() -> ProblemSpec:
    op = BlockOp(
        block_dims=(1, 1),
        diag=(SubdiffOp(AffineShiftSquare(1.0, [0.0])),
              SubdiffOp(AffineShiftSquare(1.0, [0.0]))),
        offdiag={(1, 0): -5.0},
        structure=("counter", 5.0),
    )
    return ProblemSpec(
        name="counter-block",
        description="two quadratic blocks with a one-sided coupling of "
                    "weight -5: not monotone on the plane (the symmetric "
                    "part is indefinite) yet monotone on graph points whose "
                    "values lie in ran Q, and the solve is a linear map "
                    "that is firmly nonexpansive in the seminorm",
        op=op,
        metric=build_metric(np.diag([1.0, 0.0])),
        x0=np.array([1.0, 0.0]),
        known_zeros=((0.0, 0.0),),
        known_fixed_point=np.array([0.0, 0.0]),
        xi_bound=2.5,
        fix_probes=((0.0, 0.0), (1.0, 0.0)),
        toml_text="""\
[problem]
kind = "block"
couplings = [[1, 0, -5.0]]

[[block]]
kind = "affinesq"
scale = 1.0
shift = [0.0]

[[block]]
kind = "affinesq"
scale = 1.0
shift = [0.0]

[metric]
diag = [1.0, 0.0]

[start]
x0 = [1.0, 0.0]
""",
    )


_BUILDERS = {
    "eg1": _eg1,
    "eg2": _eg2,
    "eg3": _eg3,
    "l1x": _l1x,
    "l1y": _l1y,
    "drs-lasso": _drs_lasso,
    "alm-basic": _alm_basic,
    "admm-basic": _admm_basic,
    "counter-block": _counter_block,
}

PROBLEM_NAMES = tuple(_BUILDERS)


def get_problem(name: str) -> ProblemSpec:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownExample(
            f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}"
        ) from None
    return builder()
