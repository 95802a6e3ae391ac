"""Proximal point iterations under degenerate metrics: resolvent solves
with explicit solution-set outcomes, the fixed-point loop with Fejer and
summability certificates, splitting schemes realized as block embeddings,
and sampled verification of the structural claims.
"""

from .errors import (
    DegenPpaError,
    DimensionMismatch,
    InfeasibleConstraint,
    InnerNotConverged,
    InverseUnavailable,
    KernelSetUnknown,
    NonSymmetric,
    NotAFixedPoint,
    NotAZero,
    NotPsd,
    ParseError,
    RankDeficient,
    SamplerStarved,
    SolverFailure,
    StrategyMismatch,
    UnboundedSearch,
    UnknownCheck,
    UnknownExample,
    UnsupportedShape,
    ValidationError,
)
from .metric import (
    PsdMetric,
    build_metric,
    project_kernel,
    project_range,
    q_inner,
    q_seminorm,
    sqrt_metric,
)
from .proxfn import (
    AbsQuadratic,
    AbsValue,
    AffineShiftSquare,
    IndicatorAffine,
    InfimalPostcomposition,
    Linear,
    OneNorm,
    ProxFunction,
    Quadratic,
    ScaledArg,
    Zero,
    eval_prox,
    moreau_complement,
    prox_infimal_postcomposition,
    soft_threshold,
)
from .operators import (
    AffineOp,
    BlockOp,
    GRAPH2D_NAMES,
    Graph2DOp,
    SetValuedOp,
    SubdiffOp,
    build_alm_embedding,
    build_drs_embedding,
    graph_eval,
    inverse_graph_eval,
)
from .resolvent import (
    Empty,
    MultiValued,
    RangeUnique,
    STRATEGIES,
    Unique,
    check_moreau_identity,
    eval_equality_chain,
    eval_fixed_point_map,
    grid_residual_search,
    solve_resolvent,
)
from .iteration import (
    IterationTrace,
    StopRule,
    fejer_margins,
    fejer_report,
    fix_equals_projected_zeros,
    iterate,
    lipschitz_probe,
    reference_fixed_point,
    summability_report,
)
from .splitting import (
    AdmmDrsBridge,
    AdmmState,
    AlmState,
    DrsState,
    admm_step,
    admm_to_drs,
    alm_kernel_map,
    alm_step,
    coupled_pair_sampler,
    drs_kernel_map,
    drs_step,
)
from .report import CheckReport
from .verify import (
    CHECK_NAMES,
    GraphSampler,
    check_equality_and_moreau,
    check_firm_nonexpansive,
    check_full_domain,
    check_minty_range,
    check_restricted_monotonicity,
    check_single_valuedness,
    check_sri_condition,
    run_check,
)
from .builtins import PROBLEM_NAMES, ProblemSpec, get_problem
from .config import parse_problem, parse_problem_dict

__version__ = "0.1.0"
