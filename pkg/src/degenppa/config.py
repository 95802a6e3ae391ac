"""Problem configs from TOML files.

The schema is deliberately flat: [problem] picks a kind, [metric]/[start]
fix the geometry, [stop] overrides the stopping rule, and splitting kinds
carry their own table with the prox functions as subtables. Matrices are
flat row-major lists next to a _shape key. Unknown keys anywhere are
rejected by name rather than ignored, so typos fail loudly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # runtime is 3.10
    import tomli as tomllib

from .builtins import ProblemSpec
from .errors import ParseError
from .iteration import StopRule
from .metric import build_metric
from .operators import (
    BlockOp,
    GRAPH2D_NAMES,
    Graph2DOp,
    SubdiffOp,
    build_alm_embedding,
    build_drs_embedding,
)
from .proxfn import (
    AbsQuadratic,
    AbsValue,
    AffineShiftSquare,
    IndicatorAffine,
    Linear,
    OneNorm,
    Quadratic,
    Zero,
)
from .splitting import admm_to_drs

__all__ = ["parse_problem", "parse_problem_dict"]


def _reject_unknown(tab: dict, allowed, where: str):
    if not isinstance(tab, dict):
        raise ParseError(f"{where} must be a table")
    extra = sorted(set(tab) - set(allowed))
    if extra:
        raise ParseError(f"unknown key {extra[0]!r} in {where}")


def _need(tab: dict, key: str, where: str):
    if not isinstance(tab, dict):
        raise ParseError(f"{where} must be a table")
    if key not in tab:
        raise ParseError(f"missing key {key!r} in {where}")
    return tab[key]


def _vector(tab: dict, key: str, where: str) -> np.ndarray:
    v = _need(tab, key, where)
    if not isinstance(v, list) or not all(isinstance(t, (int, float)) for t in v):
        raise ParseError(f"{where}.{key} must be a list of numbers")
    return np.asarray(v, dtype=float)


def _matrix(tab: dict, key: str, where: str) -> np.ndarray:
    flat = _vector(tab, key, where)
    shape = _need(tab, key + "_shape", where)
    if (not isinstance(shape, list) or len(shape) != 2
            or not all(isinstance(t, int) and t > 0 for t in shape)):
        raise ParseError(f"{where}.{key}_shape must be two positive integers")
    r, c = shape
    if flat.size != r * c:
        raise ParseError(f"{where}.{key} has {flat.size} entries, shape wants {r * c}")
    return flat.reshape(r, c)


_FN_KEYS = {
    "abs": ("weight",),
    "onenorm": ("weight", "dim"),
    "quad": ("P", "P_shape", "q"),
    "affinesq": ("scale", "shift"),
    "indicator": ("B", "B_shape", "b"),
    "linear": ("slope",),
    "zero": ("dim",),
    "absquad": ("weight", "scale", "shift"),
}


def _fn(tab, where: str):
    if not isinstance(tab, dict):
        raise ParseError(f"{where} must be a table")
    kind = _need(tab, "kind", where)
    if kind not in _FN_KEYS:
        raise ParseError(f"{where}.kind {kind!r} is not a function kind")
    _reject_unknown(tab, ("kind",) + _FN_KEYS[kind], where)
    if kind == "abs":
        return AbsValue(float(tab.get("weight", 1.0)))
    if kind == "onenorm":
        return OneNorm(float(_need(tab, "weight", where)), int(_need(tab, "dim", where)))
    if kind == "quad":
        return Quadratic(_matrix(tab, "P", where), _vector(tab, "q", where))
    if kind == "affinesq":
        return AffineShiftSquare(float(_need(tab, "scale", where)),
                                 _vector(tab, "shift", where))
    if kind == "indicator":
        return IndicatorAffine(_matrix(tab, "B", where), _vector(tab, "b", where))
    if kind == "linear":
        return Linear(_vector(tab, "slope", where))
    if kind == "zero":
        return Zero(int(tab.get("dim", 1)))
    return AbsQuadratic(float(_need(tab, "weight", where)),
                        float(_need(tab, "scale", where)),
                        float(_need(tab, "shift", where)))


def _metric(tab: dict):
    _reject_unknown(tab, ("diag", "matrix", "diag_shape", "shape"), "[metric]")
    if "diag" in tab:
        if "matrix" in tab:
            raise ParseError("[metric] takes diag or matrix, not both")
        return build_metric(np.diag(_vector(tab, "diag", "[metric]")))
    if "matrix" not in tab:
        raise ParseError("[metric] needs diag or matrix")
    flat = _vector(tab, "matrix", "[metric]")
    shape = _need(tab, "shape", "[metric]")
    if not isinstance(shape, list) or len(shape) != 2 or shape[0] != shape[1]:
        raise ParseError("[metric].shape must be [n, n]")
    if flat.size != shape[0] * shape[1]:
        raise ParseError("[metric].matrix does not match shape")
    return build_metric(flat.reshape(shape[0], shape[1]))


def parse_problem_dict(data: dict, name: str = "config") -> ProblemSpec:
    if not isinstance(data, dict):
        raise ParseError("config root must be a table")
    _reject_unknown(data, ("problem", "metric", "start", "stop", "block",
                           "drs", "alm", "admm"), "config root")
    prob = _need(data, "problem", "config root")
    kind = _need(prob, "kind", "[problem]")

    graph_op = None
    splitting = None
    if kind == "graph2d":
        _reject_unknown(prob, ("kind", "name"), "[problem]")
        gname = _need(prob, "name", "[problem]")
        if gname not in GRAPH2D_NAMES:
            raise ParseError(f"[problem].name {gname!r} is not a planar table")
        op = Graph2DOp(gname)
        graph_op = op
        metric = _metric(_need(data, "metric", "config root"))
    elif kind == "block":
        _reject_unknown(prob, ("kind", "couplings"), "[problem]")
        blocks = data.get("block")
        if not blocks:
            raise ParseError("kind 'block' needs at least one [[block]]")
        fns = [_fn(b, f"[[block]] #{i}") for i, b in enumerate(blocks)]
        offdiag = {}
        couplings = prob.get("couplings", [])
        if not isinstance(couplings, list):
            raise ParseError("[problem].couplings must be a list of triples")
        for entry in couplings:
            if (not isinstance(entry, list) or len(entry) != 3
                    or not all(isinstance(t, (int, float)) for t in entry)):
                raise ParseError("[problem].couplings entries must be [row, col, coeff]")
            i, j = int(entry[0]), int(entry[1])
            if i == j or not (0 <= i < len(fns)) or not (0 <= j < len(fns)):
                raise ParseError(f"coupling ({i}, {j}) is out of range")
            offdiag[(i, j)] = float(entry[2])
        op = BlockOp(
            block_dims=tuple(fn.dim for fn in fns),
            diag=tuple(SubdiffOp(fn) for fn in fns),
            offdiag=offdiag,
        )
        metric = _metric(_need(data, "metric", "config root"))
    elif kind == "subdiff":
        _reject_unknown(prob, ("kind", "fn"), "[problem]")
        op = SubdiffOp(_fn(_need(prob, "fn", "[problem]"), "[problem.fn]"))
        metric = _metric(_need(data, "metric", "config root"))
    elif kind == "drs":
        _reject_unknown(prob, ("kind",), "[problem]")
        if "metric" in data:
            raise ParseError("kind 'drs' derives its metric; drop [metric]")
        tab = _need(data, "drs", "config root")
        _reject_unknown(tab, ("tau", "f", "g"), "[drs]")
        tau = float(_need(tab, "tau", "[drs]"))
        f = _fn(_need(tab, "f", "[drs]"), "[drs.f]")
        g = _fn(_need(tab, "g", "[drs]"), "[drs.g]")
        op, metric = build_drs_embedding(f, g, tau)
        splitting = {"kind": "drs", "f": f, "g": g, "tau": tau}
    elif kind == "alm":
        _reject_unknown(prob, ("kind",), "[problem]")
        if "metric" in data:
            raise ParseError("kind 'alm' derives its metric; drop [metric]")
        tab = _need(data, "alm", "config root")
        _reject_unknown(tab, ("tau", "b", "F"), "[alm]")
        tau = float(_need(tab, "tau", "[alm]"))
        b = _vector(tab, "b", "[alm]")
        F = _fn(_need(tab, "F", "[alm]"), "[alm.F]")
        op, metric = build_alm_embedding(F, b, tau)
        splitting = {"kind": "alm", "F": F, "b": b, "tau": tau}
    elif kind == "admm":
        _reject_unknown(prob, ("kind",), "[problem]")
        if "metric" in data:
            raise ParseError("kind 'admm' derives its metric; drop [metric]")
        tab = _need(data, "admm", "config root")
        _reject_unknown(tab, ("tau", "A", "A_shape", "B", "B_shape", "f", "g"), "[admm]")
        tau = float(_need(tab, "tau", "[admm]"))
        A = _matrix(tab, "A", "[admm]")
        B = _matrix(tab, "B", "[admm]")
        f = _fn(_need(tab, "f", "[admm]"), "[admm.f]")
        g = _fn(_need(tab, "g", "[admm]"), "[admm.g]")
        bridge = admm_to_drs(f, A, g, B, tau)
        op, metric = build_drs_embedding(bridge.f_t, bridge.g_t, tau)
        splitting = {"kind": "admm", "f": f, "g": g, "A": A, "B": B,
                     "tau": tau, "bridge": bridge}
    else:
        raise ParseError(f"[problem].kind {kind!r} is not recognized")

    start = _need(data, "start", "config root")
    _reject_unknown(start, ("x0",), "[start]")
    x0 = _vector(start, "x0", "[start]")
    if x0.shape != (op.dim,):
        raise ParseError(f"[start].x0 has dim {x0.size}, the problem wants {op.dim}")

    stop = None
    if "stop" in data:
        tab = data["stop"]
        _reject_unknown(tab, ("max_iters", "q_res_tol", "full_res_tol"), "[stop]")
        kwargs = {}
        if "max_iters" in tab:
            if not isinstance(tab["max_iters"], int) or tab["max_iters"] <= 0:
                raise ParseError("[stop].max_iters must be a positive integer")
            kwargs["max_iters"] = tab["max_iters"]
        if "q_res_tol" in tab:
            kwargs["q_res_tol"] = float(tab["q_res_tol"])
        if "full_res_tol" in tab:
            kwargs["full_res_tol"] = float(tab["full_res_tol"])
        stop = StopRule(**kwargs)

    return ProblemSpec(
        name=name,
        description=f"problem loaded from config ({kind})",
        op=op, metric=metric, x0=x0, graph_op=graph_op,
        splitting=splitting, stop=stop,
    )


def parse_problem(path) -> ProblemSpec:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as e:
        raise ParseError(f"cannot read {p}: {e}") from e
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
        raise ParseError(f"{p} is not valid TOML: {e}") from e
    return parse_problem_dict(data, name=p.stem)
