"""Splitting algorithms as explicit update rules, plus the change of
variables that turns the alternating-direction recursion into a
Douglas-Rachford one.

The step functions are deliberately independent of the resolvent engine so
traces produced through the block embeddings can be cross-checked against
them coordinate by coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .proxfn import (
    InfimalPostcomposition,
    ProxFunction,
    ScaledArg,
    eval_prox,
    prox_infimal_postcomposition,
)

__all__ = [
    "DrsState",
    "AlmState",
    "AdmmState",
    "drs_step",
    "drs_kernel_map",
    "alm_step",
    "alm_kernel_map",
    "admm_step",
    "AdmmDrsBridge",
    "admm_to_drs",
    "coupled_pair_sampler",
]


@dataclass(frozen=True)
class DrsState:
    u: np.ndarray
    w: np.ndarray
    z: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.u, self.w, self.z])


@dataclass(frozen=True)
class AlmState:
    q: np.ndarray
    p: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])


@dataclass(frozen=True)
class AdmmState:
    s: np.ndarray
    t: np.ndarray
    u: np.ndarray


def drs_step(f: ProxFunction, g: ProxFunction, tau: float, z) -> DrsState:
    """One Douglas-Rachford sweep on the governing sequence z."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    u = eval_prox(g, tau, z)
    w = eval_prox(f, tau, 2.0 * u - z)
    return DrsState(u, w, z + w - u)


def drs_kernel_map(f: ProxFunction, g: ProxFunction, tau: float, a, c):
    """Kernel coordinates (u, w) from the current and next governing points.

    b1 = prox_{tau g}(a) and b2 = b1 - a + c; with |c - c'| <= |a - a'| the
    stacked map is 3-Lipschitz (firm nonexpansiveness gives the headroom).
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    b1 = eval_prox(g, tau, a)
    return b1, b1 - a + c


def alm_step(F: ProxFunction, b, tau: float, state: AlmState) -> AlmState:
    """One multiplier-method sweep for min F(q) subject to q = b."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    q = eval_prox(F, 1.0 / tau, b + state.p / tau)
    return AlmState(q, state.p - tau * (q - b))


def alm_kernel_map(tau: float, b, a, c):
    """Kernel coordinate q from multiplier values a (current) and c (next);
    v = (a - c)/tau + b, which is (2/tau)-Lipschitz in the pair."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    return (a - c) / tau + b


def admm_step(f: ProxFunction, A, g: ProxFunction, B, tau: float,
              state: AdmmState) -> AdmmState:
    """One alternating-direction sweep for min f(s) + g(t) with A s + B t = 0."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    _, s = prox_infimal_postcomposition(f, A, tau, state.u - tau * (B @ state.t))
    _, t = prox_infimal_postcomposition(g, B, tau, state.u - tau * (A @ s))
    return AdmmState(s, t, state.u - tau * (A @ s + B @ t))


def _post(fn: ProxFunction, M: np.ndarray) -> ProxFunction:
    """inf-postcomposition by M, skipping the wrapper when M is the identity."""
    m, n = M.shape
    if m == n and np.array_equal(M, np.eye(m)):
        return fn
    return InfimalPostcomposition(fn, M)


@dataclass(frozen=True)
class AdmmDrsBridge:
    """Douglas-Rachford data equivalent to an alternating-direction run.

    The governing sequence is z = u + tau B t; the transformed functions
    evaluate the original ones through their postcompositions at a scaled
    argument, so prox calls on them reproduce the two subproblem solves.
    """

    f_t: ProxFunction
    g_t: ProxFunction
    tau: float
    A: np.ndarray
    B: np.ndarray

    def to_z(self, state: AdmmState) -> np.ndarray:
        return state.u + self.tau * (self.B @ state.t)


def admm_to_drs(f: ProxFunction, A, g: ProxFunction, B, tau: float) -> AdmmDrsBridge:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[0] != B.shape[0]:
        raise DimensionMismatch("A and B must map into the same space")
    f_t = ScaledArg(_post(f, A), -1.0 / tau)
    g_t = ScaledArg(_post(g, B), 1.0 / tau)
    return AdmmDrsBridge(f_t, g_t, tau, A, B)


def coupled_pair_sampler(dim: int, scale: float = 2.0):
    """Sampler of ((a, c), (a2, c2)) with |c - c2| <= |a - a2|, for probing
    the kernel maps at their advertised moduli."""

    def sample(rng):
        a = scale * rng.standard_normal(dim)
        c = scale * rng.standard_normal(dim)
        da = scale * rng.standard_normal(dim)
        lam = rng.uniform(0.0, 1.0)
        dc = rng.standard_normal(dim)
        nd = np.linalg.norm(dc)
        if nd > 0.0:
            dc = dc / nd * lam * np.linalg.norm(da)
        return (a, c), (a + da, c + dc)

    return sample
