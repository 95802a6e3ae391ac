"""Degenerate PSD metrics: eigenstructure, projections, square root, seminorm.

A PsdMetric wraps one symmetric eigendecomposition and reuses it for every
projection, seminorm, and square-root query. The zero/positive eigenvalue
split uses a relative cutoff eig_tol * lambda_sup so behavior is invariant
under rescaling the matrix. Rank-0 (zero) metrics are valid objects here; the
iteration engine is the layer that refuses them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonSymmetric, NotPsd

__all__ = [
    "PsdMetric",
    "build_metric",
    "project_range",
    "project_kernel",
    "sqrt_metric",
    "q_inner",
    "q_seminorm",
]


@dataclass(frozen=True)
class PsdMetric:
    dim: int
    matrix: np.ndarray          # symmetrized copy of the input
    eigvals: np.ndarray         # nonincreasing
    eigvecs: np.ndarray         # columns, aligned with eigvals
    rank: int
    lambda_inf: float           # smallest positive eigenvalue (0.0 if rank 0)
    lambda_sup: float
    eig_tol: float
    range_basis: np.ndarray = field(repr=False)   # dim x rank
    kernel_basis: np.ndarray = field(repr=False)  # dim x (dim - rank)
    proj_range: np.ndarray = field(repr=False)
    proj_kernel: np.ndarray = field(repr=False)
    sqrt: np.ndarray = field(repr=False)

    @property
    def degenerate(self) -> bool:
        return self.rank < self.dim


def build_metric(matrix, eig_tol: float = 1e-10) -> PsdMetric:
    """Validate and decompose a symmetric PSD matrix.

    Raises NonSymmetric when the asymmetry exceeds 1e-12 relative to the
    spectral norm, NotPsd when an eigenvalue falls below -eig_tol*lambda_sup.
    """
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"metric must be square, got shape {M.shape}")
    if not (0.0 < eig_tol < 1e-4):
        raise ValueError(f"eig_tol must lie in (0, 1e-4), got {eig_tol}")
    n = M.shape[0]
    scale = float(np.linalg.norm(M, 2)) if n else 0.0
    asym = float(np.max(np.abs(M - M.T))) if n else 0.0
    if asym > 1e-12 * scale:
        raise NonSymmetric(f"asymmetry {asym:.3e} exceeds 1e-12 * ||Q|| = {1e-12 * scale:.3e}")
    Ms = 0.5 * (M + M.T)

    w, V = np.linalg.eigh(Ms)      # ascending
    w = w[::-1].copy()
    V = V[:, ::-1].copy()
    lam_sup = float(w[0]) if n and w[0] > 0 else 0.0
    cutoff = eig_tol * lam_sup
    if n and float(w[-1]) < -cutoff:
        raise NotPsd(f"eigenvalue {w[-1]:.3e} below -{cutoff:.3e}")

    rank = int(np.count_nonzero(w > cutoff))
    Vr = V[:, :rank]
    Vk = V[:, rank:]
    lam_inf = float(w[rank - 1]) if rank > 0 else 0.0
    # Projectors built from eigenvector blocks: one decomposition, reused.
    Pr = Vr @ Vr.T
    Pk = Vk @ Vk.T
    S = (Vr * np.sqrt(w[:rank])) @ Vr.T if rank > 0 else np.zeros_like(Ms)
    return PsdMetric(
        dim=n,
        matrix=Ms,
        eigvals=w,
        eigvecs=V,
        rank=rank,
        lambda_inf=lam_inf,
        lambda_sup=lam_sup,
        eig_tol=eig_tol,
        range_basis=Vr,
        kernel_basis=Vk,
        proj_range=Pr,
        proj_kernel=Pk,
        sqrt=S,
    )


def _check_dim(Q: PsdMetric, x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (Q.dim,):
        raise DimensionMismatch(f"expected vector of dim {Q.dim}, got shape {v.shape}")
    return v


def project_range(Q: PsdMetric, x) -> np.ndarray:
    return Q.proj_range @ _check_dim(Q, x)


def project_kernel(Q: PsdMetric, x) -> np.ndarray:
    return Q.proj_kernel @ _check_dim(Q, x)


def sqrt_metric(Q: PsdMetric) -> np.ndarray:
    """Self-adjoint PSD square root; S @ S == Q.matrix, ran S == ran Q."""
    return Q.sqrt


def q_inner(Q: PsdMetric, x, y) -> float:
    vx = _check_dim(Q, x)
    vy = _check_dim(Q, y)
    return float(vx @ Q.matrix @ vy)


def q_seminorm(Q: PsdMetric, x) -> float:
    # Tiny negative values from rounding are clipped to zero.
    return float(np.sqrt(max(q_inner(Q, x, x), 0.0)))
