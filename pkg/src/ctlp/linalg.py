"""Small dense linear algebra: one-sided Jacobi SVD, pseudo-inverse, Gram determinants.

Matrices here are tiny (rows of β-active constraints, at most a few dozen
entries), so the routines favour accuracy and transparency over speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError

RANK_TOL = 1e-10
SINGULAR_TOL = 1e-12
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SvdResult:
    """``M = U @ diag(sigma) @ V.T`` with full square orthogonal ``U`` and ``V``."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    rank: int

    def diag(self) -> np.ndarray:
        m, n = self.U.shape[0], self.V.shape[0]
        S = np.zeros((m, n))
        k = self.sigma.size
        S[:k, :k] = np.diag(self.sigma)
        return S


def as_matrix(M) -> np.ndarray:
    A = np.array(M, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix has non-finite entries")
    return A


def _hestenes(A: np.ndarray, max_sweeps: int = 80) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonalise the columns of ``A`` (rows >= cols) by plane rotations.

    Returns ``(W, V)`` with ``A @ V = W``, ``V`` orthogonal and the columns of
    ``W`` mutually orthogonal; their norms are the singular values.
    """
    W = A.copy()
    n = W.shape[1]
    V = np.eye(n)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = W[:, p] @ W[:, p]
                beta = W[:, q] @ W[:, q]
                gamma = W[:, p] @ W[:, q]
                if gamma == 0.0 or abs(gamma) <= _EPS * np.sqrt(alpha) * np.sqrt(beta):
                    continue
                if abs(beta - alpha) * 1e-300 >= abs(gamma):
                    continue  # rotation angle below representable precision
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                wp = W[:, p].copy()
                W[:, p] = c * wp - s * W[:, q]
                W[:, q] = s * wp + c * W[:, q]
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
        if not rotated:
            break
    return W, V


def _complete_basis(Q: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns ``Q`` (dim x k) to a dim x dim orthogonal matrix."""
    k = Q.shape[1]
    if k == dim:
        return Q
    # projecting the identity off span(Q) and re-orthogonalising with QR
    R = np.eye(dim) - Q @ Q.T
    R = R - Q @ (Q.T @ R)
    cols = np.argsort(-np.linalg.norm(R, axis=0), kind="stable")[: dim - k]
    extra, _ = np.linalg.qr(R[:, np.sort(cols)])
    extra = extra - Q @ (Q.T @ extra)
    extra, _ = np.linalg.qr(extra)
    return np.hstack([Q, extra])


def svd(M, rank_tol: float = RANK_TOL) -> SvdResult:
    """Full singular value decomposition by one-sided Jacobi rotations.

    ``sigma`` is non-increasing with ``min(rows, cols)`` entries; ``rank``
    counts singular values above ``rank_tol * sigma[0]``.
    """
    A = as_matrix(M)
    m, n = A.shape
    if m == 0 or n == 0:
        return SvdResult(np.eye(m), np.zeros(0), np.eye(n), 0)
    transposed = m < n
    B = A.T if transposed else A
    W, V = _hestenes(B)
    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, W, V = sigma[order], W[:, order], V[:, order]

    top = sigma[0]
    rank = int(np.sum(sigma > rank_tol * top)) if top > 0 else 0
    keep = int(np.sum(sigma > max(B.shape) * _EPS * top)) if top > 0 else 0
    Uk = W[:, :keep] / sigma[:keep]
    U = _complete_basis(Uk, B.shape[0])
    if transposed:
        U, V = V, U
    return SvdResult(U=U, sigma=sigma, V=V, rank=rank)


def pinv(M, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Moore–Penrose pseudo-inverse ``V Σ⁺ Uᵀ``."""
    A = as_matrix(M)
    m, n = A.shape
    res = svd(A, rank_tol)
    r = res.rank
    if r == 0:
        return np.zeros((n, m))
    return (res.V[:, :r] / res.sigma[:r]) @ res.U[:, :r].T


def singular_values(M) -> np.ndarray:
    """Singular values only, non-increasing; skips building ``U``."""
    A = as_matrix(M)
    if A.size == 0:
        return np.zeros(0)
    B = A.T if A.shape[0] < A.shape[1] else A
    W, _ = _hestenes(B)
    return np.sort(np.linalg.norm(W, axis=0))[::-1]


def spectral_norm(M) -> float:
    A = as_matrix(M)
    if A.size == 0:
        return 0.0
    return float(singular_values(A)[0])


def sigma_min_positive(M, rank_tol: float = RANK_TOL) -> float:
    """Smallest singular value above the rank threshold."""
    res = svd(M, rank_tol)
    if res.rank == 0:
        raise DomainError("zero matrix has no positive singular value")
    return float(res.sigma[res.rank - 1])


def lu_factor(G: np.ndarray, singular_tol: float = SINGULAR_TOL):
    """LU with partial pivoting of a square matrix.

    Returns ``(LU, perm, sign, singular)``; ``singular`` is set when some pivot
    falls below ``singular_tol * ||G||_inf``.
    """
    LU = np.array(G, dtype=float)
    k = LU.shape[0]
    perm = np.arange(k)
    sign = 1.0
    scale = np.abs(LU).sum(axis=1).max() if k else 0.0
    singular = scale == 0.0 and k > 0
    for j in range(k):
        p = j + int(np.argmax(np.abs(LU[j:, j])))
        if abs(LU[p, j]) <= singular_tol * scale:
            singular = True
            continue
        if p != j:
            LU[[j, p]] = LU[[p, j]]
            perm[[j, p]] = perm[[p, j]]
            sign = -sign
        LU[j + 1 :, j] /= LU[j, j]
        LU[j + 1 :, j + 1 :] -= np.outer(LU[j + 1 :, j], LU[j, j + 1 :])
    return LU, perm, sign, singular


def det(G) -> float:
    G = as_matrix(G)
    if G.shape[0] != G.shape[1]:
        raise InputError("determinant needs a square matrix")
    if G.shape[0] == 0:
        return 1.0
    LU, _, sign, singular = lu_factor(G)
    if singular:
        return 0.0
    return float(sign * np.prod(np.diag(LU)))


def gram_det(M) -> float:
    """``det(M Mᵀ)``; 0 when pivoting detects singularity, never negative.

    A matrix with no rows has the empty Gram matrix, whose determinant is 1.
    """
    A = np.array(M, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1) if A.size else A.reshape(0, 0)
    if A.shape[0] == 0:
        return 1.0
    A = as_matrix(A)
    d = det(A @ A.T)
    if d < 0.0:
        if d < -SINGULAR_TOL:
            raise ArithmeticError(f"Gram determinant came out negative: {d}")
        d = 0.0
    return d


def solve(G, rhs) -> np.ndarray:
    """Solve ``G x = rhs`` for square nonsingular ``G`` (rhs may be a matrix)."""
    G = as_matrix(G)
    LU, perm, _, singular = lu_factor(G)
    if singular:
        raise DomainError("singular system")
    b = np.array(rhs, dtype=float)[perm]
    k = G.shape[0]
    for j in range(k):
        b[j + 1 :] -= np.outer(LU[j + 1 :, j], b[j]).reshape(b[j + 1 :].shape)
    for j in reversed(range(k)):
        b[j] = (b[j] - LU[j, j + 1 :] @ b[j + 1 :]) / LU[j, j]
    return b
