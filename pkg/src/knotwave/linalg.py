"""Gram matrices, projections and orthonormalization over lists of functions.

Functions are moved onto a shared breakpoint grid and mapped to coordinates in
which the L2 inner product is the Euclidean dot product (see
``piecewise.Stack.embedded``).  All subspace work then happens on those
coordinate rows, so nothing squares a condition number except the normal
equations in ``project``, which is what its contract asks for.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ContractError, DependentSetError
from .piecewise import PiecewisePoly, Stack, gram_matrix, merge_breakpoints

RANK_TOL = 1e-9
GRAM_EIG_TOL = 1e-12


def gram(F: Sequence[PiecewisePoly], G: Sequence[PiecewisePoly] | None = None) -> np.ndarray:
    """Matrix of inner products <F_i, G_j>."""
    return gram_matrix(F, G)


def _common_stack(groups: Sequence[Sequence[PiecewisePoly]]):
    allf = [f for g in groups for f in g]
    grid = merge_breakpoints([f.breakpoints for f in allf])
    ncoef = max([f.ncoef for f in allf] + [1])
    stacks = [Stack.of(list(g), grid, ncoef) for g in groups]
    return grid, ncoef, stacks


def project(f: PiecewisePoly, F: Sequence[PiecewisePoly]) -> PiecewisePoly:
    """Orthogonal projection of f onto span F via the normal equations."""
    return project_many([f], F)[0]


def residual(f: PiecewisePoly, F: Sequence[PiecewisePoly]) -> PiecewisePoly:
    """f minus its projection onto span F."""
    return residual_many([f], F)[0]


def _solve_projection(rows_f, rows_F):
    g = rows_F @ rows_F.T
    ev = np.linalg.eigvalsh(g)
    if ev[0] <= GRAM_EIG_TOL * max(ev[-1], np.finfo(float).tiny):
        raise DependentSetError(
            f"projection target is numerically dependent (Gram eigenvalue ratio {ev[0] / max(ev[-1], 1e-300):.2e})"
        )
    rhs = rows_F @ rows_f.T
    coef = np.linalg.solve(g, rhs)
    return coef.T @ rows_F


def project_many(fs: Sequence[PiecewisePoly], F: Sequence[PiecewisePoly]) -> list[PiecewisePoly]:
    fs, F = list(fs), list(F)
    if not F or not fs:
        return [PiecewisePoly.zero() for _ in fs]
    grid, ncoef, (sf, sF) = _common_stack([fs, F])
    proj = _solve_projection(sf.embedded(), sF.embedded())
    return Stack.from_embedded(grid, proj, ncoef).functions()


def residual_many(fs: Sequence[PiecewisePoly], F: Sequence[PiecewisePoly]) -> list[PiecewisePoly]:
    fs, F = list(fs), list(F)
    if not F or not fs:
        return list(fs)
    grid, ncoef, (sf, sF) = _common_stack([fs, F])
    rows = sf.embedded()
    res = rows - _solve_projection(rows, sF.embedded())
    return Stack.from_embedded(grid, res, ncoef).functions()


def _sign_fix(row: np.ndarray, ncoef: int, rtol: float = 1e-12) -> np.ndarray:
    """Make the first significant coefficient (piece-major order) nonnegative."""
    peak = np.max(np.abs(row))
    if peak == 0:
        return row
    idx = np.flatnonzero(np.abs(row) > rtol * peak)
    return -row if row[idx[0]] < 0 else row


def mgs_rows(rows: np.ndarray, tol: float = RANK_TOL, sign_fix: bool = True) -> tuple[np.ndarray, list[int]]:
    """Modified Gram-Schmidt with one reorthogonalization pass on the rows of a matrix.

    Returns the orthonormal rows and the indices of the input rows that were kept.
    """
    basis: list[np.ndarray] = []
    kept = []
    for i, v in enumerate(np.asarray(rows, dtype=float)):
        n0 = np.linalg.norm(v)
        if n0 == 0:
            continue
        w = v.copy()
        for _ in range(2):
            for b in basis:
                w -= (b @ w) * b
        n1 = np.linalg.norm(w)
        if n1 < tol * n0:
            continue
        w /= n1
        basis.append(w)
        kept.append(i)
    if not basis:
        return np.zeros((0, np.asarray(rows).shape[-1] if np.ndim(rows) == 2 else 0)), kept
    return np.array(basis), kept


def orthonormalize(F: Sequence[PiecewisePoly], tol: float = RANK_TOL) -> list[PiecewisePoly]:
    """Orthonormal basis of span F by Gram-Schmidt, dropping dependent members.

    Each output is signed so that its first significant Legendre coefficient,
    scanning pieces left to right, is positive.
    """
    F = list(F)
    if not F:
        return []
    grid, ncoef, (st,) = _common_stack([F])
    q, _ = mgs_rows(st.embedded(), tol)
    if q.shape[0] == 0:
        return []
    coeffs = Stack.from_embedded(grid, q, ncoef).coeffs
    signs = np.array([np.sign(_sign_fix(c.ravel(), ncoef) @ c.ravel()) for c in coeffs])
    q = q * signs[:, None]
    return Stack.from_embedded(grid, q, ncoef).functions()


def embed(F: Sequence[PiecewisePoly], grid=None, ncoef=None):
    """Isometric coordinates of F on a shared grid: returns (grid, ncoef, rows)."""
    F = list(F)
    if grid is None:
        grid, ncoef, (st,) = _common_stack([F])
    else:
        st = Stack.of(F, grid, ncoef)
    return grid, st.coeffs.shape[2], st.embedded()


def rank(F: Sequence[PiecewisePoly], tol: float = RANK_TOL) -> int:
    """Numerical dimension of span F (singular values relative to the largest)."""
    F = [f for f in F if f.n_pieces]
    if not F:
        return 0
    _, _, rows = embed(F)
    s = np.linalg.svd(rows, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def span_residual(F: Sequence[PiecewisePoly], G: Sequence[PiecewisePoly]) -> float:
    """Largest relative residual of an element of F after projection onto span G."""
    F = [f for f in F if f.n_pieces]
    if not F:
        return 0.0
    G = orthonormalize(G)
    grid, ncoef, (sf, sg) = _common_stack([F, G]) if G else _common_stack([F, []])
    rows = sf.embedded()
    norms = np.linalg.norm(rows, axis=1)
    if G:
        q = sg.embedded()
        rows = rows - (rows @ q.T) @ q
    return float(np.max(np.linalg.norm(rows, axis=1) / np.where(norms > 0, norms, 1.0)))


def same_span(F, G, tol: float = 1e-8) -> bool:
    return span_residual(F, G) < tol and span_residual(G, F) < tol


def intersection_dim(F: Sequence[PiecewisePoly], G: Sequence[PiecewisePoly], cos_tol: float = RANK_TOL) -> int:
    """Dimension of span F ∩ span G, counted by principal angles with cosine > 1 - cos_tol."""
    qf = orthonormalize(F)
    qg = orthonormalize(G)
    if not qf or not qg:
        return 0
    s = np.linalg.svd(gram(qf, qg), compute_uv=False)
    return int(np.sum(s > 1.0 - cos_tol))


def intersection_basis(F, G, cos_tol: float = RANK_TOL) -> list[PiecewisePoly]:
    """Orthonormal basis of span F ∩ span G from the principal vectors."""
    qf = orthonormalize(F)
    qg = orthonormalize(G)
    if not qf or not qg:
        return []
    u, s, _ = np.linalg.svd(gram(qf, qg))
    k = int(np.sum(s > 1.0 - cos_tol))
    if k == 0:
        return []
    grid, ncoef, rows = embed(qf)
    vecs = u[:, :k].T @ rows
    return orthonormalize(Stack.from_embedded(grid, vecs, ncoef).functions())


def orthogonal_complement_in(F, G, tol: float = RANK_TOL) -> list[PiecewisePoly]:
    """Orthonormal basis of (I - P_G) span F, the residual of span F against span G."""
    F = list(F)
    G = orthonormalize(G)
    if not F:
        return []
    if not G:
        return orthonormalize(F, tol)
    grid, ncoef, (sf, sg) = _common_stack([F, G])
    rows = sf.embedded()
    q = sg.embedded()
    for _ in range(2):
        rows = rows - (rows @ q.T) @ q
    # SVD picks a well-conditioned basis even when residuals nearly coincide
    u, s, vt = np.linalg.svd(rows, full_matrices=False)
    scale = max(np.max(np.linalg.norm(sf.embedded(), axis=1)), 1e-300)
    k = int(np.sum(s > tol * scale))
    if k == 0:
        return []
    return orthonormalize(Stack.from_embedded(grid, vt[:k], ncoef).functions(), tol)


# ---------------------------------------------------------------------------
# explicit matrices


def orthonormal_row_basis(M, tol: float = RANK_TOL) -> np.ndarray:
    """Rows orthonormal with the same row span as M, found by Gram-Schmidt in row order.

    A row is dropped when its residual falls below ``tol * max(1, largest row norm)``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return np.zeros((0, M.shape[1] if M.ndim == 2 else 0))
    ref = max(1.0, float(np.max(np.linalg.norm(M, axis=1))))
    basis = []
    for v in M:
        w = v.copy()
        for _ in range(2):
            for b in basis:
                w -= (b @ w) * b
        n = np.linalg.norm(w)
        if n < tol * ref:
            continue
        basis.append(w / n)
    if not basis:
        return np.zeros((0, M.shape[1]))
    return np.array(basis)


def complete_to_orthogonal(M, n: int | None = None, tol: float = 1e-9) -> np.ndarray:
    """Extend orthonormal rows M to an n x n orthogonal matrix.

    New rows come from Gram-Schmidt on the canonical basis vectors in index
    order, skipping any whose residual is too small to be trusted.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if n is None:
        n = M.shape[1]
    if M.size == 0:
        M = np.zeros((0, n))
    if M.shape[1] != n or M.shape[0] > n:
        raise ContractError(f"cannot complete a {M.shape} matrix to {n} x {n}")
    if M.shape[0] and np.max(np.abs(M @ M.T - np.eye(M.shape[0]))) > tol:
        raise ContractError("rows are not orthonormal")
    rows = [r for r in M]
    for i in range(n):
        if len(rows) == n:
            break
        w = np.zeros(n)
        w[i] = 1.0
        for _ in range(2):
            for b in rows:
                w -= (b @ w) * b
        nw = np.linalg.norm(w)
        if nw < 1e-6:
            continue
        rows.append(w / nw)
    if len(rows) != n:
        raise ContractError("completion failed")
    return np.array(rows)
