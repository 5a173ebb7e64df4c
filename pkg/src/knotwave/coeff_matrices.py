"""Scaling and wavelet coefficient matrices for a nested pair of orthonormal bases.

With Φ¹ regrouped onto the knots of Φ⁰, every coarse group Φ⁰_a and every
wavelet group Ψ_a expands over Φ¹_{a-} and Φ¹_a only.  The blocks

    c^{xy}_{aa'} = <x-functions of Φ⁰_a, y-functions of Φ¹_{a'}>,   x, y ∈ {bar, breve}

(and the analogous d blocks for Ψ) are computed as Gram blocks.  Nonzero
(bar, breve) blocks factor as c = e b with b having orthonormal rows; the
rows of b applied to Φ̆¹ give orthonormal bases of the A^± spaces.  Over a
run of knots the blocks assemble into a square orthogonal matrix M.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .centered import CenteredBasis, regroup
from .errors import ContractError
from .linalg import RANK_TOL, gram, orthonormal_row_basis
from .piecewise import PiecewisePoly, linear_combination

FLAVOURS = ("bar", "breve")


@dataclass(frozen=True)
class CoeffBlock:
    kind: str
    row_flavour: str
    col_flavour: str
    from_knot: int
    to_knot: int
    matrix: np.ndarray
    row_labels: tuple = ()
    col_labels: tuple = ()

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def is_empty(self) -> bool:
        return self.matrix.size == 0

    def to_json(self, knot_class: str = "") -> dict:
        """Table form; empty row or column label lists drop the block entirely."""
        return {
            "knot_class": knot_class,
            "kind": self.kind,
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "values": [[float(v) for v in row] for row in self.matrix],
        }


def _on_common_knots(phi0: CenteredBasis, phi1: CenteredBasis) -> CenteredBasis:
    w0, w1 = phi0.window, phi1.window
    if len(w0) == len(w1) and np.allclose(w0.array, w1.array, rtol=0, atol=1e-12 * w0.scale):
        return phi1
    return regroup(phi1, w0)


def _flavour(B: CenteredBasis, i: int, flavour: str):
    if i < 0 or i >= len(B.window):
        return [], ()
    if flavour == "bar":
        return list(B.bar[i]), B.bar_names[i]
    return list(B.breve[i]), B.breve_names[i]


def _gram_block(F, G) -> np.ndarray:
    if not F or not G:
        return np.zeros((len(F), len(G)))
    return gram(F, G)


def _blocks(kind: str, rows: CenteredBasis, phi1: CenteredBasis, i: int) -> dict:
    out = {}
    for target in (i - 1, i):
        for rf in FLAVOURS:
            F, fn = _flavour(rows, i, rf)
            for cf in FLAVOURS:
                G, gn = _flavour(phi1, target, cf)
                out[(rf, cf, target)] = CoeffBlock(kind, rf, cf, i, target, _gram_block(F, G), tuple(fn), tuple(gn))
    return out


def c_blocks(phi0: CenteredBasis, phi1: CenteredBasis, i: int) -> dict:
    """All c^{xy}_{a a'} for a' ∈ {a-, a}, keyed by (row flavour, column flavour, a' index)."""
    return _blocks("c", phi0, _on_common_knots(phi0, phi1), i)


def d_blocks(psi: CenteredBasis, phi1: CenteredBasis, i: int) -> dict:
    """The wavelet analogue of ``c_blocks``."""
    return _blocks("d", psi, _on_common_knots(psi, phi1), i)


def be_factor(block: CoeffBlock, tol: float = RANK_TOL) -> tuple[CoeffBlock, CoeffBlock]:
    """Split c = e b with b having orthonormal rows spanning the rows of c.

    A zero block gives empty factors.
    """
    if block.kind != "c" or (block.row_flavour, block.col_flavour) != ("bar", "breve"):
        raise ContractError("be_factor applies to (bar, breve) scaling blocks")
    c = block.matrix
    b = orthonormal_row_basis(c, tol) if c.size else np.zeros((0, c.shape[1]))
    e = c @ b.T
    labels = tuple(f"alpha{j}" for j in range(b.shape[0]))
    eb = CoeffBlock("e", "bar", "breve", block.from_knot, block.to_knot, e, block.row_labels, labels)
    bb = CoeffBlock("b", "bar", "breve", block.from_knot, block.to_knot, b, labels, block.col_labels)
    return eb, bb


def alpha_functions(b: CoeffBlock, phi1: CenteredBasis) -> list[PiecewisePoly]:
    """b applied to the breve functions of Φ¹ at the block's target knot."""
    G = list(phi1.breve[b.to_knot])
    return [linear_combination(row, G) for row in b.matrix]


def _b(phi0, phi1, i, target):
    if i < 0 or i >= len(phi0.window) or target < 0:
        return np.zeros((0, 0))
    blk = c_blocks(phi0, phi1, i)[("bar", "breve", target)]
    return be_factor(blk)[1].matrix


def c_row(phi0: CenteredBasis, phi1: CenteredBasis, i: int) -> np.ndarray:
    """[c^{bar breve}_{aa-}  c^{bar bar}_{aa}  c^{bar breve}_{aa}]; its rows are orthonormal."""
    blk = c_blocks(phi0, phi1, i)
    return np.hstack([blk[("bar", "breve", i - 1)].matrix, blk[("bar", "bar", i)].matrix, blk[("bar", "breve", i)].matrix])


def e_row(phi0: CenteredBasis, phi1: CenteredBasis, i: int) -> np.ndarray:
    """[e_{aa-}  c^{bar bar}_{aa}  e_{aa}]; its rows are orthonormal."""
    blk = c_blocks(phi0, phi1, i)
    parts = []
    for key in (("bar", "breve", i - 1), ("bar", "bar", i), ("bar", "breve", i)):
        if key[1] == "breve":
            parts.append(be_factor(blk[key])[0].matrix)
        else:
            parts.append(blk[key].matrix)
    return np.hstack(parts)


def _local_matrix(blk: dict, i: int) -> np.ndarray:
    """[[x^{bar breve}_{aa-}, x^{bar bar}_{aa}, x^{bar breve}_{aa}], [0, 0, x^{breve breve}_{aa}]]."""
    top = np.hstack([blk[("bar", "breve", i - 1)].matrix, blk[("bar", "bar", i)].matrix, blk[("bar", "breve", i)].matrix])
    bb = blk[("breve", "breve", i)].matrix
    nb1 = blk[("bar", "breve", i - 1)].matrix.shape[1] + blk[("bar", "bar", i)].matrix.shape[1]
    bottom = np.hstack([np.zeros((bb.shape[0], nb1)), bb])
    return np.vstack([top, bottom])


def _column_layout(phi1: CenteredBasis, i0: int, i1: int):
    """Column offsets for Φ̆¹_{i0}, Φ̄¹_{i0+1}, Φ̆¹_{i0+1}, ..., Φ̆¹_{i1-1}."""
    cols = {}
    pos = 0
    for j in range(i0, i1):
        if j > i0:
            cols[("bar", j)] = (pos, pos + len(phi1.bar[j]))
            pos += len(phi1.bar[j])
        cols[("breve", j)] = (pos, pos + len(phi1.breve[j]))
        pos += len(phi1.breve[j])
    return cols, pos


def assemble_M(phi0: CenteredBasis, phi1: CenteredBasis, psi: CenteredBasis, i0: int, i1: int) -> np.ndarray:
    """The square matrix taking Φ¹ on [a_{i0}, a_{i1}] to α⁺_{i0}, Φ⁰, Ψ and α⁻_{i1}.

    Rows: α⁺ of the first knot, the scaling rows c_{[a,b]}, the wavelet rows
    d_{[a,b]}, then α⁻ of the last knot.  It is orthogonal whenever the inputs
    are orthonormal and nested.
    """
    n = len(phi0.window)
    if i1 - i0 < 2 or i0 < 0 or i1 >= n:
        raise ContractError("[a, b] must contain at least three knots of the window")
    phi1 = _on_common_knots(phi0, phi1)
    cols, width = _column_layout(phi1, i0, i1)

    def place(mat, start):
        row = np.zeros((mat.shape[0], width))
        row[:, start:start + mat.shape[1]] = mat
        return row

    def run(blocks_of):
        rows = []
        first = blocks_of(i0)[("breve", "breve", i0)].matrix
        rows.append(place(first, cols[("breve", i0)][0]))
        for j in range(i0 + 1, i1):
            loc = _local_matrix(blocks_of(j), j)
            rows.append(place(loc, cols[("breve", j - 1)][0]))
        return rows

    out = [place(_b(phi0, phi1, i0, i0), cols[("breve", i0)][0])]
    out += run(lambda j: c_blocks(phi0, phi1, j))
    out += run(lambda j: d_blocks(psi, phi1, j))
    out.append(place(_b(phi0, phi1, i1, i1 - 1), cols[("breve", i1 - 1)][0]))
    return np.vstack([r for r in out if r.shape[0]])


def ghat_gtilde(phi0: CenteredBasis, phi1: CenteredBasis, i: int, tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal rows for Ŵ_a and W̃_a in the coordinates [Φ̆¹_{a-}, Φ̄¹_a, Φ̆¹_a]."""
    phi1 = _on_common_knots(phi0, phi1)
    if not phi0.bar[i] or i == 0:
        return np.zeros((0, 0)), np.zeros((0, 0))
    blk = c_blocks(phi0, phi1, i)
    cm, cbb, cp = (blk[("bar", "breve", i - 1)].matrix, blk[("bar", "bar", i)].matrix, blk[("bar", "breve", i)].matrix)
    C = np.hstack([cm, cbb, cp])
    raw = np.hstack([-cbb.T @ cm, np.eye(cbb.shape[1]) - cbb.T @ cbb, -cbb.T @ cp])
    ghat = orthonormal_row_basis(raw, tol)
    bm = be_factor(blk[("bar", "breve", i - 1)])[1].matrix
    bp = be_factor(blk[("bar", "breve", i)])[1].matrix
    B = np.vstack([
        np.hstack([bm, np.zeros((bm.shape[0], cbb.shape[1] + cp.shape[1]))]),
        np.hstack([np.zeros((bp.shape[0], cm.shape[1] + cbb.shape[1])), bp]),
    ])
    G = np.vstack([C, ghat])
    gtilde = orthonormal_row_basis(B @ (np.eye(C.shape[1]) - G.T @ G), tol)
    return ghat, gtilde


def local_functions(phi1: CenteredBasis, i: int) -> list[PiecewisePoly]:
    """[Φ̆¹_{a-}, Φ̄¹_a, Φ̆¹_a], the column functions of the local coefficient rows."""
    return phi1.local(i)


def row_span_residual(A: np.ndarray, B: np.ndarray) -> float:
    """Two-sided residual between the row spans of two coefficient matrices."""
    if A.size == 0 and B.size == 0:
        return 0.0
    if A.size == 0 or B.size == 0:
        return 1.0

    def one(X, Y):
        q = orthonormal_row_basis(Y)
        r = X - (X @ q.T) @ q
        return float(np.max(np.linalg.norm(r, axis=1) / np.maximum(np.linalg.norm(X, axis=1), 1e-300)))

    return max(one(A, B), one(B, A))
