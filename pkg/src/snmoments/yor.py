"""Young orthogonal form: concrete real orthogonal matrices for S_n irreps.

Conventions fixed here and relied on everywhere downstream:

* basis order is last-letter order as produced by ``standard_tableaux``;
* the axial distance for the adjacent transposition (j, j+1) acting on a
  tableau T is  r = contents(T)[j] - contents(T)[j-1]  (content of the box
  holding j+1 minus content of the box holding j);
* (j, j+1) maps the basis vector of T to (1/r) v_T + sqrt(1 - 1/r^2) v_T'
  where T' is T with j and j+1 exchanged, and the mixing coefficient is
  taken positive for both members of the pair.  When T' is not standard
  the action is the pure sign 1/r (which is then +-1).

With these choices every adjacent matrix is symmetric, orthogonal and has
at most two nonzeros per row, so it is stored as (diag, partner, off)
vectors rather than as a dense matrix.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .partitions import Partition, StandardTableau, contents, standard_tableaux


@dataclass(frozen=True)
class PairMix:
    """Symmetric orthogonal matrix with <= 2 nonzeros per row.

    Row i carries diag[i] on the diagonal and off[i] in column partner[i];
    rows without an off-diagonal element have partner[i] == i, off[i] == 0.
    """

    diag: np.ndarray
    partner: np.ndarray
    off: np.ndarray

    @property
    def dim(self) -> int:
        return self.diag.shape[0]

    def to_dense(self) -> np.ndarray:
        M = np.diag(self.diag.copy())
        rows = np.arange(self.dim)
        M[rows, self.partner] += self.off
        return M

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Matrix-vector product along the first axis of x."""
        shape = (-1,) + (1,) * (x.ndim - 1)
        return self.diag.reshape(shape) * x + self.off.reshape(shape) * x[self.partner]


@dataclass(frozen=True)
class IrrepAction:
    """Matrix realization of one irrep: adjacent-transposition mixes plus
    the integer Jucys-Murphy diagonals."""

    shape: Partition
    dim: int
    basis: tuple[StandardTableau, ...]
    adj: tuple[PairMix, ...]          # tau_j = (j, j+1), j = 1..n-1
    yjm: np.ndarray                   # (n, dim) int64; row j-1 is diag of X_j

    @property
    def n(self) -> int:
        return self.shape.n


def build_irrep(shape: Partition, n: int) -> IrrepAction:
    """Construct the Young orthogonal form action of S_n on the irrep."""
    if shape.n != n:
        raise ValueError(f"shape {shape} has {shape.n} boxes, expected {n}")
    basis = standard_tableaux(shape)
    dim = len(basis)
    index = {t: i for i, t in enumerate(basis)}
    conts = np.array([contents(t) for t in basis], dtype=np.int64)

    mixes = []
    for j in range(1, n):
        diag = np.zeros(dim)
        off = np.zeros(dim)
        partner = np.arange(dim, dtype=np.int64)
        for i, t in enumerate(basis):
            r = int(conts[i, j] - conts[i, j - 1])
            diag[i] = 1.0 / r
            swapped = _swap_entries(t, j)
            if swapped is not None:
                partner[i] = index[swapped]
                off[i] = math.sqrt(1.0 - 1.0 / r**2)
        mixes.append(PairMix(diag, partner, off))

    # X_j diagonal = content of the box holding j; row 0 (X_1) is zero.
    yjm = np.ascontiguousarray(conts.T)
    return IrrepAction(shape=shape, dim=dim, basis=basis, adj=tuple(mixes), yjm=yjm)


def _swap_entries(t: StandardTableau, j: int) -> StandardTableau | None:
    """Tableau with j and j+1 exchanged, or None if not standard.

    The swap fails to be standard exactly when j and j+1 share a row or a
    column, i.e. when the axial distance is +-1.
    """
    (ri, ci) = t.position(j)
    (rj, cj) = t.position(j + 1)
    if ri == rj or ci == cj:
        return None
    rows = [list(r) for r in t.rows]
    rows[ri][ci], rows[rj][cj] = j + 1, j
    return StandardTableau(tuple(tuple(r) for r in rows))


def transposition_matrix(rep: IrrepAction, i: int, j: int) -> np.ndarray:
    """Dense matrix of the general transposition (i, j), 1 <= i < j <= n.

    Built by the conjugation chain (i,j) = t_{j-1} ... t_{i+1} t_i t_{i+1}
    ... t_{j-1}; the result is symmetric, orthogonal and involutive.
    """
    if not (1 <= i < j <= rep.n):
        raise IndexError(f"transposition ({i},{j}) out of range for n={rep.n}")
    M = rep.adj[i - 1].to_dense()
    for a in range(i + 1, j):
        A = rep.adj[a - 1]
        M = A.apply(A.apply(M).T).T
    return M


def yjm_matrix(rep: IrrepAction, j: int) -> np.ndarray:
    """Integer diagonal of the Jucys-Murphy element X_j = sum_{i<j} (i,j)."""
    if not (1 <= j <= rep.n):
        raise IndexError(f"X_{j} out of range for n={rep.n}")
    return rep.yjm[j - 1]


def central_sum_eigenvalue(shape: Partition) -> int:
    """Scalar by which sum_j X_j (the sum of all transpositions) acts.

    Equals the sum of col - row over all boxes of the shape.
    """
    return sum(j - i for i, p in enumerate(shape.parts) for j in range(p))


def to_json(rep: IrrepAction) -> str:
    """Debug export: shape, basis rows, and adjacent matrices as (i, j, v)."""
    mats = []
    for mix in rep.adj:
        coords = []
        for i in range(rep.dim):
            coords.append([i, i, mix.diag[i]])
            if mix.partner[i] != i:
                coords.append([i, int(mix.partner[i]), mix.off[i]])
        mats.append(coords)
    doc = {
        "shape": list(rep.shape.parts),
        "dim": rep.dim,
        "basis": [[list(row) for row in t.rows] for t in rep.basis],
        "adjacent_transpositions": mats,
        "yjm_diagonals": rep.yjm.tolist(),
    }
    return json.dumps(doc, indent=2)
