"""Candidate dual bases of W: enumeration, vertices, cones, LP by enumeration.

Every nonsingular m-column submatrix is kept as a candidate, which is the
conservative finite superset of the dual-feasible index sets over all cost
vectors: any such basis is dual feasible for some q, and filtering per q is
an exact rational test.  Exponential in m by design; desk scale only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import EmptyDualSet
from .linalg import Mat, Vec, det, dot, inv, to_frac, vec_frac, vec_mat


@dataclass(frozen=True)
class DualBasis:
    index: int
    columns: tuple              # ordered column indices into W
    B: tuple                    # m x m integer submatrix (row tuples)
    B_inv: tuple                # exact inverse (row tuples of Fractions)
    p: int                      # |det B|, a positive integer for integer W
    N_columns: tuple            # complementary column indices, ascending

    def b_inv_mat(self) -> Mat:
        return [list(r) for r in self.B_inv]

    def b_mat(self) -> Mat:
        return [list(r) for r in self.B]


def enumerate_bases(inst) -> list[DualBasis]:
    """All nonsingular m-column submatrices of W in lexicographic order."""
    if "bases" in inst._cache:
        return inst._cache["bases"]
    out = []
    w = inst.W_frac
    for cols in itertools.combinations(range(inst.n), inst.m):
        b = [[w[i][j] for j in cols] for i in range(inst.m)]
        d = det(b)
        if d == 0:
            continue
        ncols = tuple(j for j in range(inst.n) if j not in cols)
        out.append(DualBasis(
            index=len(out),
            columns=cols,
            B=tuple(tuple(r) for r in b),
            B_inv=tuple(tuple(r) for r in inv(b)),
            p=int(abs(d)),
            N_columns=ncols,
        ))
    inst._cache["bases"] = out
    return out


def dual_vertex(q: Sequence, basis: DualBasis) -> Vec:
    """lam = q_B' B^{-1}, the dual vertex attached to the basis (exact)."""
    qf = vec_frac(q)
    q_b = [qf[j] for j in basis.columns]
    return vec_mat(q_b, basis.b_inv_mat())


def dual_feasible_indices(q: Sequence, bases: list[DualBasis], inst) -> list[int]:
    """Indices k with lam_k' W <= q' componentwise (exact rational test)."""
    qf = vec_frac(q)
    w = inst.W_frac
    out = []
    for basis in bases:
        lam = dual_vertex(qf, basis)
        if all(sum(lam[i] * w[i][j] for i in range(inst.m)) <= qf[j]
               for j in range(inst.n)):
            out.append(basis.index)
    return out


def cone_margin_contains(basis: DualBasis, s: Sequence, d) -> bool:
    """Does the closed euclidean ball of radius d around s fit in the cone?

    The cone is {s : B^{-1} s >= 0}; rowwise the ball condition reads
    (B^{-1} s)_i >= d * ||row_i(B^{-1})||_2, tested exactly by squaring.
    """
    df = to_frac(d)
    if df < 0:
        raise ValueError("margin must be nonnegative")
    sf = vec_frac(s)
    for row in basis.B_inv:
        lhs = dot(row, sf)
        if lhs < 0:
            return False
        if lhs * lhs < df * df * dot(row, row):
            return False
    return True


def lp_by_enumeration(q: Sequence, s: Sequence, bases: list[DualBasis], inst) -> Fraction:
    """max over dual feasible bases of lam_k' s; exact, ties by lowest index."""
    qf, sf = vec_frac(q), vec_frac(s)
    feas = dual_feasible_indices(qf, bases, inst)
    if not feas:
        raise EmptyDualSet("no dual feasible basis for this cost vector")
    best = None
    for k in feas:
        val = dot(dual_vertex(qf, bases[k]), sf)
        if best is None or val > best:
            best = val
    return best
