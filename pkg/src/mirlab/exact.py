"""Exact second-stage oracles: rational simplex and branch-and-bound.

These are ground truth for everything else in the package, so they run in
exact Fraction arithmetic end to end.  Pivoting is Bland's rule on the fixed
column order, which makes every solve deterministic and cycle-free.  No
presolve, no scaling: instances are desk-scale by design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import BudgetExhausted, UnboundedError
from .linalg import Mat, Vec, dot, vec_frac

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LpSolution:
    value: Optional[Fraction]
    primal: Optional[Vec]
    dual: Optional[Vec]
    basis_columns: Optional[tuple[int, ...]]
    status: str


@dataclass
class MipSolution:
    value: Optional[Fraction]
    incumbent: Optional[Vec]
    node_count: int
    status: str


def _simplex(a: Mat, b: Vec, c: Vec):
    """Two-phase primal simplex for min c'x s.t. ax = b, x >= 0.

    Returns (status, x, value, dual, basis).  `dual` is the multiplier vector
    of the equality rows in their original orientation; `basis` the sorted
    structural column indices of the final basis.  Raises ValueError if the
    constraint rows are not linearly independent (full row rank required so
    the dual vector is well defined).
    """
    m = len(a)
    n = len(a[0]) if m else 0
    flip = [Fraction(-1) if b[i] < 0 else Fraction(1) for i in range(m)]
    # tableau columns: structural (n) + artificial (m) + rhs
    tab = [[a[i][j] * flip[i] for j in range(n)]
           + [Fraction(int(i == k)) for k in range(m)]
           + [b[i] * flip[i]]
           for i in range(m)]
    basis = [n + i for i in range(m)]

    def pivot(row, col):
        pr = tab[row]
        pv = pr[col]
        tab[row] = pr = [x / pv for x in pr]
        for i in range(m):
            if i != row and tab[i][col] != 0:
                f = tab[i][col]
                tab[i] = [x - f * y for x, y in zip(tab[i], pr)]
        basis[row] = col

    def run_phase(cost, allowed_end):
        # Bland's rule: lowest-index entering column with negative reduced
        # cost, lowest-index basic column on ratio ties.
        while True:
            cb = [cost[j] for j in basis]
            enter = -1
            for j in range(allowed_end):
                if j in basis:
                    continue
                red = cost[j] - sum(cb[i] * tab[i][j] for i in range(m))
                if red < 0:
                    enter = j
                    break
            if enter < 0:
                return True
            leave = -1
            best = None
            for i in range(m):
                aij = tab[i][enter]
                if aij > 0:
                    ratio = tab[i][-1] / aij
                    if best is None or ratio < best or (
                            ratio == best and basis[i] < basis[leave]):
                        best = ratio
                        leave = i
            if leave < 0:
                return False  # unbounded in the entering direction
            pivot(leave, enter)

    # phase 1: drive artificials to zero
    cost1 = [Fraction(0)] * n + [Fraction(1)] * m
    run_phase(cost1, n + m)
    resid = sum(tab[i][-1] for i in range(m) if basis[i] >= n)
    if resid > 0:
        return INFEASIBLE, None, None, None, None
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if j not in basis and tab[i][j] != 0), None)
            if col is None:
                raise ValueError("constraint rows are linearly dependent")
            pivot(i, col)

    # phase 2: original objective, artificials barred from entering
    cost2 = vec_frac(c) + [Fraction(0)] * m
    if not run_phase(cost2, n):
        return UNBOUNDED, None, None, None, None

    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        x[j] = tab[i][-1]
    value = dot(c, x)
    # artificial block of the tableau is B^{-1} of the sign-flipped system
    dual = [sum(c[basis[i]] * tab[i][n + k] for i in range(m)) * flip[k]
            for k in range(m)]
    return OPTIMAL, x, value, dual, tuple(sorted(basis))


def simplex_solve(a: Mat, b: Vec, c: Vec) -> LpSolution:
    """Solve min c'x s.t. ax = b, x >= 0 exactly."""
    status, x, value, dual, basis = _simplex(a, b, c)
    return LpSolution(value=value, primal=x, dual=dual,
                      basis_columns=basis, status=status)


def solve_lp(q: Sequence, s: Sequence, inst) -> LpSolution:
    """LP relaxation value of the second stage at cost q and right-hand side s.

    Unbounded status signals that q violates the sufficiently-expensive
    assumption; infeasible status signals that the continuous relaxation
    already lacks complete recourse at this s.
    """
    return simplex_solve(inst.W_frac, vec_frac(s), vec_frac(q))


@dataclass
class _Node:
    bounds: list  # (col, "le"/"ge", int bound)
    value: Fraction
    x: Vec


def _node_lp(a: Mat, b: Vec, c: Vec, bounds) -> LpSolution:
    if not bounds:
        return simplex_solve(a, b, c)
    m, n = len(a), len(a[0])
    k = len(bounds)
    big_a = [row[:] + [Fraction(0)] * k for row in a]
    big_b = b[:]
    for t, (col, sense, bnd) in enumerate(bounds):
        row = [Fraction(0)] * (n + k)
        row[col] = Fraction(1)
        row[n + t] = Fraction(1) if sense == "le" else Fraction(-1)
        big_a.append(row)
        big_b.append(Fraction(bnd))
    return simplex_solve(big_a, big_b, c + [Fraction(0)] * k)


def solve_milp(a: Mat, b: Vec, c: Vec, int_mask: Sequence[bool],
               node_budget: int = 10**6) -> MipSolution:
    """Exact branch-and-bound for min c'x s.t. ax = b, x >= 0, masked x integer.

    Depth-first; branches on the most fractional masked variable; when a node
    spawns two children both child LPs are solved up front and the better
    bound is explored first.  Node count = LP relaxations solved.
    """
    n = len(a[0])
    root = _node_lp(a, b, c, [])
    nodes = 1
    if root.status == UNBOUNDED:
        raise UnboundedError("LP relaxation is unbounded")
    if root.status == INFEASIBLE:
        return MipSolution(None, None, nodes, INFEASIBLE)

    def frac_var(x):
        pick, score = -1, Fraction(0)
        for j in range(n):
            if int_mask[j]:
                f = x[j] - math.floor(x[j])
                if f != 0:
                    sc = min(f, 1 - f)
                    if sc > score:
                        pick, score = j, sc
        return pick

    best_val: Optional[Fraction] = None
    best_x: Optional[Vec] = None
    stack = [( [], root )]
    while stack:
        bounds, sol = stack.pop()
        if best_val is not None and sol.value >= best_val:
            continue
        j = frac_var(sol.primal)
        if j < 0:
            if best_val is None or sol.value < best_val:
                best_val, best_x = sol.value, sol.primal[:n]
            continue
        lo = math.floor(sol.primal[j])
        children = []
        for sense, bnd in (("le", lo), ("ge", lo + 1)):
            if nodes >= node_budget:
                raise BudgetExhausted(f"node budget {node_budget} exhausted")
            nodes += 1
            nb = bounds + [(j, sense, bnd)]
            child = _node_lp(a, b, c, nb)
            if child.status == OPTIMAL and (best_val is None or child.value < best_val):
                children.append((nb, child))
        # worse bound pushed first so the better child is expanded next
        children.sort(key=lambda t: t[1].value, reverse=True)
        stack.extend(children)
    if best_val is None:
        return MipSolution(None, None, nodes, INFEASIBLE)
    return MipSolution(best_val, best_x, nodes, OPTIMAL)


def _lattice_infeasible(a: Mat, b: Vec, int_mask: Sequence[bool]) -> bool:
    """Cheap certificate of mixed-integer infeasibility.

    A row whose support is entirely integer-constrained forces b_i to be a
    multiple of the gcd of its coefficients; W is integer so this is exact.
    """
    for i, row in enumerate(a):
        support = [j for j, v in enumerate(row) if v != 0]
        if support and all(int_mask[j] for j in support):
            g = 0
            for j in support:
                g = math.gcd(g, abs(int(row[j])))
            if g and (b[i] / g).denominator != 1:
                return True
    return False


def solve_mip(q: Sequence, s: Sequence, inst, node_budget: int = 10**6) -> MipSolution:
    """Exact mixed-integer value of the second stage at (q, s)."""
    a = inst.W_frac
    b = vec_frac(s)
    if _lattice_infeasible(a, b, inst.integer_mask):
        return MipSolution(None, None, 0, INFEASIBLE)
    return solve_milp(a, b, vec_frac(q), inst.integer_mask, node_budget)


def positively_spans(cols: list[Vec], m: int) -> bool:
    """True iff the nonnegative hull of `cols` is all of R^m.

    Tested by phase-1 feasibility of +-e_i for every axis, which is exact and
    sufficient because the hull is a convex cone.
    """
    if not cols:
        return False
    a = [[cols[j][i] for j in range(len(cols))] for i in range(m)]
    for i in range(m):
        for sgn in (1, -1):
            rhs = [Fraction(0)] * m
            rhs[i] = Fraction(sgn)
            if simplex_solve(a, rhs, [Fraction(0)] * len(cols)).status != OPTIMAL:
                return False
    return True


def check_recourse_assumptions(inst, q_probe: Sequence) -> tuple[bool, bool]:
    """(bounded, feasible_cone_spans) at the probe cost vector.

    bounded <=> the dual region {lam : lam' W <= q} is nonempty, checked via
    boundedness of the LP at s = 0; feasible_cone_spans <=> the columns of W
    positively span R^m.
    """
    zero = [Fraction(0)] * inst.m
    bounded = solve_lp(q_probe, zero, inst).status == OPTIMAL
    cols = [[inst.W_frac[i][j] for i in range(inst.m)] for j in range(inst.n)]
    return bounded, positively_spans(cols, inst.m)
