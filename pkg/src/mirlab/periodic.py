"""Gomory relaxations per basis: periodic remainders, their means, constants.

For a basis B the relaxation drops the sign requirement on basic variables
while keeping every integrality requirement.  Its value splits into an affine
part lam's and a remainder psi(s) >= 0 that depends on s only through the
fractional parts of (B^{-1}s) on integer-constrained basic rows, and is
therefore B-periodic.  Two evaluation routes are provided and cross-checked
in the tests:

* an exact branch-and-bound route (ground truth, Fraction arithmetic,
  memoized on the residue class), and
* a q-independent piecewise-affine candidate structure used to average psi
  over a period cell and to evaluate it in bulk inside Monte Carlo runs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import exact
from .bases import DualBasis, cone_margin_contains, dual_feasible_indices, dual_vertex, enumerate_bases
from .distributions import derive_seed, uniform_stream
from .errors import InfeasibleError, MirlabError, UnboundedError
from .linalg import Mat, Vec, dot, frac_part, inv, mat_mul, rank, to_frac, vec_frac

_FEAS_TOL = 1e-9


# ---------------------------------------------------------------------------
# reduced costs


@dataclass(frozen=True)
class ReducedCosts:
    """Nonbasic reduced costs together with the matrix M with q̄' = q'M."""

    values: tuple          # length n - m
    M: tuple               # n x (n - m), row tuples of Fractions


def _nonbasic_matrix(inst, basis: DualBasis) -> Mat:
    return [[inst.W_frac[i][j] for j in basis.N_columns] for i in range(inst.m)]


def reduced_costs(basis: DualBasis, q: Sequence, inst) -> ReducedCosts:
    qf = vec_frac(q)
    m, nbar = inst.m, len(basis.N_columns)
    binv_n = mat_mul(basis.b_inv_mat(), _nonbasic_matrix(inst, basis))
    rows = [[Fraction(0)] * nbar for _ in range(inst.n)]
    for t, col in enumerate(basis.N_columns):
        rows[col][t] = Fraction(1)
    for i, col in enumerate(basis.columns):
        for t in range(nbar):
            rows[col][t] = -binv_n[i][t]
    lam = dual_vertex(qf, basis)
    direct = [qf[col] - dot(lam, [inst.W_frac[i][col] for i in range(m)])
              for col in basis.N_columns]
    via_m = [sum(qf[i] * rows[i][t] for i in range(inst.n)) for t in range(nbar)]
    if direct != via_m:
        raise AssertionError("reduced-cost factorization mismatch")
    return ReducedCosts(values=tuple(direct), M=tuple(tuple(r) for r in rows))


def gamma2_constant(inst) -> Fraction:
    """Exact max over bases of p * ||M 1||_inf; zero when no nonbasic columns."""
    best = Fraction(0)
    for basis in enumerate_bases(inst):
        if not basis.N_columns:
            continue
        rc = reduced_costs(basis, [0] * inst.n, inst)
        norm = max(abs(sum(row)) for row in rc.M)
        best = max(best, basis.p * norm)
    return best


def qbar_between(basis_k: DualBasis, basis_l: DualBasis, q: Sequence, inst) -> Vec:
    """Componentwise (lam_k - lam_l)' B^k_i: zero on columns shared with
    basis l, otherwise the reduced cost of that column with respect to l."""
    qf = vec_frac(q)
    lam_k = dual_vertex(qf, basis_k)
    lam_l = dual_vertex(qf, basis_l)
    diff = [a - b for a, b in zip(lam_k, lam_l)]
    out = []
    for i in range(inst.m):
        col = [basis_k.B[r][i] for r in range(inst.m)]
        out.append(dot(diff, col))
    return out


# ---------------------------------------------------------------------------
# exact route


def _masked_rows(inst, basis: DualBasis) -> list[int]:
    return [i for i, col in enumerate(basis.columns) if inst.integer_mask[col]]


def _residue_key(basis: DualBasis, masked_rows, s: Vec) -> tuple:
    return tuple(frac_part(dot(basis.B_inv[i], s)) for i in masked_rows)


def _gomory_exact(basis: DualBasis, q: Vec, s: Vec, inst,
                  node_budget: int = 200_000) -> Fraction:
    """Exact relaxation value via branch-and-bound on a split formulation.

    Basic variables are written u - w with certified box caps; nonbasic
    variables are capped at p.  The cap never cuts the optimum: shifting a
    nonbasic component down by p moves the basic part by an integer vector
    and cannot raise the cost while reduced costs are nonnegative.
    """
    m, nbar = inst.m, len(basis.N_columns)
    p = Fraction(basis.p)
    rc = reduced_costs(basis, q, inst)
    if any(v < 0 for v in rc.values):
        raise UnboundedError("basis is not dual feasible for q; relaxation unbounded")
    binv_s = [dot(basis.B_inv[i], s) for i in range(m)]
    binv_n = mat_mul(basis.b_inv_mat(), _nonbasic_matrix(inst, basis))
    ubu, ubw = [], []
    for i in range(m):
        lo = binv_s[i] + sum(min(-binv_n[i][j] * p, Fraction(0)) for j in range(nbar))
        hi = binv_s[i] + sum(max(-binv_n[i][j] * p, Fraction(0)) for j in range(nbar))
        ubu.append(Fraction(max(0, math.ceil(hi))))
        ubw.append(Fraction(max(0, math.ceil(-lo))))

    nmat = _nonbasic_matrix(inst, basis)
    ncols = 2 * m + nbar            # u, w, y_N
    ncaps = nbar + 2 * m
    a: Mat = []
    b: Vec = []
    for i in range(m):
        row = [Fraction(basis.B[i][k]) for k in range(m)]
        row += [-Fraction(basis.B[i][k]) for k in range(m)]
        row += [nmat[i][j] for j in range(nbar)]
        row += [Fraction(0)] * ncaps
        a.append(row)
        b.append(s[i])
    for j in range(nbar):
        row = [Fraction(0)] * (ncols + ncaps)
        row[2 * m + j] = Fraction(1)
        row[ncols + j] = Fraction(1)
        a.append(row)
        b.append(p)
    for i in range(m):
        for off, ub in ((0, ubu[i]), (m, ubw[i])):
            row = [Fraction(0)] * (ncols + ncaps)
            row[off + i] = Fraction(1)
            row[ncols + nbar + off + i] = Fraction(1)
            a.append(row)
            b.append(ub)

    cost = [q[col] for col in basis.columns]
    cost += [-q[col] for col in basis.columns]
    cost += [q[col] for col in basis.N_columns]
    cost += [Fraction(0)] * ncaps
    mask = [inst.integer_mask[col] for col in basis.columns] * 2
    mask += [inst.integer_mask[col] for col in basis.N_columns]
    mask += [False] * ncaps

    sol = exact.solve_milp(a, b, cost, mask, node_budget)
    if sol.status != exact.OPTIMAL:
        raise InfeasibleError("Gomory relaxation infeasible at this right-hand side")
    return sol.value


def _psi_cache(inst, basis: DualBasis, q: Vec) -> tuple[dict, Fraction]:
    norm = sum(abs(v) for v in q)
    if norm == 0:
        norm = Fraction(1)
    qn = tuple(v / norm for v in q)
    cache = inst._cache.setdefault(("psi", basis.index, qn), {})
    return cache, norm


def psi_exact(basis: DualBasis, q: Sequence, s: Sequence, inst) -> Fraction:
    """Exact periodic remainder: relaxation value minus lam's.

    Memoized on the residue class of B^{-1}s over integer-constrained basic
    rows, and on q up to positive scaling (the remainder is 1-homogeneous in
    q), so shifted or rescaled queries are exact cache hits.
    """
    qf, sf = vec_frac(q), vec_frac(s)
    masked = _masked_rows(inst, basis)
    cache, norm = _psi_cache(inst, basis, qf)
    qn = [v / norm for v in qf]
    key = _residue_key(basis, masked, sf)
    if key not in cache:
        lam = dual_vertex(qn, basis)
        cache[key] = _gomory_exact(basis, qn, sf, inst) - dot(lam, sf)
    return cache[key] * norm


def gomory_value(basis: DualBasis, q: Sequence, s: Sequence, inst) -> Fraction:
    """Exact value of the relaxation that frees the basic variables' sign."""
    qf, sf = vec_frac(q), vec_frac(s)
    return dot(dual_vertex(qf, basis), sf) + psi_exact(basis, qf, sf, inst)


def psi_value(basis: DualBasis, q: Sequence, s: Sequence, inst) -> float:
    return float(psi_exact(basis, q, s, inst))


# ---------------------------------------------------------------------------
# q-independent candidate structure


@dataclass(frozen=True)
class _Candidate:
    y0: tuple                  # constant part, length nbar
    ylin: tuple                # nbar rows of mI residue coefficients
    eq0: tuple = ()            # affine expressions that must vanish
    eqlin: tuple = ()


class GomoryPieces:
    """Candidate optima of the remainder problem as affine maps of the
    residue vector r = frac(B^{-1}s) on integer-constrained basic rows.

    The remainder minimizes nonnegative reduced costs over a finite union of
    boxes-with-equalities, so for every r the optimum sits at one of finitely
    many vertices whose coordinates are affine in r.  Enumerating integer
    assignments, lattice offsets and vertex patterns once per basis makes psi
    and its period-cell average cheap functions of the reduced costs alone.
    """

    CANDIDATE_CAP = 20_000

    def __init__(self, inst, basis: DualBasis):
        self.inst = inst
        self.basis = basis
        self.p = basis.p
        self.masked_rows = _masked_rows(inst, basis)
        self.mI = len(self.masked_rows)
        self.nbar = len(basis.N_columns)
        self.candidates = self._prune(self._enumerate())
        self._float_arrays = None
        self._summaries: dict = {}

    # -- enumeration ------------------------------------------------------
    def _enumerate(self) -> list[_Candidate]:
        inst, basis = self.inst, self.basis
        nbar, mI, p = self.nbar, self.mI, Fraction(self.p)
        zero = tuple(Fraction(0) for _ in range(nbar))
        zlin = tuple(tuple(Fraction(0) for _ in range(mI)) for _ in range(nbar))
        if mI == 0:
            # no integrality on basic rows: y_N = 0 is optimal outright
            return [_Candidate(zero, zlin)]

        a_full = mat_mul(basis.b_inv_mat(), _nonbasic_matrix(inst, basis))
        a_i = [a_full[i] for i in self.masked_rows]          # mI x nbar
        j_int = [j for j, col in enumerate(basis.N_columns) if inst.integer_mask[col]]
        j_c = [j for j in range(nbar) if j not in j_int]
        nc = len(j_c)
        a_c = [[a_i[i][j] for j in j_c] for i in range(mI)]
        rho = rank(a_c) if nc else 0
        ident = [[Fraction(int(i == j)) for j in range(mI)] for i in range(mI)]

        out: dict = {}

        def add(y0, ylin, eq0=(), eqlin=()):
            cand = _Candidate(tuple(y0), tuple(tuple(r) for r in ylin),
                              tuple(eq0), tuple(tuple(r) for r in eqlin))
            out[cand] = None
            if len(out) > self.CANDIDATE_CAP:
                raise MirlabError("period-cell candidate enumeration too large; "
                                  "matrix coefficients out of desk scale")

        for assign in itertools.product(range(self.p + 1), repeat=len(j_int)):
            base = [sum(a_i[i][j_int[t]] * assign[t] for t in range(len(j_int)))
                    for i in range(mI)]
            lo = [sum(min(a_c[i][j] * p, Fraction(0)) for j in range(nc)) for i in range(mI)]
            hi = [sum(max(a_c[i][j] * p, Fraction(0)) for j in range(nc)) for i in range(mI)]
            kranges = [range(math.floor(lo[i] + base[i]) - 1,
                             math.ceil(hi[i] + base[i]) + 2) for i in range(mI)]
            for kappa in itertools.product(*kranges):
                # continuous columns must supply tau_i(r) = r_i + t0_i
                t0 = [Fraction(kappa[i]) - base[i] for i in range(mI)]
                y_base = [Fraction(0)] * nbar
                for t, j in enumerate(j_int):
                    y_base[j] = Fraction(assign[t])
                if nc == 0:
                    add(y_base, [[Fraction(0)] * mI for _ in range(nbar)],
                        eq0=t0, eqlin=ident)
                    continue
                for f_cols in itertools.combinations(range(nc), rho):
                    rsel, sub_inv = None, None
                    for rows in itertools.combinations(range(mI), rho):
                        sub = [[a_c[i][j] for j in f_cols] for i in rows]
                        try:
                            sub_inv = inv(sub) if rho else []
                        except ValueError:
                            continue
                        rsel = rows
                        break
                    if rsel is None:
                        continue
                    rest = [j for j in range(nc) if j not in f_cols]
                    for bpat in itertools.product((Fraction(0), p), repeat=len(rest)):
                        rhs0 = [t0[i] - sum(a_c[i][rest[u]] * bpat[u] for u in range(len(rest)))
                                for i in rsel]
                        yf0 = [dot(sub_inv[v], rhs0) for v in range(rho)]
                        yflin = []
                        for v in range(rho):
                            row = [Fraction(0)] * mI
                            for w, i in enumerate(rsel):
                                row[i] = sub_inv[v][w]
                            yflin.append(row)
                        y0 = list(y_base)
                        ylin = [[Fraction(0)] * mI for _ in range(nbar)]
                        for u, jj in enumerate(rest):
                            y0[j_c[jj]] = bpat[u]
                        for v, jj in enumerate(f_cols):
                            y0[j_c[jj]] = yf0[v]
                            ylin[j_c[jj]] = yflin[v]
                        eq0, eqlin = [], []
                        for i in range(mI):
                            if i in rsel:
                                continue
                            c0 = sum(a_c[i][f_cols[v]] * yf0[v] for v in range(rho))
                            c0 += sum(a_c[i][rest[u]] * bpat[u] for u in range(len(rest)))
                            c0 -= t0[i]
                            clin = [Fraction(0)] * mI
                            clin[i] = Fraction(-1)
                            for v in range(rho):
                                for w in range(mI):
                                    clin[w] += a_c[i][f_cols[v]] * yflin[v][w]
                            eq0.append(c0)
                            eqlin.append(clin)
                        add(y0, ylin, eq0, eqlin)
        return list(out.keys())

    def _prune(self, cands: list[_Candidate]) -> list[_Candidate]:
        """Drop candidates whose box window is empty for every r in [0,1]^mI."""
        p = Fraction(self.p)
        kept = []
        for c in cands:
            ok = True
            for comp in range(self.nbar):
                lo = c.y0[comp] + sum(min(v, Fraction(0)) for v in c.ylin[comp])
                hi = c.y0[comp] + sum(max(v, Fraction(0)) for v in c.ylin[comp])
                if hi < 0 or lo > p:
                    ok = False
                    break
            if ok:
                kept.append(c)
        return kept

    # -- float views --------------------------------------------------------
    def float_arrays(self):
        if self._float_arrays is None:
            plain = [c for c in self.candidates if not c.eq0]
            eqs = [c for c in self.candidates if c.eq0]
            y0 = (np.array([[float(v) for v in c.y0] for c in plain])
                  if plain else np.zeros((0, self.nbar)))
            ylin = (np.array([[[float(v) for v in row] for row in c.ylin] for c in plain])
                    if plain else np.zeros((0, self.nbar, self.mI)))
            eq_view = []
            for c in eqs:
                eq_view.append((
                    np.array([float(v) for v in c.y0]).reshape(1, self.nbar),
                    np.array([float(v) for row in c.ylin for v in row]
                             ).reshape(1, self.nbar, self.mI),
                    np.array([float(v) for v in c.eq0]),
                    np.array([float(v) for row in c.eqlin for v in row]
                             ).reshape(len(c.eq0), self.mI),
                ))
            self._float_arrays = (y0, ylin, eq_view)
        return self._float_arrays

    def candidate_values(self, res: np.ndarray):
        """(values [ns, ncand, nbar], feasibility [ns, ncand]) at residues."""
        y0, ylin, eq_view = self.float_arrays()
        res = np.atleast_2d(np.asarray(res, dtype=float))
        ns = res.shape[0]
        if self.mI and y0.shape[0]:
            vals = y0[None, :, :] + np.einsum("cnk,sk->scn", ylin, res)
        else:
            vals = np.broadcast_to(y0[None, :, :], (ns,) + y0.shape).copy()
        feas = np.all((vals >= -_FEAS_TOL) & (vals <= self.p + _FEAS_TOL), axis=2)
        blocks = [(vals, feas)]
        for ey0, eylin, e0, elin in eq_view:
            ev = ey0[None, :, :] + np.einsum("cnk,sk->scn", eylin, res)
            resid = e0[None, :] + np.einsum("sk,ek->se", res, elin)
            ef = (np.all(np.abs(resid) <= _FEAS_TOL, axis=1, keepdims=True)
                  & np.all((ev >= -_FEAS_TOL) & (ev <= self.p + _FEAS_TOL), axis=2))
            blocks.append((ev, ef))
        vals = np.concatenate([blk[0] for blk in blocks], axis=1)
        feas = np.concatenate([blk[1] for blk in blocks], axis=1)
        return vals, feas

    def psi_batch(self, res: np.ndarray, qbar: np.ndarray) -> np.ndarray:
        """Remainder values at float residues; +inf where no candidate fits."""
        vals, feas = self.candidate_values(res)
        qbar = np.asarray(qbar, dtype=float)
        if qbar.ndim == 1:
            costs = np.einsum("scn,n->sc", vals, qbar)
        else:
            costs = np.einsum("scn,sn->sc", vals, qbar)
        costs = np.where(feas, costs, np.inf)
        if costs.shape[1] == 0:
            return np.full(vals.shape[0], np.inf)
        return np.min(costs, axis=1)

    # -- period-cell grids --------------------------------------------------
    def _grid_residues(self, resolution: int):
        m, mI = self.inst.m, self.mI
        if mI == 0:
            return np.zeros((1, 0)), np.array([float(resolution ** m)])
        dens, nums = [], []
        for i in self.masked_rows:
            row = self.basis.B_inv[i]
            den = 1
            for v in row:
                den = den * v.denominator // math.gcd(den, v.denominator)
            dens.append(2 * resolution * den)
            nums.append([int(v * den) for v in row])
        odd = 2 * np.arange(resolution, dtype=np.int64) + 1
        acc = None
        for t in range(m):
            shape = [1] * (m + 1)
            shape[1 + t] = resolution
            coef = np.array([n[t] for n in nums], dtype=np.int64).reshape([mI] + [1] * m)
            term = coef * odd.reshape(shape)
            acc = term if acc is None else acc + term
        flat = (acc * self.p).reshape(mI, -1)
        mods = np.array(dens, dtype=np.int64)[:, None]
        flat = np.mod(flat, mods)
        uniq, counts = np.unique(flat.T, axis=0, return_counts=True)
        res = uniq.astype(np.float64) / np.array(dens, dtype=np.float64)[None, :]
        return res, counts.astype(np.float64)

    def grid_summary(self, resolution: int) -> "_GridSummary":
        if resolution < 1:
            raise ValueError("resolution must be positive")
        if resolution in self._summaries:
            return self._summaries[resolution]
        res, counts = self._grid_residues(resolution)
        total = float(resolution ** self.inst.m)
        vals, feas = self.candidate_values(res)
        nfeas = feas.sum(axis=1)
        if np.any(nfeas == 0):
            raise InfeasibleError("remainder undefined somewhere on the period cell; "
                                  "recourse is not complete for this basis")
        if np.all(nfeas == 1):
            idx = np.argmax(feas, axis=1)
            chosen = vals[np.arange(vals.shape[0]), idx, :]
            gbar = np.einsum("k,kn->n", counts, chosen) / total
            summary = _GridSummary(linear=True, gbar=gbar, vals=None,
                                   feas=None, weights=None, total=total)
        else:
            summary = _GridSummary(linear=False, gbar=None, vals=vals,
                                   feas=feas, weights=counts, total=total)
        self._summaries[resolution] = summary
        return summary


@dataclass
class _GridSummary:
    linear: bool
    gbar: Optional[np.ndarray]
    vals: Optional[np.ndarray]
    feas: Optional[np.ndarray]
    weights: Optional[np.ndarray]
    total: float

    def gamma(self, qbar_f: np.ndarray) -> float:
        if self.linear:
            return float(np.einsum("n,n->", self.gbar, qbar_f))
        costs = np.einsum("kcn,n->kc", self.vals, qbar_f)
        costs = np.where(self.feas, costs, np.inf)
        return float(np.einsum("k,k->", self.weights, np.min(costs, axis=1)) / self.total)

    def gamma_batch(self, qbar: np.ndarray) -> np.ndarray:
        qbar = np.asarray(qbar, dtype=float)
        if self.linear:
            return np.einsum("sn,n->s", qbar, self.gbar)
        nk, nc = self.feas.shape
        out = np.empty(qbar.shape[0])
        chunk = max(1, 4_000_000 // max(1, nk * nc))
        for lo in range(0, qbar.shape[0], chunk):
            part = qbar[lo:lo + chunk]
            costs = np.einsum("kcn,sn->kcs", self.vals, part)
            costs = np.where(self.feas[:, :, None], costs, np.inf)
            out[lo:lo + chunk] = np.einsum("k,ks->s", self.weights,
                                           np.min(costs, axis=1)) / self.total
        return out


def pieces_for(inst, basis: DualBasis) -> GomoryPieces:
    key = ("pieces", basis.index)
    if key not in inst._cache:
        inst._cache[key] = GomoryPieces(inst, basis)
    return inst._cache[key]


# ---------------------------------------------------------------------------
# period-cell mean and components


def default_resolution(m: int) -> int:
    return 4096 if m == 1 else 512


def gamma_mean(basis: DualBasis, q: Sequence, inst,
               resolution: Optional[int] = None) -> tuple[float, float]:
    """Midpoint-grid average of psi over [0, p)^m with `resolution` points per
    axis; the error indicator is the change from the half-resolution grid."""
    if resolution is None:
        resolution = default_resolution(inst.m)
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    qf = vec_frac(q)
    rc = reduced_costs(basis, qf, inst)
    if any(v < 0 for v in rc.values):
        raise UnboundedError("basis is not dual feasible for q")
    qbar_f = np.array([float(v) for v in rc.values])
    pieces = pieces_for(inst, basis)
    g_hi = pieces.grid_summary(resolution).gamma(qbar_f)
    g_lo = pieces.grid_summary(max(1, resolution // 2)).gamma(qbar_f)
    return g_hi, abs(g_hi - g_lo)


@dataclass
class PeriodicComponent:
    basis_index: int
    lam: Vec
    gamma: float
    gamma_err: float
    period: int


def build_components(inst, q: Sequence, resolution: Optional[int] = None) -> list[PeriodicComponent]:
    """(lam_k, Gamma_k) for every dual feasible basis at this cost vector.

    Cached per instance keyed on q up to positive scaling: the dual feasible
    set is scale-invariant and both pieces scale linearly, so rescaled cost
    vectors are exact cache hits.
    """
    qf = vec_frac(q)
    norm = sum(abs(v) for v in qf)
    if norm == 0:
        norm = Fraction(1)
    qn = tuple(v / norm for v in qf)
    key = ("components", qn, resolution)
    if key not in inst._cache:
        bases = enumerate_bases(inst)
        comps = []
        for k in dual_feasible_indices(qn, bases, inst):
            g, err = gamma_mean(bases[k], qn, inst, resolution)
            comps.append(PeriodicComponent(
                basis_index=k,
                lam=dual_vertex(qn, bases[k]),
                gamma=g,
                gamma_err=err,
                period=bases[k].p,
            ))
        inst._cache[key] = comps
    scale = float(norm)
    return [PeriodicComponent(c.basis_index,
                              [v * norm for v in c.lam],
                              c.gamma * scale,
                              c.gamma_err * scale,
                              c.period)
            for c in inst._cache[key]]


# ---------------------------------------------------------------------------
# empirical on-cone margin


def probe_points(basis: DualBasis, d, count: int, seed: int, span: int = 6) -> list[Vec]:
    """Deterministic rational points s = B t with the whole euclidean ball of
    radius d around s inside the cone of the basis."""
    df = to_frac(d)
    binv = basis.b_inv_mat()
    # certified upper bounds on the row norms keep the margin test exact
    lower = []
    for row in binv:
        nf = math.sqrt(float(dot(row, row)))
        lower.append(df * Fraction(math.ceil(nf * 2 ** 20) + 1, 2 ** 20))
    pts: list[Vec] = []
    i = 0
    while len(pts) < count:
        t = []
        for k in range(len(binv)):
            u = float(uniform_stream(seed, i, k))
            t.append(lower[k] + Fraction(u).limit_denominator(256) * span * (1 + df))
        s = [dot([Fraction(basis.B[r][c]) for c in range(len(t))], t)
             for r in range(len(t))]
        i += 1
        if cone_margin_contains(basis, s, df):
            pts.append(s)
        if i > 50 * count:
            raise RuntimeError("could not place probes inside the cone margin")
    return pts


def empirical_margin(basis: DualBasis, q: Sequence, inst,
                     probe_count: int = 100, seed: int = 17,
                     ladder=(0, 1, 2, 4, 8)) -> Optional[int]:
    """Smallest ladder multiplier c such that v(s) = lam's + psi(s) holds
    exactly on all probes at euclidean margin c * p; None if no level works."""
    qf = vec_frac(q)
    lam = dual_vertex(qf, basis)
    for c in ladder:
        d = Fraction(c) * basis.p
        ok = True
        for s in probe_points(basis, d, probe_count, derive_seed(seed, c)):
            v = exact.solve_mip(qf, s, inst)
            if v.status != exact.OPTIMAL:
                ok = False
                break
            if v.value != dot(lam, s) + psi_exact(basis, qf, s, inst):
                ok = False
                break
        if ok:
            return c
    return None
