"""Convex approximations of the second-stage value function and Monte Carlo
estimators of the recourse function built on them.

Pointwise evaluators go through the exact rational machinery.  The Monte
Carlo paths are vectorized in float: the mixed-integer oracle is realized by
enumerating integer parts over a box certified by the integer-programming
proximity bound (||z* - z_lp||_inf <= n * Delta(W), Cook-Gerards-Schrijver-
Tardos), with the continuous remainder solved by dual-vertex enumeration.
The tests cross-check every vectorized path against the rational oracles.

Determinism contract: scenario i under seed s is a pure function of (s, i),
all reductions are numpy einsum/sum with fixed operand order, so identical
(seed, n) give bit-identical estimates regardless of batching.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact
from .bases import enumerate_bases, dual_feasible_indices, dual_vertex
from .distributions import derive_seed, draw_batch
from .errors import EmptyDualSet, InfeasibleError, MirlabError
from .linalg import det, dot, inv, null_vector, rank, to_frac, vec_frac
from .periodic import PeriodicComponent, pieces_for, psi_exact, reduced_costs

_TOL = 1e-9


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int


# ---------------------------------------------------------------------------
# pointwise evaluators


def v_hat(q: Sequence, s: Sequence, components: list[PeriodicComponent]) -> float:
    """Shifted LP-relaxation value: max_k lam_k's + Gamma_k (convex in s)."""
    if not components:
        raise EmptyDualSet("no components supplied")
    sf = [float(v) for v in s]
    best = -math.inf
    for comp in components:
        val = sum(float(l) * v for l, v in zip(comp.lam, sf)) + comp.gamma
        if val > best:
            best = val
    return best


def v_alpha(q: Sequence, h: Sequence, tx: Sequence, alpha: Sequence, inst,
            bases=None) -> float:
    """Anchored approximation: max_k lam_k'(h - tx) + psi_k(h - alpha).

    h and tx enter separately by design; the periodic remainder is frozen at
    the anchored point, which makes the result convex in tx.
    """
    bases = bases if bases is not None else enumerate_bases(inst)
    qf = vec_frac(q)
    feas = dual_feasible_indices(qf, bases, inst)
    if not feas:
        raise EmptyDualSet("no dual feasible basis for this cost vector")
    hf, txf, af = vec_frac(h), vec_frac(tx), vec_frac(alpha)
    diff = [a - b for a, b in zip(hf, txf)]
    anchored = [a - b for a, b in zip(hf, af)]
    best = None
    for k in feas:
        val = dot(dual_vertex(qf, bases[k]), diff) + psi_exact(bases[k], qf, anchored, inst)
        if best is None or val > best:
            best = val
    return float(best)


# ---------------------------------------------------------------------------
# vectorized scenario evaluation


class _ExactPrep:
    """Per-instance data for the box-enumeration oracle."""

    def __init__(self, inst):
        self.inst = inst
        self.int_cols = [j for j in range(inst.n) if inst.integer_mask[j]]
        self.cont_cols = [j for j in range(inst.n) if not inst.integer_mask[j]]
        m = inst.m
        w = inst.W_frac
        self.W_int = np.array([[float(w[i][j]) for j in self.int_cols] for i in range(m)])
        wc = [[w[i][j] for j in self.cont_cols] for i in range(m)]
        self.W_cont = np.array([[float(v) for v in r] for r in wc]) if self.cont_cols else None
        self.supported = bool(self.cont_cols)
        if self.supported:
            gens = [[wc[i][j] for i in range(m)] for j in range(len(self.cont_cols))]
            self.supported = rank(gens) == m
            if self.supported:
                self.facets = _cone_facets(gens, m)
                self.cont_bases = []
                for cols in itertools.combinations(range(len(self.cont_cols)), m):
                    sub = [[wc[i][j] for j in cols] for i in range(m)]
                    try:
                        sub_inv = inv(sub)
                    except ValueError:
                        continue
                    self.cont_bases.append(
                        (list(cols), np.array([[float(v) for v in r] for r in sub_inv])))
                self.supported = bool(self.cont_bases)
        bases = enumerate_bases(inst)
        self.max_binv = max((abs(float(v)) for basis in bases for row in basis.B_inv for v in row),
                            default=1.0)
        self.delta = float(max_subdeterminant(inst))
        # reduced-cost maps of every basis of W: boundedness of the LP is
        # equivalent to some basis being dual feasible (W has full row rank)
        self.mmats = []
        for basis in bases:
            rc = reduced_costs(basis, [0] * inst.n, inst)
            self.mmats.append(np.array([[float(v) for v in row] for row in rc.M]))

    def int_box(self, smax: float) -> int:
        return int(math.ceil(self.max_binv * self.inst.m * smax + self.inst.n * self.delta)) + 1


def _cone_facets(gens, m: int) -> np.ndarray:
    """Outer facet normals of the full-dimensional cone spanned by `gens`;
    empty array when the generators positively span R^m."""
    cand = []
    if m == 1:
        cand = [[Fraction(1)], [Fraction(-1)]]
    else:
        for sub in itertools.combinations(gens, m - 1):
            vec = null_vector([list(g) for g in sub], m)
            if vec is None:
                continue
            cand.append(vec)
            cand.append([-v for v in vec])
    facets = []
    for a in cand:
        if all(dot(a, g) <= 0 for g in gens) and any(v != 0 for v in a):
            key = tuple(a)
            if key not in {tuple(f) for f in facets}:
                facets.append(a)
    if not facets:
        return np.zeros((0, m))
    return np.array([[float(v) for v in a] for a in facets])


def max_subdeterminant(inst) -> int:
    """Exact max |det| over all square submatrices of W."""
    w = inst.W_frac
    best = 0
    for k in range(1, inst.m + 1):
        for rows in itertools.combinations(range(inst.m), k):
            for cols in itertools.combinations(range(inst.n), k):
                d = abs(det([[w[i][j] for j in cols] for i in rows]))
                best = max(best, int(d))
    return best


def _exact_prep(inst) -> _ExactPrep:
    if "exact_prep" not in inst._cache:
        inst._cache["exact_prep"] = _ExactPrep(inst)
    return inst._cache["exact_prep"]


def _exact_values_vec(inst, Q: np.ndarray, S: np.ndarray) -> np.ndarray:
    prep = _exact_prep(inst)
    if not prep.supported:
        return _exact_values_loop(inst, Q, S)
    ns, m = S.shape
    smax = float(np.max(np.abs(S))) if ns else 0.0
    ubox = prep.int_box(smax)
    n_int = len(prep.int_cols)
    ncand = (ubox + 1) ** n_int
    if ncand > 300_000:
        raise MirlabError(f"integer enumeration box too large ({ncand} candidates); "
                          "right-hand sides out of desk scale")
    if n_int:
        grids = np.meshgrid(*([np.arange(ubox + 1.0)] * n_int), indexing="ij")
        y_int = np.stack([g.ravel() for g in grids], axis=1)
    else:
        y_int = np.zeros((1, 0))
    q_cont = Q[:, prep.cont_cols]
    q_int = Q[:, prep.int_cols]
    w_cont = prep.W_cont

    # the LP must be bounded: some basis of the full W dual feasible
    feas_full = np.zeros(ns, dtype=bool)
    for mmat in prep.mmats:
        qbar = np.einsum("sn,nk->sk", Q, mmat)
        feas_full |= (np.all(qbar >= -_TOL, axis=1) if qbar.shape[1]
                      else np.ones(ns, dtype=bool))
    if not np.all(feas_full):
        bad = int(np.argmin(feas_full))
        raise EmptyDualSet(f"no dual feasible basis for scenario {bad}")

    # scenario-wise feasible dual vertices of the continuous relaxation
    lams, feas_lam = [], []
    for cols, sub_inv in prep.cont_bases:
        lam = np.einsum("si,ij->sj", q_cont[:, cols], sub_inv)
        slack = q_cont - np.einsum("sj,ji->si", lam, w_cont)
        lams.append(lam)
        feas_lam.append(np.all(slack >= -_TOL, axis=1))

    out = np.empty(ns)
    chunk = max(1, 4_000_000 // max(1, ncand * m))
    shift_int = np.einsum("ci,mi->cm", y_int, prep.W_int)   # [ncand, m]
    for lo in range(0, ns, chunk):
        sl = slice(lo, min(ns, lo + chunk))
        r = S[sl][:, None, :] - shift_int[None, :, :]       # [s, c, m]
        if prep.facets.shape[0]:
            member = np.all(np.einsum("fm,scm->scf", prep.facets, r) <= _TOL, axis=2)
        else:
            member = np.ones(r.shape[:2], dtype=bool)
        vc = np.full(r.shape[:2], np.inf)
        best = np.full(r.shape[:2], -np.inf)
        for lam, fl in zip(lams, feas_lam):
            contrib = np.einsum("sm,scm->sc", lam[sl], r)
            contrib = np.where(fl[sl][:, None], contrib, -np.inf)
            best = np.maximum(best, contrib)
        vc = np.where(member, best, np.inf)
        cost = np.einsum("si,ci->sc", q_int[sl], y_int) + vc
        out[sl] = np.min(cost, axis=1)
    if not np.all(np.isfinite(out)):
        bad = int(np.argmax(~np.isfinite(out)))
        raise InfeasibleError(f"no feasible second stage within the certified box "
                              f"(scenario {bad}); recourse incomplete?")
    return out


def _exact_values_loop(inst, Q: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Rational-oracle fallback for structures the vectorized path skips."""
    out = np.empty(S.shape[0])
    for i in range(S.shape[0]):
        sol = exact.solve_mip([Fraction(v) for v in Q[i]],
                              [Fraction(v) for v in S[i]], inst)
        if sol.status != exact.OPTIMAL:
            raise InfeasibleError(f"scenario {i} has no feasible second stage")
        out[i] = float(sol.value)
    return out


class _BasisPrep:
    def __init__(self, inst, gamma_res: int):
        self.entries = []
        for basis in enumerate_bases(inst):
            binv = np.array([[float(v) for v in row] for row in basis.B_inv])
            rc = reduced_costs(basis, [0] * inst.n, inst)
            mmat = np.array([[float(v) for v in row] for row in rc.M])
            pieces = pieces_for(inst, basis)
            try:
                summary = pieces.grid_summary(gamma_res)
            except InfeasibleError:
                summary = None
            masked = np.array(pieces.masked_rows, dtype=int)
            self.entries.append((basis, binv, mmat, summary, pieces, masked))


def _basis_prep(inst, gamma_res: int) -> _BasisPrep:
    key = ("basis_prep", gamma_res)
    if key not in inst._cache:
        inst._cache[key] = _BasisPrep(inst, gamma_res)
    return inst._cache[key]


def _shifted_values_vec(inst, Q: np.ndarray, S: np.ndarray, gamma_res: int) -> np.ndarray:
    prep = _basis_prep(inst, gamma_res)
    ns = S.shape[0]
    best = np.full(ns, -np.inf)
    any_feas = np.zeros(ns, dtype=bool)
    for basis, binv, mmat, summary, _, _ in prep.entries:
        qbar = np.einsum("sn,nk->sk", Q, mmat)
        feas = (np.all(qbar >= -_TOL, axis=1) if qbar.shape[1]
                else np.ones(ns, dtype=bool))
        if not np.any(feas):
            continue
        if summary is None:
            raise InfeasibleError("dual feasible basis without a defined period mean; "
                                  "recourse incomplete")
        lam = np.einsum("si,im->sm", Q[:, basis.columns], binv)
        gam = summary.gamma_batch(qbar)
        val = np.einsum("sm,sm->s", lam, S) + gam
        best = np.where(feas & (val > best), val, best)
        any_feas |= feas
    if not np.all(any_feas):
        bad = int(np.argmin(any_feas))
        raise EmptyDualSet(f"no dual feasible basis for scenario {bad}")
    return best


def _alpha_values_vec(inst, Q: np.ndarray, H: np.ndarray, TX: np.ndarray,
                      gamma_res: int) -> np.ndarray:
    prep = _basis_prep(inst, gamma_res)
    alpha = np.array([float(v) for v in inst.alpha])
    anchored = H - alpha[None, :]
    diff = H - TX
    ns = H.shape[0]
    best = np.full(ns, -np.inf)
    any_feas = np.zeros(ns, dtype=bool)
    for basis, binv, mmat, _, pieces, masked in prep.entries:
        qbar = np.einsum("sn,nk->sk", Q, mmat)
        feas = (np.all(qbar >= -_TOL, axis=1) if qbar.shape[1]
                else np.ones(ns, dtype=bool))
        if not np.any(feas):
            continue
        if pieces.mI:
            t = np.einsum("sm,km->sk", anchored, binv[masked, :])
            res = t - np.floor(t)
        else:
            res = np.zeros((ns, 0))
        psi = pieces.psi_batch(res, qbar)
        if np.any(feas & ~np.isfinite(psi)):
            raise InfeasibleError("anchored remainder undefined; recourse incomplete")
        lam = np.einsum("si,im->sm", Q[:, basis.columns], binv)
        val = np.einsum("sm,sm->s", lam, diff) + psi
        best = np.where(feas & (val > best), val, best)
        any_feas |= feas
    if not np.all(any_feas):
        bad = int(np.argmin(any_feas))
        raise EmptyDualSet(f"no dual feasible basis for scenario {bad}")
    return best


def scenario_values(inst, x: Sequence, which: str, Q: np.ndarray, T, H: np.ndarray,
                    gamma_res: int = 1024) -> np.ndarray:
    """Per-scenario second-stage values at first-stage point x."""
    xs = np.array([float(v) for v in x])
    if isinstance(T, np.ndarray) and T.ndim == 3:
        tx = np.einsum("smk,k->sm", T, xs)
    else:
        tmat = np.asarray(T, dtype=float)
        tx = np.broadcast_to(np.einsum("mk,k->m", tmat, xs), H.shape)
    s = H - tx
    if which == "exact":
        return _exact_values_vec(inst, Q, s)
    if which == "shifted":
        return _shifted_values_vec(inst, Q, s, gamma_res)
    if which == "alpha":
        return _alpha_values_vec(inst, Q, H, np.asarray(tx), gamma_res)
    raise ValueError(f"unknown evaluator {which!r}")


def _check_h_continuous(inst):
    # DistributionSpec already enforces this; re-checked here because the
    # estimators are meaningless for atoms in h
    from .distributions import _CONTINUOUS
    for i, marg in enumerate(inst.dist.h):
        if not isinstance(marg, _CONTINUOUS):
            raise MirlabError(f"h must be continuous (marginal {i})")


def estimate_recourse(x: Sequence, inst, which: str, n: int, seed: int,
                      gamma_res: int = 1024) -> Estimate:
    """Monte Carlo estimate of the expected second-stage cost at x.

    which selects the integrand: the exact value function, the shifted
    LP-relaxation approximation, or the anchored approximation.  Scenario i
    is a pure function of (seed, i); estimates are therefore reproducible
    across runs and batch sizes.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if which not in ("exact", "shifted", "alpha"):
        raise ValueError(f"unknown evaluator {which!r}")
    _check_h_continuous(inst)
    Q, T, H = draw_batch(inst.dist, seed, 0, n)
    vals = scenario_values(inst, x, which, Q, T, H, gamma_res)
    mean = float(np.sum(vals) / n)
    sd = float(np.sqrt(np.sum((vals - mean) ** 2) / (n - 1)))
    return Estimate(mean=mean, std_error=sd / math.sqrt(n), n_samples=n, seed=seed)


@dataclass
class SupErrorResult:
    sup: float
    argmax_x: list
    per_x: list            # (Estimate, Estimate) pairs in x_grid order
    sup_se: float          # paired standard error of the gap at the argmax


_PAIRS = {"exact_vs_shifted": ("exact", "shifted"),
          "exact_vs_alpha": ("exact", "alpha")}


def sup_error_on_grid(inst, which_pair: str, x_grid: Sequence, n: int, seed: int,
                      gamma_res: int = 1024) -> SupErrorResult:
    """Largest absolute gap between two recourse estimators over a grid of x.

    Both estimators at a grid point share the same scenarios (common random
    numbers, so the gap is a paired estimate); different grid points use
    independent sub-streams derived from the seed.
    """
    if which_pair not in _PAIRS:
        raise ValueError(f"invalid pair {which_pair!r}; expected one of {sorted(_PAIRS)}")
    if not x_grid:
        raise ValueError("x_grid must be nonempty")
    _check_h_continuous(inst)
    mode_a, mode_b = _PAIRS[which_pair]
    sup, sup_se, arg = -1.0, 0.0, None
    per_x = []
    for xi, x in enumerate(x_grid):
        xv = [to_frac(v) for v in (x if isinstance(x, (list, tuple)) else [x])]
        if any(v < lo or v > hi for v, lo, hi in zip(xv, inst.x_lo, inst.x_hi)):
            raise ValueError(f"grid point {x} outside the first-stage box")
        sub = derive_seed(seed, xi)
        Q, T, H = draw_batch(inst.dist, sub, 0, n)
        va = scenario_values(inst, xv, mode_a, Q, T, H, gamma_res)
        vb = scenario_values(inst, xv, mode_b, Q, T, H, gamma_res)
        ma = float(np.sum(va) / n)
        mb = float(np.sum(vb) / n)
        per_x.append((
            Estimate(ma, float(np.sqrt(np.sum((va - ma) ** 2) / (n - 1))) / math.sqrt(n), n, sub),
            Estimate(mb, float(np.sqrt(np.sum((vb - mb) ** 2) / (n - 1))) / math.sqrt(n), n, sub),
        ))
        gap = abs(ma - mb)
        d = va - vb
        md = ma - mb
        se = float(np.sqrt(np.sum((d - md) ** 2) / (n - 1))) / math.sqrt(n)
        if gap > sup:
            sup, sup_se, arg = gap, se, list(x if isinstance(x, (list, tuple)) else [x])
    return SupErrorResult(sup=sup, argmax_x=arg, per_x=per_x, sup_se=sup_se)
