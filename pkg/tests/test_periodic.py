"""Gomory relaxation remainders, means, reduced costs, and the pieces."""

import itertools
from fractions import Fraction as F

import numpy as np
import pytest

from mirlab import exact
from mirlab.bases import dual_feasible_indices, dual_vertex, enumerate_bases
from mirlab.errors import UnboundedError
from mirlab.linalg import dot, vec_frac
from mirlab.periodic import (build_components, empirical_margin, gamma2_constant,
                             gamma_mean, gomory_value, pieces_for, probe_points,
                             psi_exact, psi_value, qbar_between, reduced_costs)
from tests.conftest import rand_frac


def test_gomory_examples(e1):
    b = enumerate_bases(e1)
    assert gomory_value(b[0], [1, 1], [F(1, 2)], e1) == F(3, 2)
    assert gomory_value(b[1], [1, 1], [F(1, 2)], e1) == F(-1, 2)
    assert gomory_value(b[0], [1, 1], [2], e1) == 2


def test_gomory_unbounded_for_infeasible_basis(e1):
    b = enumerate_bases(e1)
    with pytest.raises(UnboundedError):
        gomory_value(b[0], [1, -2], [F(1, 2)], e1)


def test_psi_examples(e1):
    b = enumerate_bases(e1)
    assert psi_value(b[0], [1, 1], [F(1, 2)], e1) == 1.0
    assert psi_value(b[0], [1, 1], [3], e1) == 0.0
    assert psi_value(b[1], [1, 1], [F(-7, 10)], e1) == 0.0


def test_reduced_costs_examples(e1, e3):
    b1 = enumerate_bases(e1)
    rc = reduced_costs(b1[0], [1, 1], e1)
    assert rc.values == (F(2),)
    assert rc.M == ((F(1),), (F(1),))
    rc = reduced_costs(b1[1], [1, 1], e1)
    assert rc.values == (F(2),)
    b3 = enumerate_bases(e3)
    rc = reduced_costs(b3[0], [1, 1, 1, 1], e3)
    assert rc.values == (F(2), F(2))


def test_reduced_costs_nonnegative_iff_feasible(e3):
    blist = enumerate_bases(e3)
    for i in range(60):
        q = [rand_frac(31, i, k, -1, 3) for k in range(4)]
        feas = set(dual_feasible_indices(q, blist, e3))
        for basis in blist:
            rc = reduced_costs(basis, q, e3)
            assert (all(v >= 0 for v in rc.values)) == (basis.index in feas)


def test_gamma_examples(e1, e3):
    b1 = enumerate_bases(e1)
    g, err = gamma_mean(b1[0], [1, 1], e1, 4096)
    assert abs(g - 1.0) <= 1e-3 and err <= 1e-3
    g, err = gamma_mean(b1[1], [1, 1], e1, 4096)
    assert g == 0.0
    b3 = enumerate_bases(e3)
    g, err = gamma_mean(b3[0], [1, 1, 1, 1], e3, 512)
    assert abs(g - 2.0) <= 1e-2


def test_gamma2_exact(e1, e3, w2):
    assert gamma2_constant(e1) == 1
    assert gamma2_constant(e3) == 1
    assert gamma2_constant(w2) == 0


def test_qbar_between(e1, e3):
    b1 = enumerate_bases(e1)
    assert qbar_between(b1[0], b1[1], [1, 1], e1) == [F(2)]
    assert qbar_between(b1[0], b1[0], [1, 1], e1) == [F(0)]
    b3 = enumerate_bases(e3)
    assert qbar_between(b3[0], b3[1], [1, 1, 1, 1], e3) == [F(0), F(2)]


def test_qbar_matches_casewise_rule(e3):
    blist = enumerate_bases(e3)
    q = [F(5, 2), F(2), F(1, 3), F(1)]
    for bk, bl in itertools.permutations(blist, 2):
        gap = qbar_between(bk, bl, q, e3)
        rc_l = reduced_costs(bl, q, e3)
        for i, col in enumerate(bk.columns):
            if col in bl.columns:
                assert gap[i] == 0
            else:
                j = bl.N_columns.index(col)
                assert gap[i] == rc_l.values[j]


def test_periodicity_exact(e1, e3):
    for inst, q in ((e1, [1, 1]), (e3, [1, 1, 1, 1])):
        blist = enumerate_bases(inst)
        for k in dual_feasible_indices(q, blist, inst):
            basis = blist[k]
            for s in probe_points(basis, 2 * basis.p, 20, seed=5):
                base = psi_exact(basis, q, s, inst)
                for ell in itertools.product((-1, 0, 1), repeat=inst.m):
                    shifted = [s[i] + sum(F(basis.B[i][j]) * ell[j] for j in range(inst.m))
                               for i in range(inst.m)]
                    assert psi_exact(basis, q, shifted, inst) == base


def test_on_cone_identity(e1, e3):
    for inst, q in ((e1, [1, 1]), (e3, [1, 1, 1, 1])):
        blist = enumerate_bases(inst)
        for k in dual_feasible_indices(q, blist, inst):
            assert empirical_margin(blist[k], q, inst, probe_count=25) is not None


def test_psi_bounds(e3):
    blist = enumerate_bases(e3)
    q = [F(2), F(1), F(3, 2), F(1)]
    for k in dual_feasible_indices(q, blist, e3):
        basis = blist[k]
        rc = reduced_costs(basis, q, e3)
        cap = sum(v * basis.p for v in rc.values)
        for i in range(40):
            s = [rand_frac(32, i, t, -4, 4) for t in range(e3.m)]
            val = psi_exact(basis, q, s, e3)
            assert 0 <= val <= cap


def test_psi_and_gamma_homogeneity(e1):
    basis = enumerate_bases(e1)[0]
    s = [F(7, 13)]
    base = psi_exact(basis, [1, 1], s, e1)
    assert psi_exact(basis, [3, 3], s, e1) == 3 * base
    g1, _ = gamma_mean(basis, [1, 1], e1, 512)
    g3, _ = gamma_mean(basis, [3, 3], e1, 512)
    assert g3 == 3 * g1


def test_pieces_match_exact_route(e1, e3, sir_unit):
    for inst in (e1, e3, sir_unit):
        blist = enumerate_bases(inst)
        for i in range(25):
            q = [rand_frac(33, i, k, F(1, 4), 3) for k in range(inst.n)]
            feas = dual_feasible_indices(q, blist, inst)
            for k in feas:
                basis = blist[k]
                pieces = pieces_for(inst, basis)
                rc = reduced_costs(basis, q, inst)
                qbar = np.array([float(v) for v in rc.values])
                s = [rand_frac(34, i, 20 + t, -4, 4) for t in range(inst.m)]
                if pieces.mI:
                    res = np.array([[float(dot(basis.B_inv[r], vec_frac(s)) % 1)
                                     for r in pieces.masked_rows]])
                else:
                    res = np.zeros((1, 0))
                fast = pieces.psi_batch(res, qbar)[0]
                slow = psi_value(basis, q, s, inst)
                assert fast == pytest.approx(slow, abs=1e-9)


def test_gamma_matches_direct_average(e1):
    # brute-force midpoint average over the period cell with the exact route
    basis = enumerate_bases(e1)[0]
    q = [F(3, 2), F(1)]
    res = 64
    acc = F(0)
    for i in range(res):
        s = [F(basis.p) * F(2 * i + 1, 2 * res)]
        acc += psi_exact(basis, q, s, e1)
    direct = float(acc / res)
    g, _ = gamma_mean(basis, q, e1, res)
    assert g == pytest.approx(direct, abs=1e-12)


def test_components_cover_feasible_set(e3):
    q = [F(1), F(2), F(1), F(1)]
    comps = build_components(e3, q, 128)
    blist = enumerate_bases(e3)
    assert [c.basis_index for c in comps] == dual_feasible_indices(q, blist, e3)
    for c in comps:
        assert c.lam == dual_vertex(q, blist[c.basis_index])


def test_remainder_without_nonbasic_columns(w2):
    # single integer column: the remainder exists only on lattice residues,
    # and the period mean is undefined because recourse is incomplete
    from mirlab.errors import InfeasibleError
    inst = type(w2)(name="W2i", m=1, W=[[2]], integer_mask=[True], c=w2.c,
                    x_lo=w2.x_lo, x_hi=w2.x_hi, dist=w2.dist, alpha=w2.alpha)
    basis = enumerate_bases(inst)[0]
    assert psi_exact(basis, [1], [4], inst) == 0
    with pytest.raises(InfeasibleError):
        psi_exact(basis, [1], [F(1, 2)], inst)
    with pytest.raises(InfeasibleError):
        gamma_mean(basis, [1], inst, 64)


def test_components_scaling_cache(e1):
    comps1 = build_components(e1, [1, 1], 256)
    comps2 = build_components(e1, [2, 2], 256)
    for a, b in zip(comps1, comps2):
        assert b.lam == [2 * v for v in a.lam]
        assert b.gamma == 2 * a.gamma
