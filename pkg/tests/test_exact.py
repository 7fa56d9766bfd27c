"""Rational simplex and branch-and-bound oracles."""

from fractions import Fraction as F

import pytest

from mirlab import exact
from mirlab.errors import BudgetExhausted
from tests.conftest import rand_frac


def test_lp_basic_e1(e1):
    sol = exact.solve_lp([1, 1], [F(1, 2)], e1)
    assert sol.status == exact.OPTIMAL
    assert sol.value == F(1, 2)
    assert sol.dual == [F(1)]
    assert sol.basis_columns == (0,)


def test_lp_zero_rhs(e1):
    sol = exact.solve_lp([1, 1], [0], e1)
    assert sol.value == 0


def test_lp_separable_e3(e3):
    sol = exact.solve_lp([1, 1, 1, 1], [F(1, 2), F(1, 2)], e3)
    assert sol.value == 1
    assert sol.dual == [F(1), F(1)]


def test_lp_dual_feasibility_certificate(e3):
    q = [F(3), F(2), F(1), F(1)]
    s = [F(7, 3), F(-5, 2)]
    sol = exact.solve_lp(q, s, e3)
    assert sol.status == exact.OPTIMAL
    w = e3.W_frac
    for j in range(e3.n):
        assert sum(sol.dual[i] * w[i][j] for i in range(e3.m)) <= q[j]
    # complementary: value equals lam's
    assert sol.value == sum(l * v for l, v in zip(sol.dual, s))


def test_mip_examples(e1, e3):
    sol = exact.solve_mip([1, 1], [F(1, 2)], e1)
    assert sol.value == F(3, 2)
    assert sol.incumbent == [F(1), F(1, 2)]
    sol = exact.solve_mip([1, 1], [F(-1, 2)], e1)
    assert sol.value == F(1, 2)
    sol = exact.solve_mip([1, 1, 1, 1], [F(1, 2), F(1, 2)], e3)
    assert sol.value == 3


def test_mip_integral_incumbent(e3):
    sol = exact.solve_mip([2, 3, 1, 1], [F(5, 4), F(-3, 4)], e3)
    assert sol.status == exact.OPTIMAL
    y = sol.incumbent
    w = e3.W_frac
    for i in range(e3.m):
        assert sum(w[i][j] * y[j] for j in range(e3.n)) == [F(5, 4), F(-3, 4)][i]
    for j in range(e3.n):
        assert y[j] >= 0
        if e3.integer_mask[j]:
            assert y[j].denominator == 1


def test_mip_pure_integer_infeasible(e2):
    sol = exact.solve_mip([1, 1], [F(1, 2)], e2)
    assert sol.status == exact.INFEASIBLE


def test_mip_budget_guard(e3):
    with pytest.raises(BudgetExhausted):
        exact.solve_mip([1, 1, 1, 1], [F(7, 2), F(9, 2)], e3, node_budget=2)


def test_recourse_assumption_probes(e1):
    assert exact.check_recourse_assumptions(e1, [1, 1]) == (True, True)
    assert exact.check_recourse_assumptions(e1, [-1, -1]) == (False, True)


def test_recourse_nonspanning():
    from mirlab import families
    inst = families.e1()
    inst = type(inst)(name="half", m=1, W=[[1, 1]], integer_mask=[True, False],
                      c=inst.c, x_lo=inst.x_lo, x_hi=inst.x_hi, dist=inst.dist,
                      alpha=inst.alpha)
    assert exact.check_recourse_assumptions(inst, [1, 1]) == (True, False)


def test_weak_duality_random(e1, e3):
    for inst, nq in ((e1, 2), (e3, 4)):
        for i in range(150):
            q = [rand_frac(11, i, k, F(1, 2), 3) for k in range(nq)]
            s = [rand_frac(12, i, 10 + k, -4, 4) for k in range(inst.m)]
            lp = exact.solve_lp(q, s, inst)
            mip = exact.solve_mip(q, s, inst)
            assert lp.status == mip.status == exact.OPTIMAL
            assert lp.value <= mip.value


def test_positive_homogeneity(e1, e3):
    for inst, nq in ((e1, 2), (e3, 4)):
        for i in range(40):
            q = [rand_frac(13, i, k, F(1, 2), 3) for k in range(nq)]
            s = [rand_frac(14, i, 10 + k, -4, 4) for k in range(inst.m)]
            for c in (F(2), F(7, 3)):
                assert exact.solve_lp([c * v for v in q], s, inst).value \
                    == c * exact.solve_lp(q, s, inst).value
                assert exact.solve_mip([c * v for v in q], s, inst).value \
                    == c * exact.solve_mip(q, s, inst).value


def test_deterministic_pivoting(e3):
    sols = [exact.solve_lp([1, 1, 1, 1], [F(1, 3), F(2, 3)], e3) for _ in range(3)]
    assert all(s.basis_columns == sols[0].basis_columns for s in sols)
    assert all(s.dual == sols[0].dual for s in sols)


def test_rank_deficient_rows_rejected():
    # duplicated constraint rows make the dual ill-defined
    a = [[F(1), F(-1)], [F(1), F(-1)]]
    with pytest.raises(ValueError):
        exact.simplex_solve(a, [F(1), F(1)], [F(1), F(1)])


def test_duplicate_columns_and_degenerate_rhs(e1):
    a = [[F(1), F(1), F(-1)]]
    sol = exact.simplex_solve(a, [F(0)], [F(2), F(3), F(1)])
    assert sol.status == exact.OPTIMAL and sol.value == 0
    sol = exact.solve_lp([1, 1], [F(0)], e1)
    assert sol.value == 0 and sol.primal == [F(0), F(0)]
