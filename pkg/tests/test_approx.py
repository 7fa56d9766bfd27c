"""Approximation evaluators and Monte Carlo estimators."""

from fractions import Fraction as F

import numpy as np
import pytest

from mirlab import exact, families
from mirlab.approx import (estimate_recourse, max_subdeterminant,
                           scenario_values, sup_error_on_grid, v_alpha, v_hat)
from mirlab.distributions import draw_batch
from mirlab.errors import EmptyDualSet
from mirlab.instance import scale_costs
from mirlab.periodic import build_components
from tests.conftest import rand_frac


def test_v_hat_examples(e1):
    comps = build_components(e1, [1, 1], 4096)
    assert v_hat([1, 1], [0.5], comps) == pytest.approx(1.5, abs=1e-12)
    assert v_hat([1, 1], [-2.0], comps) == pytest.approx(2.0, abs=1e-12)
    assert v_hat([1, 1], [0.0], comps) == pytest.approx(1.0, abs=1e-12)


def test_v_hat_requires_components():
    with pytest.raises(EmptyDualSet):
        v_hat([1, 1], [0.0], [])


def test_v_alpha_examples(e1):
    assert v_alpha([1, 1], [0.5], [0], [0], e1) == pytest.approx(1.5, abs=1e-12)
    assert v_alpha([1, 1], [0.3], [0.3], [0.3], e1) == pytest.approx(0.0, abs=1e-12)
    assert v_alpha([1, 1], [0.5], [-1], [0], e1) == pytest.approx(2.5, abs=1e-12)


def test_v_alpha_empty_dual(e1):
    with pytest.raises(EmptyDualSet):
        v_alpha([1, -2], [0.5], [0], [0], e1)


def test_max_subdeterminant(e1, e3, w2):
    assert max_subdeterminant(e1) == 1
    assert max_subdeterminant(e3) == 1
    assert max_subdeterminant(w2) == 2


def test_estimate_closed_form_sawtooth(e1_uniform_h):
    est = estimate_recourse([0], e1_uniform_h, "exact", 20_000, 7)
    assert abs(est.mean - 1.5) <= 3 * est.std_error
    est2 = estimate_recourse([0], e1_uniform_h, "shifted", 20_000, 7)
    assert abs(est2.mean - 1.5) <= 3 * est2.std_error


def test_estimate_validation(e1):
    with pytest.raises(ValueError):
        estimate_recourse([0], e1, "exact", 1, 0)
    with pytest.raises(ValueError):
        estimate_recourse([0], e1, "bogus", 10, 0)


def test_estimate_reproducible(e1_uniform_h):
    a = estimate_recourse([0.25], e1_uniform_h, "shifted", 5_000, 3)
    b = estimate_recourse([0.25], e1_uniform_h, "shifted", 5_000, 3)
    assert a == b


def test_estimate_empty_dual_error():
    inst = families.e1(q_dist=families.fixed_q(1, -2))
    with pytest.raises(EmptyDualSet):
        estimate_recourse([0], inst, "shifted", 100, 0)
    with pytest.raises(EmptyDualSet):
        estimate_recourse([0], inst, "exact", 100, 0)


def test_exact_scaling_is_bitwise(e1_uniform_h):
    base = estimate_recourse([0.5], e1_uniform_h, "exact", 10_000, 13)
    doubled = estimate_recourse([0.5], scale_costs(e1_uniform_h, 2), "exact", 10_000, 13)
    assert doubled.mean == 2 * base.mean
    assert doubled.std_error == 2 * base.std_error


def test_vectorized_exact_matches_oracle(e1, e3, sir_unit):
    for inst in (e1, e3, sir_unit):
        Q, T, H = draw_batch(inst.dist, 17, 0, 40)
        vals = scenario_values(inst, [0.25], "exact", Q, T, H)
        tm = np.asarray([[float(v) for v in r] for r in inst._t_matrices()[0]])
        for i in range(40):
            s = H[i] - tm @ np.array([0.25])
            sol = exact.solve_mip([F(v) for v in Q[i]], [F(v) for v in s], inst)
            assert vals[i] == pytest.approx(float(sol.value), abs=1e-9)


def test_vectorized_exact_matches_oracle_random_q(e3):
    inst = families.e3(q_dist=families.uniform_box_q([(1, 2)] * 4))
    Q, T, H = draw_batch(inst.dist, 19, 0, 30)
    vals = scenario_values(inst, [-0.5], "exact", Q, T, H)
    tm = np.asarray([[float(v) for v in r] for r in inst._t_matrices()[0]])
    for i in range(30):
        s = H[i] - tm @ np.array([-0.5])
        sol = exact.solve_mip([F(v) for v in Q[i]], [F(v) for v in s], inst)
        assert vals[i] == pytest.approx(float(sol.value), abs=1e-9)


def test_vectorized_exact_stress(sir_unit):
    # wide right-hand sides and zero-cost slack coordinates push the
    # certified enumeration box and the dual-vertex screening hard
    import numpy as np
    from mirlab.distributions import DistributionSpec, FixedMat, IndepCoords, Uniform, draw_batch
    from mirlab import families
    spec = DistributionSpec(
        q=IndepCoords((Uniform(F(1, 2), F(3)), Uniform(F(1, 2), F(3)),
                       Uniform(F(0), F(1)), Uniform(F(0), F(1)))),
        T=sir_unit.dist.T,
        h=(families._normal(0, 4), families._normal(0, 4)),
    )
    inst = type(sir_unit)(name="SIRW", m=2, W=[r[:] for r in sir_unit.W],
                          integer_mask=list(sir_unit.integer_mask), c=sir_unit.c,
                          x_lo=sir_unit.x_lo, x_hi=sir_unit.x_hi, dist=spec,
                          alpha=sir_unit.alpha)
    Q, T, H = draw_batch(inst.dist, 41, 0, 100)
    vals = scenario_values(inst, [1.5], "exact", Q, T, H)
    tm = np.asarray([[float(v) for v in r] for r in inst._t_matrices()[0]])
    for i in range(100):
        s = H[i] - tm @ np.array([1.5])
        sol = exact.solve_mip([F(v) for v in Q[i]], [F(v) for v in s], inst)
        assert vals[i] == pytest.approx(float(sol.value), abs=1e-8), i


def test_vectorized_shifted_matches_pointwise(e1, e3):
    for inst, res in ((e1, 1024), (e3, 256)):
        Q, T, H = draw_batch(inst.dist, 23, 0, 25)
        vals = scenario_values(inst, [0.1], "shifted", Q, T, H, gamma_res=res)
        tm = np.asarray([[float(v) for v in r] for r in inst._t_matrices()[0]])
        for i in range(25):
            s = H[i] - tm @ np.array([0.1])
            comps = build_components(inst, [F(v) for v in Q[i]], res)
            assert vals[i] == pytest.approx(v_hat(Q[i], s, comps), abs=1e-9)


def test_vectorized_alpha_matches_pointwise(e1, e3):
    for inst in (e1, e3):
        Q, T, H = draw_batch(inst.dist, 29, 0, 20)
        vals = scenario_values(inst, [0.3], "alpha", Q, T, H)
        tm = np.asarray([[float(v) for v in r] for r in inst._t_matrices()[0]])
        for i in range(20):
            tx = tm @ np.array([0.3])
            direct = v_alpha([F(v) for v in Q[i]], [F(v) for v in H[i]],
                             [F(v) for v in tx], inst.alpha, inst)
            assert vals[i] == pytest.approx(direct, abs=1e-9)


def test_random_technology_matrix(e1):
    # finite-support T: per-scenario matrices flow through every estimator
    import numpy as np
    from mirlab.distributions import DistributionSpec, FiniteMat
    spec = DistributionSpec(
        q=e1.dist.q,
        T=FiniteMat((((F(1),),), ((F(2),),)), (F(1, 2), F(1, 2))),
        h=e1.dist.h,
    )
    inst = type(e1)(name="E1T", m=1, W=[[1, -1]], integer_mask=[True, False],
                    c=e1.c, x_lo=e1.x_lo, x_hi=e1.x_hi, dist=spec, alpha=e1.alpha)
    Q, T, H = draw_batch(inst.dist, 43, 0, 400)
    assert T.ndim == 3
    used = sorted(set(T[:, 0, 0].tolist()))
    assert used == [1.0, 2.0]
    vals = scenario_values(inst, [0.5], "exact", Q, T, H)
    for i in range(0, 400, 37):
        s = H[i] - T[i] @ np.array([0.5])
        sol = exact.solve_mip([F(v) for v in Q[i]], [F(v) for v in s], inst)
        assert vals[i] == pytest.approx(float(sol.value), abs=1e-9)
    est = estimate_recourse([0.5], inst, "shifted", 2_000, 3)
    assert est.n_samples == 2_000


def test_v_hat_sandwich_and_scaling(e1):
    comps1 = build_components(e1, [1, 1], 2048)
    comps2 = build_components(e1, [2, 2], 2048)
    gmax = max(c.gamma for c in comps1)
    for i in range(100):
        s = rand_frac(37, i, 0, -6, 6)
        lp = float(exact.solve_lp([1, 1], [s], e1).value)
        vh = v_hat([1, 1], [float(s)], comps1)
        assert lp - 1e-9 <= vh <= lp + gmax + 1e-9
        assert v_hat([2, 2], [float(s)], comps2) == 2 * vh


def test_v_hat_midpoint_convexity(e1):
    comps = build_components(e1, [1, 1], 2048)
    rng = np.random.default_rng(5)
    for _ in range(300):
        s1, s2 = rng.uniform(-8, 8, size=2)
        th = rng.uniform(0.05, 0.95)
        mid = v_hat([1, 1], [th * s1 + (1 - th) * s2], comps)
        assert mid <= th * v_hat([1, 1], [s1], comps) \
            + (1 - th) * v_hat([1, 1], [s2], comps) + 1e-12


def test_sup_error_zero_on_full_period(e1_uniform_h):
    res = sup_error_on_grid(e1_uniform_h, "exact_vs_shifted", [[0]], 20_000, 7,
                            gamma_res=4096)
    assert res.sup <= 3 * res.sup_se
    assert res.argmax_x == [0]
    # a point inside the box away from 0 is also exact for U[0,1] (full period)
    res2 = sup_error_on_grid(e1_uniform_h, "exact_vs_shifted", [[0.25]], 20_000, 7,
                             gamma_res=4096)
    assert res2.sup <= 3 * res2.sup_se


def test_sup_error_guards(e1):
    with pytest.raises(ValueError):
        sup_error_on_grid(e1, "exact_vs_exact", [[0]], 100, 0)
    with pytest.raises(ValueError):
        sup_error_on_grid(e1, "exact_vs_shifted", [], 100, 0)
    with pytest.raises(ValueError):
        sup_error_on_grid(e1, "exact_vs_shifted", [[5]], 100, 0)


def test_sup_error_uses_common_random_numbers(e1):
    res = sup_error_on_grid(e1, "exact_vs_shifted", [[0], [0.5]], 2_000, 11)
    assert len(res.per_x) == 2
    for ea, eb in res.per_x:
        assert ea.seed == eb.seed           # same substream at each x
    assert res.per_x[0][0].seed != res.per_x[1][0].seed
