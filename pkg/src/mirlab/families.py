"""Bundled desk-scale instance families used by tests and the docs.

e1   one-row mixed model: integer up-direction, continuous down-direction
e2   pure-integer variant of e1 (complete recourse fails at fractional rhs)
e3   two separable copies of e1, all four columns carrying cost
w2   single continuous column with determinant 2 (degenerate edge cases)
"""

from __future__ import annotations

import os

from . import distributions as dists
from .instance import Instance, save_instance
from .linalg import to_frac, vec_frac


def _spec(q_dist, t_matrix, h_marginals) -> dists.DistributionSpec:
    return dists.DistributionSpec(
        q=q_dist,
        T=dists.FixedMat(tuple(tuple(vec_frac(r)) for r in t_matrix)),
        h=tuple(h_marginals),
    )


def _normal(mu=0, sigma=1) -> dists.Normal:
    return dists.Normal(to_frac(mu), to_frac(sigma))


def _uniform(a, b) -> dists.Uniform:
    return dists.Uniform(to_frac(a), to_frac(b))


def fixed_q(*vals) -> dists.FixedVec:
    return dists.FixedVec(tuple(vec_frac(vals)))


def uniform_box_q(bounds) -> dists.IndepCoords:
    return dists.IndepCoords(tuple(_uniform(a, b) for a, b in bounds))


def e1(q_dist=None, h=None, name="E1") -> Instance:
    return Instance(
        name=name,
        m=1,
        W=[[1, -1]],
        integer_mask=[True, False],
        c=vec_frac([0]),
        x_lo=vec_frac([-1]),
        x_hi=vec_frac([1]),
        dist=_spec(q_dist or fixed_q(1, 1), [[1]], h or [_normal()]),
        alpha=vec_frac([0]),
    )


def e2_pure_integer(name="E2") -> Instance:
    inst = e1(name=name)
    return Instance(
        name=name,
        m=1,
        W=[[1, -1]],
        integer_mask=[True, True],
        c=list(inst.c),
        x_lo=list(inst.x_lo),
        x_hi=list(inst.x_hi),
        dist=inst.dist,
        alpha=list(inst.alpha),
    )


def e3(q_dist=None, h=None, name="E3") -> Instance:
    return Instance(
        name=name,
        m=2,
        W=[[1, 0, -1, 0],
           [0, 1, 0, -1]],
        integer_mask=[True, True, False, False],
        c=vec_frac([0]),
        x_lo=vec_frac([-1]),
        x_hi=vec_frac([1]),
        dist=_spec(q_dist or fixed_q(1, 1, 1, 1), [[1], [1]],
                   h or [_normal(), _normal()]),
        alpha=vec_frac([0, 0]),
    )


def w2(name="W2") -> Instance:
    return Instance(
        name=name,
        m=1,
        W=[[2]],
        integer_mask=[False],
        c=vec_frac([0]),
        x_lo=vec_frac([-1]),
        x_hi=vec_frac([1]),
        dist=_spec(fixed_q(1), [[1]], [_normal()]),
        alpha=vec_frac([0]),
    )


def write_instance_files(directory: str) -> list[str]:
    """Write the bundled families as JSON files; returns the paths."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for inst, fname in ((e1(), "e1.json"),
                        (e2_pure_integer(), "e2_pure_integer.json"),
                        (e3(), "e3.json"),
                        (w2(), "w2.json")):
        path = os.path.join(directory, fname)
        save_instance(inst, path)
        paths.append(path)
    return paths
