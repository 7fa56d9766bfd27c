"""Simple integer recourse: closed forms used as an independent oracle.

The scalar model charges q_plus per unit of rounded-up surplus and q_minus
per unit of rounded-up shortage.  Its value function and expected recourse
have closed forms, which cross-validate the general machinery through an
encoding of the model as a two-row instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import distributions as dists
from .errors import InvariantViolation, MirlabError
from .instance import Instance
from .linalg import to_frac, vec_frac


@dataclass(frozen=True)
class SirSpec:
    q_plus: Fraction
    q_minus: Fraction
    h: dists.Marginal

    def __post_init__(self):
        if self.q_plus < 0 or self.q_minus < 0:
            raise InvariantViolation("q", "unit costs must be nonnegative")


def sir_value(spec: SirSpec, s) -> float:
    """q_plus * max(ceil(s), 0) + q_minus * max(ceil(-s), 0)."""
    sf = to_frac(s)
    up = max(math.ceil(sf), 0)
    down = max(math.ceil(-sf), 0)
    return float(spec.q_plus * up + spec.q_minus * down)


def sir_expected_recourse(spec: SirSpec, x, tail_tol: float = 1e-12,
                          max_terms: int = 10_000) -> float:
    """Series oracle: E ceil(h-x)^+ = sum_k P(h-x > k), truncated at tail_tol."""
    if tail_tol <= 0:
        raise ValueError("tail_tol must be positive")
    xf = float(x)
    total = 0.0
    for sign, cost in ((1.0, float(spec.q_plus)), (-1.0, float(spec.q_minus))):
        if cost == 0:
            continue
        acc = 0.0
        for k in range(max_terms):
            if sign > 0:
                term = 1.0 - float(spec.h.cdf(xf + k))
            else:
                term = float(spec.h.cdf(xf - k))
            acc += term
            if term < tail_tol:
                break
        else:
            raise MirlabError("tail series did not converge within the term limit")
        total += cost * acc
    return total


def _mirror(marg: dists.Marginal) -> dists.Marginal:
    """Distribution of -h."""
    if isinstance(marg, dists.Normal):
        return dists.Normal(-marg.mu, marg.sigma)
    if isinstance(marg, dists.Uniform):
        return dists.Uniform(-marg.b, -marg.a)
    knots = tuple((-x, f) for x, f in reversed(marg.knots))
    return dists.PiecewiseLinear(knots)


def sir_as_instance(spec: SirSpec) -> Instance:
    """Encode the model so the general oracles reproduce its expectation.

    Surplus and shortage are separable, so they are written as two rows
    y_plus - u1 = h1 - x and y_minus - u2 = h2 + x with continuous slacks u
    at zero cost.  The second row uses an independent mirror copy of h: the
    joint law differs from the scalar model but every expectation of the
    separable integrands matches, which is what the cross-oracle checks.
    """
    return Instance(
        name="SIR",
        m=2,
        W=[[1, 0, -1, 0],
           [0, 1, 0, -1]],
        integer_mask=[True, True, False, False],
        c=vec_frac([0]),
        x_lo=vec_frac([-4]),
        x_hi=vec_frac([4]),
        dist=dists.DistributionSpec(
            q=dists.FixedVec((spec.q_plus, spec.q_minus, Fraction(0), Fraction(0))),
            T=dists.FixedMat(((Fraction(1),), (Fraction(-1),))),
            h=(spec.h, _mirror(spec.h)),
        ),
        alpha=vec_frac([0, 0]),
    )
