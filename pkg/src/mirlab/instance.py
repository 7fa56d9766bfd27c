"""Model data for the two-stage mixed-integer recourse problem.

An Instance bundles the integer recourse matrix W, the integrality pattern,
first-stage data, the joint distribution of (q, T, h) and the anchor vector
for the alpha-approximation.  Instances are immutable after construction and
safe to share across workers; derived structures (basis lists, evaluators)
are cached on the instance under a private key.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import distributions as dists
from . import exact
from .errors import InvariantViolation, ParseError
from .linalg import Mat, Vec, is_integral, mat_frac, to_frac, vec_frac


@dataclass
class Instance:
    name: str
    m: int
    W: list                 # m x n integer entries
    integer_mask: list      # length n, True = integer-constrained
    c: Vec                  # first-stage cost, length n1
    x_lo: Vec
    x_hi: Vec
    dist: dists.DistributionSpec
    alpha: Vec

    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise InvariantViolation("m", "must be at least 1")
        if len(self.W) != self.m:
            raise InvariantViolation("W", f"expected {self.m} rows")
        n = len(self.W[0])
        for i, row in enumerate(self.W):
            if len(row) != n:
                raise InvariantViolation(f"W[{i}]", "ragged row")
            for j, v in enumerate(row):
                fv = to_frac(v)
                if not is_integral(fv):
                    raise InvariantViolation(f"W[{i}][{j}]", "recourse matrix entries must be integers")
                row[j] = int(fv)
        if n < self.m:
            raise InvariantViolation("W", "needs at least m columns")
        if len(self.integer_mask) != n:
            raise InvariantViolation("integer_mask", f"expected length {n}")
        if len(self.alpha) != self.m:
            raise InvariantViolation("alpha", f"expected length {self.m}")
        if len(self.x_lo) != len(self.c) or len(self.x_hi) != len(self.c):
            raise InvariantViolation("x_domain", "bounds must match the length of c")
        if any(lo > hi for lo, hi in zip(self.x_lo, self.x_hi)):
            raise InvariantViolation("x_domain", "lo must not exceed hi")
        for ti, tmat in enumerate(self._t_matrices()):
            if len(tmat) != self.m or (tmat and len(tmat[0]) != len(self.c)):
                raise InvariantViolation(f"T[{ti}]",
                                         f"must map R^{len(self.c)} to R^{self.m}")
        qlen = _q_len(self.dist.q)
        if qlen != n:
            raise InvariantViolation("q_dist", f"dimension {qlen} != {n} columns of W")
        if len(self.dist.h) != self.m:
            raise InvariantViolation("h_dist", f"expected {self.m} marginals")

    # ------------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.integer_mask)

    @property
    def n1(self) -> int:
        return len(self.c)

    @property
    def W_frac(self) -> Mat:
        if "W_frac" not in self._cache:
            self._cache["W_frac"] = mat_frac(self.W)
        return self._cache["W_frac"]

    def _t_matrices(self) -> list:
        t = self.dist.T
        if isinstance(t, dists.FixedMat):
            return [[list(r) for r in t.matrix]]
        return [[list(r) for r in p] for p in t.points]

    def column(self, j: int) -> Vec:
        return [self.W_frac[i][j] for i in range(self.m)]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "m": self.m,
            "W": [list(map(int, row)) for row in self.W],
            "integer_mask": list(self.integer_mask),
            "c": [dists._dump_frac(v) for v in self.c],
            "x_domain": {"lo": [dists._dump_frac(v) for v in self.x_lo],
                         "hi": [dists._dump_frac(v) for v in self.x_hi]},
            "T": dists.dump_tdist(self.dist.T),
            "q_dist": dists.dump_qdist(self.dist.q),
            "h_dist": [m.dump() for m in self.dist.h],
            "alpha": [dists._dump_frac(v) for v in self.alpha],
        }


def _q_len(q) -> int:
    if isinstance(q, dists.FixedVec):
        return len(q.values)
    if isinstance(q, dists.FiniteVec):
        return len(q.points[0])
    return len(q.coords)


@dataclass
class ValidationReport:
    complete_recourse: str                  # verified | refuted | inconclusive
    witness: Optional[list]                 # refuting right-hand side, if any
    sufficiently_expensive: bool
    dual_witness: Optional[Vec]
    w_integer: bool
    messages: list

    @property
    def ok(self) -> bool:
        return self.complete_recourse != "refuted" and self.sufficiently_expensive


def load_instance(path: str) -> Instance:
    """Parse and validate an instance file; see `to_dict` for the schema."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read instance file {path}: {exc}") from exc
    return instance_from_dict(obj)


def instance_from_dict(obj: dict) -> Instance:
    try:
        spec = dists.DistributionSpec(
            q=dists.parse_qdist(obj["q_dist"]),
            T=dists.parse_tdist(obj["T"]),
            h=tuple(dists.parse_marginal(o) for o in obj["h_dist"]),
        )
        return Instance(
            name=obj.get("name", "unnamed"),
            m=int(obj["m"]),
            W=[list(r) for r in obj["W"]],
            integer_mask=[bool(v) for v in obj["integer_mask"]],
            c=vec_frac(obj["c"]),
            x_lo=vec_frac(obj["x_domain"]["lo"]),
            x_hi=vec_frac(obj["x_domain"]["hi"]),
            dist=spec,
            alpha=vec_frac(obj["alpha"]),
        )
    except KeyError as exc:
        raise ParseError(f"missing instance key {exc}") from exc


def save_instance(inst: Instance, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(inst.to_dict(), fh, indent=2)
        fh.write("\n")


def scale_costs(inst: Instance, c_scale) -> Instance:
    """Instance whose q-distribution is pushed forward by multiplication.

    Everything else is shared; the scale must be positive.
    """
    c = to_frac(c_scale)
    if c <= 0:
        raise InvariantViolation("c_scale", "must be positive")
    return Instance(
        name=inst.name,
        m=inst.m,
        W=[row[:] for row in inst.W],
        integer_mask=list(inst.integer_mask),
        c=list(inst.c),
        x_lo=list(inst.x_lo),
        x_hi=list(inst.x_hi),
        dist=inst.dist.scaled_q(c),
        alpha=list(inst.alpha),
    )


def _probe_points(inst: Instance, probe_count: int) -> list:
    """Deterministic right-hand sides: the canonical half-integer point first,
    then counter-based draws in a box around the origin."""
    pts = [[Fraction(1, 2)] * inst.m]
    for i in range(probe_count - 1):
        row = []
        for k in range(inst.m):
            uk = float(dists.uniform_stream(9173, i, k))
            row.append(Fraction(uk).limit_denominator(64) * 10 - 5)
        pts.append(row)
    return pts


def validate_instance(inst: Instance, probe_count: int = 20) -> ValidationReport:
    """Check the standing model assumptions as far as desk-scale search allows.

    Complete recourse is certified when the continuous columns positively span
    R^m, or when all columns do and probe mixed-integer solves stay feasible;
    a probe with no feasible second stage refutes it outright.  Sufficient
    expensiveness is dual-region nonemptiness at sampled cost vectors.
    """
    if probe_count < 1:
        raise ValueError("probe_count must be at least 1")
    messages: list[str] = []

    cont_cols = [inst.column(j) for j in range(inst.n) if not inst.integer_mask[j]]
    all_cols = [inst.column(j) for j in range(inst.n)]
    cont_span = exact.positively_spans(cont_cols, inst.m) if cont_cols else False
    all_span = exact.positively_spans(all_cols, inst.m)

    q_probe = dists.representative_q(inst.dist)
    complete = "inconclusive"
    witness = None
    for s in _probe_points(inst, probe_count):
        try:
            sol = exact.solve_mip(q_probe, s, inst, node_budget=20_000)
        except exact.BudgetExhausted:
            messages.append(f"probe at {s} exhausted the node budget; treating as inconclusive")
            complete = "inconclusive"
            break
        except exact.UnboundedError:
            messages.append("relaxation unbounded at probe; cost vector violates expensiveness")
            break
        if sol.status == exact.INFEASIBLE:
            complete = "refuted"
            witness = [float(v) for v in s]
            messages.append(f"no feasible second stage at s = {witness}")
            break
    else:
        if cont_span:
            complete = "verified"
        elif all_span:
            complete = "verified"
            messages.append("verified via integer columns plus feasible probes; "
                            "continuous columns alone do not span")
        else:
            messages.append("columns do not positively span R^m; completeness unresolved")

    qs = [q_probe]
    for i in range(3):
        qd, _, _ = dists.draw_batch(inst.dist, 331, i, 1)
        qs.append([Fraction(float(v)) for v in qd[0]])
    suff = True
    dual_witness = None
    for q in qs:
        lp = exact.solve_lp(q, [Fraction(0)] * inst.m, inst)
        if lp.status != exact.OPTIMAL:
            suff = False
            messages.append(f"dual region empty at sampled q = {[float(v) for v in q]}")
            break
        dual_witness = lp.dual

    return ValidationReport(
        complete_recourse=complete,
        witness=witness,
        sufficiently_expensive=suff,
        dual_witness=dual_witness,
        w_integer=True,
        messages=messages,
    )
