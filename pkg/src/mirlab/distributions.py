"""Distribution specs for (q, T, h): sampling, total variation, moments.

Sampling is counter-based: the value of scenario i under seed s is a pure
function of (s, i), so estimates are reproducible no matter how work is
scheduled or batched.  All families are parameterized by exact rationals and
converted to float once, at sampling time, so cost-scaling pushforwards stay
exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import InvariantViolation, ParseError
from .linalg import Vec, to_frac, vec_frac

# ---------------------------------------------------------------------------
# counter-based uniforms

_M64 = (1 << 64) - 1
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)


def _finalize(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic is modular by design; silence numpy's scalar warning
    with np.errstate(over="ignore"):
        z = z ^ (z >> np.uint64(30))
        z = z * _C1
        z = z ^ (z >> np.uint64(27))
        z = z * _C2
        return z ^ (z >> np.uint64(31))


def uniform_stream(seed: int, index, slot: int) -> np.ndarray:
    """Deterministic uniforms in (0, 1): one value per (seed, index, slot)."""
    a = np.uint64(((seed & _M64) ^ 0x5DEECE66D) * 0x9E3779B97F4A7C15 & _M64)
    b = np.uint64(((slot + 1) * 0xD1B54A32D192ED03) & _M64)
    z = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _finalize((z * _C2) ^ a)
    z = _finalize(z ^ b)
    k = (z >> np.uint64(11)).astype(np.float64)
    return (k + 0.5) * (2.0 ** -53)


def derive_seed(seed: int, tag: int) -> int:
    """Independent sub-stream key, used e.g. per grid point."""
    z = _finalize(np.uint64(((seed & _M64) * 0x9E3779B97F4A7C15 + tag + 1) & _M64))
    return int(z)


# ---------------------------------------------------------------------------
# one-dimensional continuous families (right-hand side marginals, q coords)


@dataclass(frozen=True)
class Normal:
    mu: Fraction
    sigma: Fraction

    def __post_init__(self):
        if self.sigma <= 0:
            raise InvariantViolation("sigma", "must be positive")

    def sample(self, u):
        return float(self.mu) + float(self.sigma) * ndtri(u)

    def pdf(self, x):
        s, m = float(self.sigma), float(self.mu)
        return np.exp(-0.5 * ((np.asarray(x, dtype=float) - m) / s) ** 2) / (s * math.sqrt(2 * math.pi))

    def cdf(self, x):
        return ndtr((np.asarray(x, dtype=float) - float(self.mu)) / float(self.sigma))

    def tv(self) -> float:
        # unimodal density: total variation is twice the mode height
        return 2.0 / (float(self.sigma) * math.sqrt(2 * math.pi))

    def scaled(self, c: Fraction) -> "Normal":
        return Normal(self.mu * c, self.sigma * c)

    def dump(self) -> dict:
        return {"type": "normal", "mu": _dump_frac(self.mu), "sigma": _dump_frac(self.sigma)}


@dataclass(frozen=True)
class Uniform:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        if self.b <= self.a:
            raise InvariantViolation("uniform", "requires a < b")

    def sample(self, u):
        a, b = float(self.a), float(self.b)
        return a + (b - a) * np.asarray(u, dtype=float)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        a, b = float(self.a), float(self.b)
        return np.where((x >= a) & (x <= b), 1.0 / (b - a), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        a, b = float(self.a), float(self.b)
        return np.clip((x - a) / (b - a), 0.0, 1.0)

    def tv(self) -> float:
        return 2.0 / float(self.b - self.a)

    def scaled(self, c: Fraction) -> "Uniform":
        return Uniform(self.a * c, self.b * c)

    def dump(self) -> dict:
        return {"type": "uniform", "a": _dump_frac(self.a), "b": _dump_frac(self.b)}


@dataclass(frozen=True)
class PiecewiseLinear:
    """Density that is piecewise linear between knots and zero outside.

    Knots are (x, f) pairs with strictly increasing x and f >= 0.  The knot
    heights are normalized exactly so the density integrates to one.
    """

    knots: tuple

    def __post_init__(self):
        xs = [k[0] for k in self.knots]
        fs = [k[1] for k in self.knots]
        if len(xs) < 2:
            raise InvariantViolation("pwl", "needs at least two knots")
        if any(x2 <= x1 for x1, x2 in zip(xs, xs[1:])):
            raise InvariantViolation("pwl", "knot positions must strictly increase")
        if any(f < 0 for f in fs):
            raise InvariantViolation("pwl", "density values must be nonnegative")
        total = sum((xs[i + 1] - xs[i]) * (fs[i] + fs[i + 1]) / 2 for i in range(len(xs) - 1))
        if total <= 0:
            raise InvariantViolation("pwl", "density integrates to zero")
        object.__setattr__(self, "knots",
                           tuple((x, f / total) for x, f in zip(xs, fs)))

    def _arrays(self):
        xs = np.array([float(k[0]) for k in self.knots])
        fs = np.array([float(k[1]) for k in self.knots])
        seg = np.diff(xs)
        areas = seg * (fs[:-1] + fs[1:]) / 2.0
        cum = np.concatenate([[0.0], np.cumsum(areas)])
        return xs, fs, seg, cum

    def sample(self, u):
        u = np.asarray(u, dtype=float)
        xs, fs, seg, cum = self._arrays()
        i = np.clip(np.searchsorted(cum[1:-1], u, side="right"), 0, len(seg) - 1)
        f0 = fs[i]
        slope = (fs[i + 1] - fs[i]) / seg[i]
        rem = u - cum[i]
        lin = np.abs(slope) < 1e-300
        denom = np.where(lin, 1.0, slope)
        disc = np.maximum(f0 * f0 + 2.0 * denom * rem, 0.0)
        t_quad = (-f0 + np.sqrt(disc)) / denom
        t_lin = rem / np.where(f0 > 0, f0, 1.0)
        t = np.where(lin, t_lin, t_quad)
        return xs[i] + np.clip(t, 0.0, seg[i])

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xs, fs, _, _ = self._arrays()
        inside = (x >= xs[0]) & (x <= xs[-1])
        return np.where(inside, np.interp(x, xs, fs), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        xs, fs, seg, cum = self._arrays()
        i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(seg) - 1)
        t = np.clip(x - xs[i], 0.0, seg[i])
        slope = (fs[i + 1] - fs[i]) / seg[i]
        val = cum[i] + fs[i] * t + 0.5 * slope * t * t
        return np.clip(np.where(x < xs[0], 0.0, np.where(x > xs[-1], 1.0, val)), 0.0, 1.0)

    def tv(self) -> float:
        fs = [k[1] for k in self.knots]
        jumps = fs[0] + fs[-1]
        return float(jumps + sum(abs(f2 - f1) for f1, f2 in zip(fs, fs[1:])))

    def scaled(self, c: Fraction) -> "PiecewiseLinear":
        return PiecewiseLinear(tuple((x * c, f / c) for x, f in self.knots))

    def dump(self) -> dict:
        return {"type": "pwl",
                "knots": [[_dump_frac(x), _dump_frac(f)] for x, f in self.knots]}


Marginal = Union[Normal, Uniform, PiecewiseLinear]
_CONTINUOUS = (Normal, Uniform, PiecewiseLinear)


# ---------------------------------------------------------------------------
# q and T specifications


@dataclass(frozen=True)
class FixedVec:
    values: tuple

    def dump(self):
        return {"type": "fixed", "value": [_dump_frac(v) for v in self.values]}


@dataclass(frozen=True)
class FiniteVec:
    points: tuple          # tuple of tuples of Fractions
    probs: tuple

    def __post_init__(self):
        if sum(self.probs) != 1:
            raise InvariantViolation("probs", "must sum to one exactly")
        if any(p < 0 for p in self.probs):
            raise InvariantViolation("probs", "must be nonnegative")

    def dump(self):
        return {"type": "finite",
                "points": [[_dump_frac(v) for v in p] for p in self.points],
                "probs": [_dump_frac(p) for p in self.probs]}


@dataclass(frozen=True)
class IndepCoords:
    coords: tuple          # Normal / Uniform per coordinate

    def dump(self):
        return [c.dump() for c in self.coords]


QDist = Union[FixedVec, FiniteVec, IndepCoords]


@dataclass(frozen=True)
class FixedMat:
    matrix: tuple          # tuple of row tuples (Fractions)

    def dump(self):
        return {"type": "fixed", "matrix": [[_dump_frac(v) for v in r] for r in self.matrix]}


@dataclass(frozen=True)
class FiniteMat:
    points: tuple          # tuple of matrices
    probs: tuple

    def __post_init__(self):
        if sum(self.probs) != 1:
            raise InvariantViolation("probs", "must sum to one exactly")

    def dump(self):
        return {"type": "finite",
                "points": [[[_dump_frac(v) for v in r] for r in p] for p in self.points],
                "probs": [_dump_frac(p) for p in self.probs]}


TDist = Union[FixedMat, FiniteMat]


@dataclass(frozen=True)
class DistributionSpec:
    """Joint law of (q, T, h) with (q, T) independent of h.

    h must be a product of one-dimensional continuous marginals; anything
    else is rejected here because every downstream bound needs a density.
    """

    q: QDist
    T: TDist
    h: tuple  # of Marginal

    def __post_init__(self):
        for i, marg in enumerate(self.h):
            if not isinstance(marg, _CONTINUOUS):
                raise InvariantViolation(f"h_dist[{i}]", "h must be continuous")

    # -- slot layout for the counter-based sampler -------------------------
    @property
    def _q_slots(self) -> int:
        if isinstance(self.q, FixedVec):
            return 0
        if isinstance(self.q, FiniteVec):
            return 1
        return len(self.q.coords)

    @property
    def _t_slots(self) -> int:
        return 0 if isinstance(self.T, FixedMat) else 1

    def scaled_q(self, c: Fraction) -> "DistributionSpec":
        """Pushforward of q under multiplication by c > 0; T and h unchanged."""
        if c <= 0:
            raise InvariantViolation("c_scale", "must be positive")
        q = self.q
        if isinstance(q, FixedVec):
            q2 = FixedVec(tuple(v * c for v in q.values))
        elif isinstance(q, FiniteVec):
            q2 = FiniteVec(tuple(tuple(v * c for v in p) for p in q.points), q.probs)
        else:
            q2 = IndepCoords(tuple(m.scaled(c) for m in q.coords))
        return DistributionSpec(q2, self.T, self.h)


# ---------------------------------------------------------------------------
# sampling


def _sample_finite(points_flat: np.ndarray, probs: Sequence[Fraction], u: np.ndarray):
    cdf = np.cumsum(np.array([float(p) for p in probs]))
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    return points_flat[idx]


def draw_batch(spec: DistributionSpec, seed: int, start: int, count: int):
    """Scenarios start..start+count-1 as float arrays (Q, T, H).

    T is returned as an array of shape (count, m, n1) only when it is random;
    a fixed T comes back as a single (m, n1) array.
    """
    idx = np.arange(start, start + count, dtype=np.uint64)
    slot = 0
    q = spec.q
    if isinstance(q, FixedVec):
        Q = np.tile(np.array([float(v) for v in q.values]), (count, 1))
    elif isinstance(q, FiniteVec):
        pts = np.array([[float(v) for v in p] for p in q.points])
        Q = _sample_finite(pts, q.probs, uniform_stream(seed, idx, slot))
        slot += 1
    else:
        cols = []
        for marg in q.coords:
            cols.append(marg.sample(uniform_stream(seed, idx, slot)))
            slot += 1
        Q = np.column_stack(cols)

    T = spec.T
    if isinstance(T, FixedMat):
        Tout = np.array([[float(v) for v in r] for r in T.matrix])
    else:
        pts = np.array([[[float(v) for v in r] for r in p] for p in T.points])
        Tout = _sample_finite(pts, T.probs, uniform_stream(seed, idx, slot))
        slot += 1

    H = np.column_stack([marg.sample(uniform_stream(seed, idx, slot + j))
                         for j, marg in enumerate(spec.h)])
    return Q, Tout, H


def draw_scenario(spec: DistributionSpec, seed: int, index: int):
    """Single scenario (q, T, h); identical to row `index` of any batch."""
    Q, T, H = draw_batch(spec, seed, index, 1)
    Tm = T if T.ndim == 2 else T[0]
    return Q[0].tolist(), [r.tolist() for r in Tm], H[0].tolist()


# ---------------------------------------------------------------------------
# total variation


def tv_numeric(pdf: Callable, domain: tuple[float, float], refinement: int) -> list[float]:
    """Partition sums V_f over nested uniform partitions of `domain`.

    Partition sizes double from 2 up to `refinement`; supersets of points can
    only increase the sum, so the sequence is a nondecreasing lower bound on
    the total variation over the interval.
    """
    if refinement < 2:
        raise ValueError("refinement must be at least 2")
    lo, hi = float(domain[0]), float(domain[1])
    sizes = []
    k = 2
    while k < refinement:
        sizes.append(k)
        k *= 2
    sizes.append(refinement)
    out = []
    for nseg in sizes:
        grid = np.linspace(lo, hi, nseg + 1)
        vals = np.asarray(pdf(grid), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("pdf returned a non-finite value on the partition")
        out.append(float(np.sum(np.abs(np.diff(vals)))))
    return out


def tv_conditional_sum(spec: DistributionSpec) -> float:
    """Sum over axes of the expected total variation of the conditional density.

    With independent marginals the conditional law of coordinate i does not
    depend on the rest, so each term collapses to the marginal's total
    variation, which all supported families expose in closed form.
    """
    return float(sum(marg.tv() for marg in spec.h))


def expected_l1_norm(spec: DistributionSpec, n: int = 100_000, seed: int = 0):
    """(E||q||_1, exact_flag); closed form where available, else Monte Carlo."""
    q = spec.q
    if isinstance(q, FixedVec):
        return float(sum(abs(v) for v in q.values)), True
    if isinstance(q, FiniteVec):
        val = sum(p * sum(abs(v) for v in pt) for p, pt in zip(q.probs, q.points))
        return float(val), True
    if all(isinstance(m, Uniform) and m.a >= 0 for m in q.coords):
        return float(sum((m.a + m.b) / 2 for m in q.coords)), True
    Q, _, _ = draw_batch(spec, seed, 0, n)
    return float(np.sum(np.mean(np.abs(Q), axis=0))), False


def representative_q(spec: DistributionSpec) -> Vec:
    """A deterministic central cost vector, used for probe tables."""
    q = spec.q
    if isinstance(q, FixedVec):
        return list(q.values)
    if isinstance(q, FiniteVec):
        return list(q.points[0])
    out = []
    for marg in q.coords:
        out.append(marg.mu if isinstance(marg, Normal) else (marg.a + marg.b) / 2)
    return out


# ---------------------------------------------------------------------------
# JSON (de)serialization


def _dump_frac(x: Fraction):
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_marginal(obj: dict) -> Marginal:
    try:
        kind = obj["type"]
        if kind == "normal":
            return Normal(to_frac(obj["mu"]), to_frac(obj["sigma"]))
        if kind == "uniform":
            return Uniform(to_frac(obj["a"]), to_frac(obj["b"]))
        if kind == "pwl":
            return PiecewiseLinear(tuple((to_frac(x), to_frac(f)) for x, f in obj["knots"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad marginal spec {obj!r}") from exc
    raise ParseError(f"unknown marginal type {obj.get('type')!r}")


def parse_qdist(obj) -> QDist:
    if isinstance(obj, list):
        return IndepCoords(tuple(parse_marginal(o) for o in obj))
    kind = obj.get("type")
    if kind == "fixed":
        return FixedVec(tuple(vec_frac(obj["value"])))
    if kind == "finite":
        return FiniteVec(tuple(tuple(vec_frac(p)) for p in obj["points"]),
                         tuple(vec_frac(obj["probs"])))
    raise ParseError(f"unknown q_dist type {kind!r}")


def parse_tdist(obj) -> TDist:
    kind = obj.get("type")
    if kind == "fixed":
        return FixedMat(tuple(tuple(vec_frac(r)) for r in obj["matrix"]))
    if kind == "finite":
        return FiniteMat(tuple(tuple(tuple(vec_frac(r)) for r in p) for p in obj["points"]),
                         tuple(vec_frac(obj["probs"])))
    raise ParseError(f"unknown T type {kind!r}")


def dump_qdist(q: QDist):
    return q.dump()


def dump_tdist(t: TDist):
    return t.dump()
