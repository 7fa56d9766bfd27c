"""Exact rational linear algebra on plain nested lists of Fractions.

Everything here is deterministic and allocation-light; matrices are small
(m <= 3 rows at desk scale), so clarity beats asymptotics.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vec = list[Fraction]
Mat = list[list[Fraction]]


def to_frac(x) -> Fraction:
    """Coerce ints, Fractions, floats and "p/q" strings to an exact Fraction.

    Floats are converted by their exact binary expansion, so round-trips
    through float never introduce hidden error on our side.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def vec_frac(xs: Iterable) -> Vec:
    return [to_frac(x) for x in xs]


def mat_frac(rows: Iterable[Iterable]) -> Mat:
    return [vec_frac(r) for r in rows]


def mat_col(a: Mat, j: int) -> Vec:
    return [row[j] for row in a]


def mat_vec(a: Mat, x: Sequence[Fraction]) -> Vec:
    return [sum(aij * xj for aij, xj in zip(row, x)) for row in a]


def vec_mat(x: Sequence[Fraction], a: Mat) -> Vec:
    n = len(a[0])
    return [sum(x[i] * a[i][j] for i in range(len(a))) for j in range(n)]


def mat_mul(a: Mat, b: Mat) -> Mat:
    n = len(b[0])
    return [[sum(ar[k] * b[k][j] for k in range(len(b))) for j in range(n)] for ar in a]


def dot(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    return sum((xi * yi for xi, yi in zip(x, y)), Fraction(0))


def det(a: Mat) -> Fraction:
    """Determinant by Gaussian elimination with exact pivoting."""
    n = len(a)
    m = [row[:] for row in a]
    sign = 1
    d = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        d *= m[k][k]
        for i in range(k + 1, n):
            f = m[i][k] / m[k][k]
            if f == 0:
                continue
            for j in range(k, n):
                m[i][j] -= f * m[k][j]
    return sign * d


def inv(a: Mat) -> Mat:
    """Exact inverse via Gauss-Jordan; raises ValueError on singular input."""
    n = len(a)
    m = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
        pk = m[k][k]
        m[k] = [x / pk for x in m[k]]
        for i in range(n):
            if i != k and m[i][k] != 0:
                f = m[i][k]
                m[i] = [x - f * y for x, y in zip(m[i], m[k])]
    return [row[n:] for row in m]


def rank(a: Mat) -> int:
    """Row rank by exact Gaussian elimination."""
    if not a or not a[0]:
        return 0
    m = [row[:] for row in a]
    rows, cols = len(m), len(m[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == rows:
            break
    return r


def null_vector(rows: Mat, m: int):
    """A nonzero vector orthogonal to every row, or None unless rank == m-1."""
    if not rows:
        return None
    red = [row[:] for row in rows]
    nr = len(red)
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, nr) if red[i][c] != 0), None)
        if piv is None:
            continue
        red[r], red[piv] = red[piv], red[r]
        pr = red[r][c]
        red[r] = [x / pr for x in red[r]]
        for i in range(nr):
            if i != r and red[i][c] != 0:
                f = red[i][c]
                red[i] = [x - f * y for x, y in zip(red[i], red[r])]
        pivots.append(c)
        r += 1
    if r != m - 1:
        return None
    free = next(c for c in range(m) if c not in pivots)
    out = [Fraction(0)] * m
    out[free] = Fraction(1)
    for i, c in enumerate(pivots):
        out[c] = -red[i][free]
    return out


def frac_part(x: Fraction) -> Fraction:
    """Fractional part in [0, 1)."""
    return x - (x.numerator // x.denominator)


def is_integral(x: Fraction) -> bool:
    return x.denominator == 1
