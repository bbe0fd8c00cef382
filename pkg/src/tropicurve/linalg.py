"""Exact linear algebra helpers.

Small dense systems over the rationals (Gaussian elimination on
Fractions) and the Smith normal form of integer matrices, both with
arbitrary precision.  Matrices are lists of lists; nothing here is sized
for more than a few dozen rows.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence


def solve_linear(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Solve rows * x = rhs exactly.

    Returns one solution (free variables pinned to 0) or None when the
    system is inconsistent.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [[Fraction(v) for v in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(n):
        pivot_row = next((i for i in range(r, m) if a[i][c] != 0), None)
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        pv = a[r][c]
        a[r] = [v / pv for v in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append((r, c))
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if a[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for row, col in pivots:
        x[col] = a[row][n]
    return x


def matrix_rank(rows: Sequence[Sequence[int]]) -> int:
    m = len(rows)
    if m == 0:
        return 0
    n = len(rows[0])
    a = [[Fraction(v) for v in row] for row in rows]
    rank = 0
    for c in range(n):
        pivot_row = next((i for i in range(rank, m) if a[i][c] != 0), None)
        if pivot_row is None:
            continue
        a[rank], a[pivot_row] = a[pivot_row], a[rank]
        pv = a[rank][c]
        for i in range(rank + 1, m):
            if a[i][c] != 0:
                f = a[i][c] / pv
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[rank])]
        rank += 1
        if rank == m:
            break
    return rank


def invert_matrix(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Inverse of a square nonsingular matrix over the rationals."""
    n = len(rows)
    a = [[Fraction(v) for v in row] + [Fraction(1 if i == j else 0) for j in range(n)]
         for i, row in enumerate(rows)]
    for c in range(n):
        pivot_row = next((i for i in range(c, n) if a[i][c] != 0), None)
        if pivot_row is None:
            raise ValueError("singular matrix")
        a[c], a[pivot_row] = a[pivot_row], a[c]
        pv = a[c][c]
        a[c] = [v / pv for v in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[c])]
    return [row[n:] for row in a]


def smith_normal_form(rows: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero elementary divisors d1 | d2 | ... of an integer matrix.

    Plain row/column reduction with gcd pivoting; exact for arbitrary
    precision integers.  Returns the positive diagonal entries.
    """
    a = [list(map(int, row)) for row in rows]
    m = len(a)
    n = len(a[0]) if m else 0
    divisors: list[int] = []
    top = 0
    while top < m and top < n:
        # find a nonzero pivot
        pivot = None
        for i in range(top, m):
            for j in range(top, n):
                if a[i][j] != 0:
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            break
        pi, pj = pivot
        a[top], a[pi] = a[pi], a[top]
        for row in a:
            row[top], row[pj] = row[pj], row[top]
        while True:
            # clear the pivot column
            changed = False
            for i in range(top + 1, m):
                if a[i][top] != 0:
                    q = a[i][top] // a[top][top]
                    a[i] = [vi - q * vt for vi, vt in zip(a[i], a[top])]
                    if a[i][top] != 0:
                        a[top], a[i] = a[i], a[top]
                        changed = True
            # clear the pivot row
            for j in range(top + 1, n):
                if a[top][j] != 0:
                    q = a[top][j] // a[top][top]
                    for row in a:
                        row[j] -= q * row[top]
                    if a[top][j] != 0:
                        for row in a:
                            row[top], row[j] = row[j], row[top]
                        changed = True
            if not changed:
                break
        # enforce divisibility of the remaining block by the pivot
        d = abs(a[top][top])
        adjusted = False
        for i in range(top + 1, m):
            for j in range(top + 1, n):
                if a[i][j] % d != 0:
                    # add row i to the pivot row and restart this pivot
                    a[top] = [vt + vi for vt, vi in zip(a[top], a[i])]
                    adjusted = True
                    break
            if adjusted:
                break
        if adjusted:
            continue
        divisors.append(d)
        top += 1
    return divisors


def content(vector: Iterable[int]) -> int:
    """gcd of the entries (0 for the zero vector)."""
    g = 0
    for v in vector:
        g = math.gcd(g, abs(v))
    return g


def primitive(vector: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Split an integer vector as m * w with w primitive; returns (m, w)."""
    g = content(vector)
    if g == 0:
        raise ValueError("zero vector has no primitive direction")
    return g, tuple(v // g for v in vector)


def is_saturated_span(rows: Sequence[Sequence[int]]) -> tuple[bool, list[int]]:
    """Whether the Z-span of the rows is saturated in Z^n.

    Saturated means every elementary divisor equals 1.  Returns the flag
    together with the divisor list (the certificate).
    """
    divisors = smith_normal_form(rows)
    return all(d == 1 for d in divisors), divisors


def integer_points_in_box(
    columns: Sequence[Sequence[Fraction]],
    lower: Sequence[Fraction],
    upper: Sequence[Fraction],
) -> list[tuple[int, ...]]:
    """All k in Z^g with lower <= M k <= upper (component-wise).

    ``columns`` are the columns of a nonsingular g x g rational matrix M.
    Solves by interval propagation through M^{-1}: the preimage of the box
    is bounded, each coordinate of k ranges in an interval computed from
    the inverse, and candidates are filtered exactly.  Intended for g <= 4.
    """
    g = len(columns)
    if g == 0:
        return [()]
    m_rows = [[columns[j][i] for j in range(g)] for i in range(g)]
    inv = invert_matrix(m_rows)
    ranges = []
    for i in range(g):
        lo = Fraction(0)
        hi = Fraction(0)
        for j in range(g):
            c = inv[i][j]
            if c >= 0:
                lo += c * lower[j]
                hi += c * upper[j]
            else:
                lo += c * upper[j]
                hi += c * lower[j]
        ranges.append(range(math.ceil(lo), math.floor(hi) + 1))
    out = []
    for combo in _product_ranges(ranges):
        image = [sum(columns[j][i] * combo[j] for j in range(g)) for i in range(g)]
        if all(lower[i] <= image[i] <= upper[i] for i in range(g)):
            out.append(tuple(combo))
    return out


def _product_ranges(ranges):
    if not ranges:
        yield ()
        return
    head, *tail = ranges
    for v in head:
        for rest in _product_ranges(tail):
            yield (v,) + rest
