"""Exact linear algebra over the rationals.

Systems are cleared of denominators and solved with Bareiss' fraction-free
elimination, so every intermediate quantity is an integer and the only
divisions are exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

from .rational import common_denominator


class SingularMatrixError(ValueError):
    pass


def _integer_rows(matrix: Sequence[Sequence[Fraction]], rhs_cols: Sequence[Sequence[Fraction]]):
    n = len(matrix)
    rows = []
    for i in range(n):
        row = [Fraction(x) for x in matrix[i]] + [Fraction(col[i]) for col in rhs_cols]
        den = common_denominator(row)
        rows.append([int(x * den) for x in row])
    return rows


def bareiss_solve(matrix: Sequence[Sequence[Fraction]], *rhs: Sequence[Fraction]) -> List[List[Fraction]]:
    """Solve ``matrix @ x = b`` for every right-hand side ``b`` in ``rhs``.

    Each row is scaled to integers independently, which does not change the
    solution set.  Returns one solution vector per right-hand side.
    """
    n = len(matrix)
    if n == 0:
        return [[] for _ in rhs]
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix must be square")
    a = _integer_rows(matrix, rhs)
    width = n + len(rhs)
    prev = 1
    for k in range(n):
        pivot = next((i for i in range(k, n) if a[i][k] != 0), None)
        if pivot is None:
            raise SingularMatrixError(f"matrix is singular (column {k})")
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, width):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    solutions = []
    for c in range(len(rhs)):
        col = n + c
        x: List[Fraction] = [Fraction(0)] * n
        for i in range(n - 1, -1, -1):
            acc = Fraction(a[i][col])
            for j in range(i + 1, n):
                if a[i][j]:
                    acc -= a[i][j] * x[j]
            x[i] = acc / a[i][i]
        solutions.append(x)
    return solutions


def solve(matrix: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> List[Fraction]:
    return bareiss_solve(matrix, b)[0]


def inverse(matrix: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    n = len(matrix)
    cols = [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    sol = bareiss_solve(matrix, *cols)
    # sol[j] is column j of the inverse
    return [[sol[j][i] for j in range(n)] for i in range(n)]


def determinant(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    dens = [common_denominator(row) for row in matrix]
    a = [[int(Fraction(x) * d) for x in row] for row, d in zip(matrix, dens)]
    sign, prev = 1, 1
    for k in range(n - 1):
        pivot = next((i for i in range(k, n) if a[i][k] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    scale = 1
    for d in dens:
        scale *= d
    return Fraction(sign * a[n - 1][n - 1], scale)


def rank(matrix: Sequence[Sequence[Fraction]]) -> int:
    """Row rank by fraction-free elimination (rectangular input allowed)."""
    if not matrix:
        return 0
    rows = [[Fraction(x) for x in row] for row in matrix]
    a = []
    for row in rows:
        d = common_denominator(row)
        a.append([int(x * d) for x in row])
    m, n = len(a), len(a[0])
    r, prev = 0, 1
    for c in range(n):
        pivot = next((i for i in range(r, m) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        for i in range(r + 1, m):
            for j in range(c + 1, n):
                a[i][j] = (a[i][j] * a[r][c] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = a[r][c]
        r += 1
        if r == m:
            break
    return r
