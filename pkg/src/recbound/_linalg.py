"""Exact Gaussian elimination over ``Fraction``."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> Optional[list]:
    """Solve the square system ``matrix @ x = rhs`` exactly.

    Returns ``None`` when the matrix is singular.
    """
    n = len(matrix)
    rows = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        piv = rows[col]
        inv = 1 / piv[col]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col] * inv
                row = rows[r]
                for c in range(col, n + 1):
                    if piv[c]:
                        row[c] -= factor * piv[c]
    return [rows[i][n] / rows[i][i] for i in range(n)]
