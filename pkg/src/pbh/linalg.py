"""Small dense linear algebra over generic (float-or-jet) scalars.

Matrices are lists of lists; dimensions here are chart dimensions (<= 4 or
so), so plain Gaussian elimination with partial pivoting on base values is
both fast enough and jet-transparent.
"""

from __future__ import annotations

import math

from .errors import NotPositiveDefiniteError, SingularMatrixError
from .jets import value


def mat_vec(A, v):
    return [sum(A[i][j] * v[j] for j in range(len(v))) for i in range(len(A))]


def mat_mul(A, B):
    n, m, k = len(A), len(B[0]), len(B)
    return [[sum(A[i][l] * B[l][j] for l in range(k)) for j in range(m)] for i in range(n)]


def transpose(A):
    return [list(row) for row in zip(*A)]


def solve(A, B):
    """Solve A X = B for X; B is a matrix (list of rows). Partial pivoting on base values."""
    n = len(A)
    a = [list(row) for row in A]
    b = [list(row) for row in B]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value(a[r][col])))
        if abs(value(a[piv][col])) == 0.0:
            raise SingularMatrixError(f"zero pivot in column {col}")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
        inv = 1.0 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if isinstance(f, float) and f == 0.0:
                continue
            for c in range(col, n):
                a[r][c] = a[r][c] - f * a[col][c]
            for c in range(len(b[0])):
                b[r][c] = b[r][c] - f * b[col][c]
    x = [[None] * len(b[0]) for _ in range(n)]
    for r in range(n - 1, -1, -1):
        inv = 1.0 / a[r][r]
        for c in range(len(b[0])):
            s = b[r][c]
            for k in range(r + 1, n):
                s = s - a[r][k] * x[k][c]
            x[r][c] = s * inv
    return x


def inverse(A):
    n = len(A)
    eye = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    return solve(A, eye)


def det(A):
    n = len(A)
    a = [list(row) for row in A]
    sign = 1.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value(a[r][col])))
        if abs(value(a[piv][col])) == 0.0:
            return 0.0 * a[0][0]
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            for c in range(col, n):
                a[r][c] = a[r][c] - f * a[col][c]
    d = a[0][0]
    for i in range(1, n):
        d = d * a[i][i]
    return sign * d


def cholesky(A):
    """Float-only Cholesky; raises NotPositiveDefiniteError on failure."""
    n = len(A)
    L = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = sum(L[i][k] * L[j][k] for k in range(j))
            if i == j:
                d = A[i][i] - s
                if d <= 0.0:
                    raise NotPositiveDefiniteError(f"leading minor {i + 1} not positive")
                L[i][j] = math.sqrt(d)
            else:
                L[i][j] = (A[i][j] - s) / L[j][j]
    return L


def is_spd(A) -> bool:
    try:
        cholesky([[value(x) for x in row] for row in A])
        return True
    except NotPositiveDefiniteError:
        return False
