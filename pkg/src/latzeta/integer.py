"""Exact integer matrix helpers (column echelon form with unimodular transforms).

Matrices are plain lists of lists of Python ints so that no overflow can occur.
Rows are the objects of interest throughout: a k x d matrix holds k integer
coefficient vectors of length d.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        quot, rem = divmod(a, b)
        a, b = b, rem
        s0, s1 = s1, s0 - quot * s1
        t0, t1 = t1, t0 - quot * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def as_int_rows(mat) -> list[list[int]]:
    arr = np.asarray(mat)
    if arr.ndim == 1:
        arr = arr[None, :]
    return [[int(round(float(v))) for v in row] for row in arr]


class Echelon(NamedTuple):
    """Result of :func:`column_echelon`.

    ``M @ U == H`` where the first ``rank`` columns of ``H`` are in lower
    echelon form and the remaining columns are zero; ``Uinv`` is the exact
    inverse of the unimodular ``U``.
    """

    H: list[list[int]]
    U: list[list[int]]
    Uinv: list[list[int]]
    rank: int
    pivot_rows: list[int]


def column_echelon(mat: Sequence[Sequence[int]]) -> Echelon:
    M = [list(map(int, row)) for row in mat]
    r = len(M)
    c = len(M[0]) if r else 0
    U = [[int(i == j) for j in range(c)] for i in range(c)]
    Uinv = [[int(i == j) for j in range(c)] for i in range(c)]
    p = 0
    pivots = []
    for i in range(r):
        if p >= c:
            break
        for j in range(p + 1, c):
            x, y = M[i][p], M[i][j]
            if y == 0:
                continue
            g, s, t = _egcd(x, y)
            a, b = -y // g, x // g
            # columns (p, j) <- (s*col_p + t*col_j, a*col_p + b*col_j)
            for row in M:
                cp, cj = row[p], row[j]
                row[p], row[j] = s * cp + t * cj, a * cp + b * cj
            for row in U:
                cp, cj = row[p], row[j]
                row[p], row[j] = s * cp + t * cj, a * cp + b * cj
            # inverse transform acts on rows p, j of Uinv
            rp, rj = Uinv[p], Uinv[j]
            Uinv[p] = [b * u - a * v for u, v in zip(rp, rj)]
            Uinv[j] = [-t * u + s * v for u, v in zip(rp, rj)]
        if M[i][p] != 0:
            if M[i][p] < 0:
                for row in M:
                    row[p] = -row[p]
                for row in U:
                    row[p] = -row[p]
                Uinv[p] = [-v for v in Uinv[p]]
            pivots.append(i)
            p += 1
    return Echelon(M, U, Uinv, p, pivots)


def _det(mat: list[list[int]]) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(mat)
    if n == 0:
        return 1
    a = [row[:] for row in mat]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank(rows) -> int:
    return column_echelon(as_int_rows(rows)).rank


def lattice_index(rows) -> int:
    """Index of the integer row span of ``rows`` inside its rational saturation.

    Returns 1 exactly when the rows generate a primitive sublattice of Z^d.
    """
    ech = column_echelon(as_int_rows(rows))
    piv = [ech.H[i][: ech.rank] for i in ech.pivot_rows]
    return abs(_det(piv))


def row_span_basis(rows) -> np.ndarray:
    """Integer basis (as rows) of the Z-span of ``rows``."""
    ech = column_echelon(as_int_rows(rows))
    k = ech.rank
    d = len(ech.U)
    # rows = H @ Uinv and H vanishes beyond column k, so the span is
    # {t @ Uinv[:k] : t in rowspan_Z(H[:, :k])}
    Hk = [row[:k] for row in ech.H]
    T = _square_row_basis(Hk, k)
    return np.array(
        [[sum(T[r][i] * ech.Uinv[i][col] for i in range(k)) for col in range(d)] for r in range(k)],
        dtype=np.int64,
    ).reshape(k, d)


def _square_row_basis(rows: list[list[int]], k: int) -> list[list[int]]:
    """Basis of the Z-span of integer rows of length k that span Q^k."""
    if k == 0:
        return []
    # transpose trick: row span of R equals column span of R^T; the column
    # echelon of R^T gives k generating columns.
    Rt = [[rows[i][j] for i in range(len(rows))] for j in range(k)]
    ech = column_echelon(Rt)
    return [[ech.H[r][c] for r in range(k)] for c in range(ech.rank)]


def saturation(rows) -> tuple[np.ndarray, int]:
    """Basis of ``span_Q(rows) ∩ Z^d`` and the index of the original span in it."""
    ech = column_echelon(as_int_rows(rows))
    k = ech.rank
    d = len(ech.U)
    sat = np.array(ech.Uinv[:k], dtype=np.int64).reshape(k, d)
    piv = [ech.H[i][:k] for i in ech.pivot_rows]
    return sat, abs(_det(piv))


def completion(rows) -> np.ndarray:
    """Unimodular d x d integer matrix whose first k rows span the saturation of ``rows``."""
    ech = column_echelon(as_int_rows(rows))
    return np.array(ech.Uinv, dtype=np.int64)


def kernel(rows) -> np.ndarray:
    """Primitive integer basis (as rows) of ``{x in Z^d : rows @ x = 0}``."""
    ech = column_echelon(as_int_rows(rows))
    d = len(ech.U)
    return np.array([[ech.U[i][j] for i in range(d)] for j in range(ech.rank, d)], dtype=np.int64).reshape(
        d - ech.rank, d
    )
