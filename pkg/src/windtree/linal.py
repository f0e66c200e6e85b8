"""Small exact linear algebra over Fraction or QNum entries.

Matrices are lists of lists; entries must support +, -, *, /, bool and ==.
These routines are used for homology bases, eigenspace splittings and
number-field witness computations, where exactness matters and sizes are
small (a few hundred at most).
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence


def mat_copy(A):
    return [list(row) for row in A]


def identity(n, one=Fraction(1), zero=Fraction(0)):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    n, k = len(A), len(B)
    m = len(B[0]) if B else 0
    out = []
    for i in range(n):
        Ai = A[i]
        row = []
        for j in range(m):
            s = Ai[0] * B[0][j]
            for t in range(1, k):
                s = s + Ai[t] * B[t][j]
            row.append(s)
        out.append(row)
    return out


def mat_vec(A, v):
    return [sum_prod(row, v) for row in A]


def sum_prod(row, v):
    s = row[0] * v[0]
    for t in range(1, len(row)):
        s = s + row[t] * v[t]
    return s


def transpose(A):
    return [list(col) for col in zip(*A)]


def rref(A):
    """Reduced row echelon form.  Returns (R, pivot_columns)."""
    R = mat_copy(A)
    n = len(R)
    m = len(R[0]) if n else 0
    pivots: List[int] = []
    r = 0
    for c in range(m):
        piv = None
        for i in range(r, n):
            if R[i][c]:
                piv = i
                break
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = R[r][c]
        R[r] = [x / inv for x in R[r]]
        for i in range(n):
            if i != r and R[i][c]:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    return R, pivots


def nullspace(A):
    """Basis for the right kernel of A (list of vectors)."""
    n = len(A)
    m = len(A[0]) if n else 0
    if n == 0:
        return identity(m)
    R, pivots = rref(A)
    zero = R[0][0] - R[0][0] if m else Fraction(0)
    one = zero + 1
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        v = [zero] * m
        v[fc] = one
        for r, pc in enumerate(pivots):
            v[pc] = -R[r][fc]
        basis.append(v)
    return basis


def solve(A, b):
    """One solution x of A x = b, or None if inconsistent."""
    n = len(A)
    m = len(A[0]) if n else 0
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    R, pivots = rref(aug)
    if m in pivots:
        return None
    zero = R[0][0] - R[0][0] if n else Fraction(0)
    x = [zero] * m
    for r, pc in enumerate(pivots):
        x[pc] = R[r][m]
    return x


def inverse(A):
    n = len(A)
    zero = A[0][0] - A[0][0]
    one_candidates = [A[i][j] for i in range(n) for j in range(n) if A[i][j]]
    one = one_candidates[0] / one_candidates[0]
    aug = [list(A[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    R, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix not invertible")
    return [row[n:] for row in R]


def det(A):
    """Determinant by fraction-free-ish Gaussian elimination (exact field ops)."""
    n = len(A)
    M = mat_copy(A)
    zero = M[0][0] - M[0][0]
    sign = 1
    d = None
    for c in range(n):
        piv = None
        for i in range(c, n):
            if M[i][c]:
                piv = i
                break
        if piv is None:
            return zero
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            sign = -sign
        d = M[c][c] if d is None else d * M[c][c]
        inv = M[c][c]
        for i in range(c + 1, n):
            if M[i][c]:
                f = M[i][c] / inv
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return d * sign if sign == 1 else -d


def rank(A) -> int:
    _, pivots = rref(A)
    return len(pivots)


def row_space_contains(A, v) -> bool:
    """Is v in the row space of A?"""
    return solve(transpose(A), v) is not None
