"""Integer matrix utilities: Smith normal form with transform tracking.

Used to present H1 of a square-tiled surface as a free quotient of the cycle
lattice.  Sizes stay in the low hundreds, so a straightforward exact
implementation is fine.
"""

from __future__ import annotations

from typing import List, Tuple


def smith_basis(M: List[List[int]], n: int) -> Tuple[List[int], List[List[int]], List[List[int]]]:
    """Diagonalize the row lattice of M inside Z^n.

    Returns (d, T, Tinv) where T is a unimodular n x n integer matrix whose
    rows t_1..t_n form a basis of Z^n such that rowspace(M) = span(d_i * t_i)
    for i <= len(d), and Tinv = T^{-1} (so coords of v in the t-basis are
    v @ Tinv read as a row vector times matrix).
    """
    A = [list(row) for row in M]
    rows = len(A)
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)]      # column ops accumulate: A <- A E, V <- V E
    W = [[1 if i == j else 0 for j in range(n)] for i in range(n)]      # W = V^{-1}: W <- E^{-1} W

    def col_swap(j, k):
        for r in A:
            r[j], r[k] = r[k], r[j]
        for r in V:
            r[j], r[k] = r[k], r[j]
        W[j], W[k] = W[k], W[j]

    def col_add(j, k, c):
        # col_j += c * col_k  ; E = I + c e_k e_j^T ; E^{-1} row op: row_k -= c row_j of W
        if c == 0:
            return
        for r in A:
            r[j] += c * r[k]
        for r in V:
            r[j] += c * r[k]
        Wk, Wj = W[k], W[j]
        for t in range(n):
            Wk[t] -= c * Wj[t]

    def col_neg(j):
        for r in A:
            r[j] = -r[j]
        for r in V:
            r[j] = -r[j]
        W[j] = [-x for x in W[j]]

    def row_swap(i, k):
        A[i], A[k] = A[k], A[i]

    def row_add(i, k, c):
        if c == 0:
            return
        Ai, Ak = A[i], A[k]
        for t in range(n):
            Ai[t] += c * Ak[t]

    d: List[int] = []
    r = 0
    c = 0
    while r < rows and c < n:
        # find a pivot: nonzero entry in A[r:, c:] with minimal |value|
        piv = None
        best = None
        for i in range(r, rows):
            for j in range(c, n):
                v = A[i][j]
                if v != 0 and (best is None or abs(v) < best):
                    best = abs(v)
                    piv = (i, j)
        if piv is None:
            break
        while True:
            i, j = piv
            row_swap(r, i)
            col_swap(c, j)
            if A[r][c] < 0:
                col_neg(c)
            p = A[r][c]
            dirty = False
            for i in range(r + 1, rows):
                q = A[i][c] // p
                row_add(i, r, -q)
                if A[i][c] != 0:
                    dirty = True
            for j in range(c + 1, n):
                q = A[r][j] // p
                col_add(j, c, -q)
                if A[r][j] != 0:
                    dirty = True
            if not dirty:
                break
            # a smaller remainder appeared; re-pivot on it
            piv = None
            best = None
            for i in range(r, rows):
                for j in range(c, n):
                    v = A[i][j]
                    if v != 0 and (best is None or abs(v) < best):
                        best = abs(v)
                        piv = (i, j)
        d.append(A[r][c])
        r += 1
        c += 1

    # rows of T are the lattice basis: rowspace(M) = span(d_i * t_i), t_i = row i of W
    return d, W, V


def vec_in_basis(v: List[int], Tinv: List[List[int]]) -> List[int]:
    """Coordinates of v in the t-basis: gamma = v @ Tinv (v as row vector)."""
    n = len(v)
    return [sum(v[i] * Tinv[i][j] for i in range(n)) for j in range(n)]
