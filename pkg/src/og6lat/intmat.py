"""Exact integer and rational matrix routines.

Everything in this package runs on arbitrary-precision integers and
`fractions.Fraction`; matrices are tuples of tuples (immutable) or lists of
lists (scratch).  Ranks never exceed ~10, so the classical algorithms below
(Smith normal form with transformation matrices, Bareiss determinants,
fraction-free kernels) are more than fast enough and keep every result exact.
"""

from __future__ import annotations

from fractions import Fraction

Matrix = tuple[tuple[int, ...], ...]


def mat(rows) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zeros(n: int, m: int) -> Matrix:
    return tuple((0,) * m for _ in range(n))


def transpose(a) -> Matrix:
    return tuple(zip(*a)) if a else ()


def mat_mul(a, b):
    if not a or not b:
        return tuple(() for _ in a)
    bt = list(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def mat_vec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(a, c):
    return tuple(tuple(c * x for x in row) for row in a)


def mat_eq(a, b) -> bool:
    return mat(a) == mat(b)


def det_bareiss(a) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(row) for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def smith_normal_form(a) -> tuple[Matrix, Matrix, Matrix]:
    """Smith normal form with transforms: returns (d, u, v) with u*a*v = d.

    u and v are unimodular; d is diagonal (rectangular allowed) with
    d[i][i] | d[i+1][i+1] and nonnegative diagonal entries.
    """
    m = [list(row) for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    u = [list(row) for row in identity(rows)]
    v = [list(row) for row in identity(cols)]

    def row_op(i, j, c):  # row_i -= c * row_j
        for t in range(cols):
            m[i][t] -= c * m[j][t]
        for t in range(rows):
            u[i][t] -= c * u[j][t]

    def col_op(i, j, c):  # col_i -= c * col_j
        for t in range(rows):
            m[t][i] -= c * m[t][j]
        for t in range(cols):
            v[t][i] -= c * v[t][j]

    def row_swap(i, j):
        m[i], m[j] = m[j], m[i]
        u[i], u[j] = u[j], u[i]

    def col_swap(i, j):
        for t in range(rows):
            m[t][i], m[t][j] = m[t][j], m[t][i]
        for t in range(cols):
            v[t][i], v[t][j] = v[t][j], v[t][i]

    def min_pivot(s):
        best = None
        for i in range(s, rows):
            for j in range(s, cols):
                if m[i][j] != 0 and (best is None or abs(m[i][j]) < abs(m[best[0]][best[1]])):
                    best = (i, j)
        return best

    s = 0
    while s < min(rows, cols):
        piv = min_pivot(s)
        if piv is None:
            break
        row_swap(s, piv[0])
        col_swap(s, piv[1])
        while True:
            done = True
            for i in range(s + 1, rows):
                if m[i][s] != 0:
                    q = m[i][s] // m[s][s]
                    row_op(i, s, q)
                    if m[i][s] != 0:  # remainder became new, smaller pivot
                        row_swap(s, i)
                        done = False
            for j in range(s + 1, cols):
                if m[s][j] != 0:
                    q = m[s][j] // m[s][s]
                    col_op(j, s, q)
                    if m[s][j] != 0:
                        col_swap(s, j)
                        done = False
            if done and all(m[i][s] == 0 for i in range(s + 1, rows)) \
                    and all(m[s][j] == 0 for j in range(s + 1, cols)):
                break
        # divisibility fix-up: pivot must divide the remaining block
        fixed = False
        for i in range(s + 1, rows):
            if fixed:
                break
            for j in range(s + 1, cols):
                if m[i][j] % m[s][s] != 0:
                    row_op(s, i, -1)  # add row i to row s, then restart step s
                    fixed = True
                    break
        if fixed:
            continue
        if m[s][s] < 0:
            for t in range(cols):
                m[s][t] = -m[s][t]
            for t in range(rows):
                u[s][t] = -u[s][t]
        s += 1

    return mat(m), mat(u), mat(v)


def snf_divisors(a) -> tuple[int, ...]:
    d, _, _ = smith_normal_form(a)
    n = min(len(d), len(d[0]) if d else 0)
    return tuple(d[i][i] for i in range(n))


def kernel_basis(a) -> Matrix:
    """Basis (rows) of the saturated integer kernel {x : a @ x = 0}."""
    if not a:
        return ()
    d, _, v = smith_normal_form(a)
    rows = len(d)
    cols = len(d[0])
    rank = sum(1 for i in range(min(rows, cols)) if d[i][i] != 0)
    vt = transpose(v)
    return tuple(vt[j] for j in range(rank, cols))


def solve_int(a, b):
    """One integer solution x of a @ x = b, or None."""
    d, u, v = smith_normal_form(a)
    rows = len(a)
    cols = len(a[0]) if a else 0
    c = mat_vec(u, b)
    y = [0] * cols
    for i in range(min(rows, cols)):
        if d[i][i] == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % d[i][i] != 0:
                return None
            y[i] = c[i] // d[i][i]
    for i in range(min(rows, cols), rows):
        if c[i] != 0:
            return None
    return mat_vec(v, y)


def inverse_frac(a):
    """Exact inverse of a square integer (or Fraction) matrix."""
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    inv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        m[col], m[piv] = m[piv], m[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        inv[col] = [x / p for x in inv[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return tuple(tuple(row) for row in inv)


def hnf_row_basis(rows_in, n: int) -> Matrix:
    """Row-style Hermite basis of the lattice spanned by `rows_in` in Z^n.

    Returns a full-rank-or-smaller tuple of basis rows (row echelon over Z).
    """
    basis = [list(r) for r in rows_in if any(r)]
    if not basis:
        return ()
    # column-by-column integer echelon
    out = []
    work = basis
    col = 0
    while col < n and work:
        pivots = [r for r in work if r[col] != 0]
        rest = [r for r in work if r[col] == 0]
        if not pivots:
            col += 1
            continue
        while len(pivots) > 1:
            pivots.sort(key=lambda r: abs(r[col]))
            p = pivots[0]
            new = [p]
            for r in pivots[1:]:
                q = r[col] // p[col]
                rr = [x - q * y for x, y in zip(r, p)]
                if rr[col] != 0:
                    new.append(rr)
                elif any(rr):
                    rest.append(rr)
            pivots = new
        p = pivots[0]
        if p[col] < 0:
            p = [-x for x in p]
        out.append(p)
        work = rest
        col += 1
    # reduce upper entries for determinism
    for i in reversed(range(len(out))):
        lead = next(j for j in range(n) if out[i][j] != 0)
        for k in range(i):
            q = out[k][lead] // out[i][lead]
            if q:
                out[k] = [x - q * y for x, y in zip(out[k], out[i])]
    return mat(out)


def saturation(rows_in, n: int) -> Matrix:
    """Basis rows of the saturation of the span of `rows_in` inside Z^n."""
    b = hnf_row_basis(rows_in, n)
    if not b:
        return ()
    # saturation = kernel of the kernel: x in Q-span intersect Z^n
    k = kernel_basis(mat(b))  # vectors orthogonal (dot) to the span? no:
    # kernel_basis solves b @ x = 0 i.e. x orthogonal to rows under dot
    if not k:
        return identity(n)
    return kernel_basis(mat(k))


def span_index(sub_rows, full_rows, n: int) -> int:
    """Index [full : sub] of one integer row-span inside another."""
    bs = hnf_row_basis(sub_rows, n)
    bf = hnf_row_basis(full_rows, n)
    if len(bs) != len(bf):
        raise ValueError("spans have different ranks")
    # express sub basis in terms of full basis, integrally
    bf_t = transpose(bf)
    coords = []
    for r in bs:
        x = solve_int(bf_t, r)
        if x is None:
            raise ValueError("sub-span is not contained in full span")
        coords.append(x[: len(bf)])
    d = det_bareiss(mat(coords))
    return abs(d)
