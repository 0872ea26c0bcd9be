"""Analysis of explicit lattice isometries.

Invariant and coinvariant sublattices are computed as saturated integer
kernels of g - 1 and 1 + g + ... + g^(n-1); the spinor norm follows the
convention that a reflection in a negative-square vector has norm +1, so the
kernel of the norm is exactly the subgroup preserving the orientation of a
maximal positive-definite subspace.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .fqf import FqfIsometry, induced_action
from .intmat import (
    identity,
    inverse_frac,
    kernel_basis,
    mat,
    mat_mul,
    snf_divisors,
    transpose,
)
from .lattice import (
    GramLattice,
    LatticeError,
    SignaturePair,
    determinant,
    signature,
    sublattice_gram,
)

ORDER_GUARD = 60


class IsometryError(ValueError):
    pass


@dataclass(frozen=True)
class IsometryRecord:
    lattice: GramLattice
    matrix: tuple
    order: int
    disc_order: int
    invariant: GramLattice
    invariant_basis: tuple
    coinvariant: GramLattice
    coinvariant_basis: tuple
    spinor: int
    index_exponent: int


def verify_isometry(L: GramLattice, g) -> int:
    """Assert g is an isometry of L and return its multiplicative order."""
    g = mat(g)
    n = L.rank
    if len(g) != n or any(len(row) != n for row in g):
        raise IsometryError("matrix size does not match the lattice rank")
    if mat_mul(mat_mul(transpose(g), L.gram), g) != L.gram:
        raise IsometryError("matrix does not preserve the form")
    from .intmat import det_bareiss
    if abs(det_bareiss(g)) != 1:
        raise IsometryError("matrix is not unimodular")
    power = g
    ident = identity(n)
    for k in range(1, ORDER_GUARD + 1):
        if power == ident:
            return k
        power = mat_mul(power, g)
    raise IsometryError("order guard exceeded")


def invariant_coinvariant(L: GramLattice, g, order: int
                          ) -> tuple[GramLattice, tuple, GramLattice, tuple]:
    """Saturated kernels of g - 1 and of the norm map, with their bases."""
    g = mat(g)
    n = L.rank
    ident = identity(n)
    gm1 = tuple(tuple(g[i][j] - ident[i][j] for j in range(n)) for i in range(n))
    norm = ident
    power = ident
    for _ in range(order - 1):
        power = mat_mul(power, g)
        norm = tuple(tuple(norm[i][j] + power[i][j] for j in range(n))
                     for i in range(n))
    inv_rows = kernel_basis(gm1)
    coinv_rows = kernel_basis(norm)
    inv = sublattice_gram(L, inv_rows) if inv_rows else GramLattice(())
    coinv = sublattice_gram(L, coinv_rows) if coinv_rows else GramLattice(())
    if len(inv_rows) + len(coinv_rows) != n:
        raise IsometryError("kernel ranks do not sum to the lattice rank")
    for v in inv_rows:
        for w in coinv_rows:
            if L.bilinear(v, w) != 0:
                raise IsometryError("invariant and coinvariant are not orthogonal")
    return inv, inv_rows, coinv, coinv_rows


def _positive_frame(L: GramLattice):
    """Columns spanning a maximal positive-definite subspace, via the same
    deterministic symmetric reduction used for the signature."""
    n = L.rank
    m = [[Fraction(x) for x in row] for row in L.gram]
    basis = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    # basis rows express the current congruence basis in lattice coordinates
    used = [False] * n
    pos_rows = []
    for _ in range(n):
        piv = next((i for i in range(n) if not used[i] and m[i][i] != 0), None)
        if piv is None:
            pair = None
            for i in range(n):
                if used[i]:
                    continue
                for j in range(n):
                    if not used[j] and j != i and m[i][j] != 0:
                        pair = (i, j)
                        break
                if pair:
                    break
            if pair is None:
                break
            i, j = pair
            for t in range(n):
                m[i][t] += m[j][t]
            for t in range(n):
                m[t][i] += m[t][j]
            for t in range(n):
                basis[i][t] += basis[j][t]
            piv = i
        d = m[piv][piv]
        if d > 0:
            pos_rows.append(list(basis[piv]))
        used[piv] = True
        for i in range(n):
            if i != piv and not used[i] and m[i][piv] != 0:
                f = m[i][piv] / d
                for t in range(n):
                    m[i][t] -= f * m[piv][t]
                for t in range(n):
                    m[t][i] -= f * m[t][piv]
                for t in range(n):
                    basis[i][t] -= f * basis[piv][t]
    return pos_rows


def spinor_norm(L: GramLattice, g) -> int:
    """+1 iff g preserves the orientation of a maximal positive subspace."""
    g = mat(g)
    n = L.rank
    if mat_mul(mat_mul(transpose(g), L.gram), g) != L.gram:
        raise IsometryError("matrix does not preserve the form")
    pos = _positive_frame(L)
    s_plus = len(pos)
    if s_plus == 0:
        return 1
    # matrix of the projected action of g on the positive frame:
    # X = (B^T G B)^{-1} B^T G (g B)
    bt = tuple(tuple(x for x in row) for row in pos)           # rows = frame
    b_cols = transpose(bt)
    gb = mat_frac_mul(g, b_cols)
    btg = mat_frac_mul(bt, L.gram)
    gram_frame = mat_frac_mul(btg, b_cols)
    rhs = mat_frac_mul(btg, gb)
    x = mat_frac_mul(inverse_frac(gram_frame), rhs)
    d = frac_det(x)
    if d == 0:
        raise IsometryError("degenerate projected action")
    return 1 if d > 0 else -1


def mat_frac_mul(a, b):
    bt = list(zip(*b))
    return tuple(tuple(sum(Fraction(x) * Fraction(y) for x, y in zip(row, col))
                       for col in bt) for row in a)


def frac_det(a) -> Fraction:
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                f = m[r][col] * inv
                for t in range(col, n):
                    m[r][t] -= f * m[col][t]
    return det


def spinor_norm_involution(L: GramLattice, g) -> int:
    """Spinor norm of an involution from the coinvariant signature."""
    order = verify_isometry(L, g)
    if order not in (1, 2):
        raise IsometryError("formula applies to involutions")
    _, _, coinv, _ = invariant_coinvariant(L, g, 2 if order == 2 else 1)
    s_plus = signature(coinv).s_plus if coinv.rank else 0
    return (-1) ** s_plus


def effectiveness(L: GramLattice, g, p: int) -> bool:
    """Monodromy membership for a nonsymplectic prime-order action."""
    order = verify_isometry(L, g)
    inv, _, coinv, _ = invariant_coinvariant(L, g, order)
    sc = signature(coinv)
    si = signature(inv)
    if sc.s_plus != 2 or si.s_plus != 1:
        raise IsometryError("action is not nonsymplectic-shaped")
    if p != 2:
        return True
    return spinor_norm(L, g) == 1


def index_exponent(L: GramLattice, inv_rows, coinv_rows, p: int) -> int:
    """a with L/(invariant (+) coinvariant) isomorphic to (Z/p)^a."""
    rows = list(inv_rows) + list(coinv_rows)
    n = L.rank
    if len(rows) != n:
        raise IsometryError("bases do not span a finite-index sublattice")
    divisors = snf_divisors(mat(rows))
    a = 0
    for d in divisors:
        d = abs(d)
        if d == 1:
            continue
        if d != p:
            raise IsometryError("quotient is not elementary p-torsion")
        a += 1
    coinv_rank = len(coinv_rows)
    if a > coinv_rank // (p - 1):
        raise IsometryError("index exponent exceeds the coinvariant bound")
    return a


def analyze(L: GramLattice, g) -> IsometryRecord:
    """Full isometry record; asserts the involution spinor formula agrees."""
    g = mat(g)
    order = verify_isometry(L, g)
    inv, inv_rows, coinv, coinv_rows = invariant_coinvariant(L, g, order)
    disc = induced_action(L, g)
    disc_order = disc.order()
    spin = spinor_norm(L, g)
    if order == 2:
        if spin != spinor_norm_involution(L, g):
            raise IsometryError("spinor norm methods disagree on an involution")
    p = order if order > 1 else 2
    a = index_exponent(L, inv_rows, coinv_rows, p) if order > 1 else 0
    return IsometryRecord(
        lattice=L, matrix=g, order=order, disc_order=disc_order,
        invariant=inv, invariant_basis=inv_rows,
        coinvariant=coinv, coinvariant_basis=coinv_rows,
        spinor=spin, index_exponent=a)
