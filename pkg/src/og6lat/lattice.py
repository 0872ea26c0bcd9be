"""Even integral lattices represented by Gram matrices.

A lattice here is always free of finite rank with a nondegenerate symmetric
integer bilinear form whose diagonal is even.  All arithmetic is exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .intmat import Matrix, det_bareiss, mat, mat_mul, transpose


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class SignaturePair:
    s_plus: int
    s_minus: int

    def __add__(self, other: "SignaturePair") -> "SignaturePair":
        return SignaturePair(self.s_plus + other.s_plus, self.s_minus + other.s_minus)

    def __sub__(self, other: "SignaturePair") -> "SignaturePair":
        return SignaturePair(self.s_plus - other.s_plus, self.s_minus - other.s_minus)

    @property
    def rank(self) -> int:
        return self.s_plus + self.s_minus

    def __str__(self) -> str:
        return f"({self.s_plus},{self.s_minus})"


@dataclass(frozen=True)
class GramLattice:
    gram: Matrix

    def __post_init__(self):
        g = mat(self.gram)
        object.__setattr__(self, "gram", g)
        n = len(g)
        if any(len(row) != n for row in g):
            raise LatticeError("gram matrix must be square")
        for i in range(n):
            if g[i][i] % 2 != 0:
                raise LatticeError("lattice is not even: odd diagonal entry %d" % g[i][i])
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise LatticeError("gram matrix must be symmetric")
        if n and det_bareiss(g) == 0:
            raise LatticeError("gram matrix is degenerate")

    @property
    def rank(self) -> int:
        return len(self.gram)

    def bilinear(self, v, w) -> int:
        return sum(self.gram[i][j] * v[i] * w[j]
                   for i in range(self.rank) for j in range(self.rank))

    def __str__(self) -> str:
        return format_gram(self)


# standard blocks -----------------------------------------------------------

def _ade_gram(letter: str, n: int) -> Matrix:
    if letter == "A":
        g = [[0] * n for _ in range(n)]
        for i in range(n):
            g[i][i] = 2
            if i + 1 < n:
                g[i][i + 1] = g[i + 1][i] = -1
        return mat(g)
    if letter == "D":
        if n < 4:
            raise LatticeError("D_n needs n >= 4")
        g = [[0] * n for _ in range(n)]
        for i in range(n):
            g[i][i] = 2
        for i in range(n - 2):
            g[i][i + 1] = g[i + 1][i] = -1
        g[n - 3][n - 1] = g[n - 1][n - 3] = -1
        return mat(g)
    if letter == "E" and n == 8:
        g = [[0] * 8 for _ in range(8)]
        for i in range(8):
            g[i][i] = 2
        chain = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)]
        for i, j in chain:
            g[i][j] = g[j][i] = -1
        g[1][3] = g[3][1] = -1
        return mat(g)
    raise LatticeError(f"unknown ADE block {letter}{n}")


_FIXED_BLOCKS: dict[str, Matrix] = {
    "U": ((0, 1), (1, 0)),
    "H5": ((2, 1), (1, -2)),
    "K7": ((-4, 1), (1, -2)),
}


def make_standard(name: str, scale: int = 1) -> GramLattice:
    """Gram matrix of a named block, rescaled entrywise by `scale` (L(n))."""
    if scale == 0:
        raise LatticeError("scale must be nonzero")
    if name == "rank1":
        if scale % 2 != 0:
            raise LatticeError("rank-1 block [n] needs even n")
        return GramLattice(((scale,),))
    if name in _FIXED_BLOCKS:
        base = _FIXED_BLOCKS[name]
    else:
        m = re.fullmatch(r"([ADE])(\d+)", name)
        if not m:
            raise LatticeError(f"unknown standard lattice {name!r}")
        base = _ade_gram(m.group(1), int(m.group(2)))
    return GramLattice(tuple(tuple(scale * x for x in row) for row in base))


def rank1(n: int) -> GramLattice:
    return make_standard("rank1", n)


def rescale(L: GramLattice, n: int) -> GramLattice:
    if n == 0:
        raise LatticeError("scale must be nonzero")
    return GramLattice(tuple(tuple(n * x for x in row) for row in L.gram))


def direct_sum(*parts: GramLattice) -> GramLattice:
    n = sum(p.rank for p in parts)
    g = [[0] * n for _ in range(n)]
    off = 0
    for p in parts:
        for i in range(p.rank):
            for j in range(p.rank):
                g[off + i][off + j] = p.gram[i][j]
        off += p.rank
    return GramLattice(mat(g))


# invariants ----------------------------------------------------------------

def determinant(L: GramLattice) -> int:
    return det_bareiss(L.gram)


def signature(L: GramLattice) -> SignaturePair:
    """Exact inertia by symmetric rational reduction (congruence transforms)."""
    n = L.rank
    m = [[Fraction(x) for x in row] for row in L.gram]
    plus = minus = 0
    used = [False] * n
    for _ in range(n):
        piv = next((i for i in range(n) if not used[i] and m[i][i] != 0), None)
        if piv is None:
            # all remaining diagonal entries vanish; split a hyperbolic pair
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
            # e_i <- e_i + e_j makes m[i][i] = 2 m[i][j] != 0
            for t in range(n):
                m[i][t] += m[j][t]
            for t in range(n):
                m[t][i] += m[t][j]
            piv = i
        d = m[piv][piv]
        if d > 0:
            plus += 1
        else:
            minus += 1
        used[piv] = True
        for i in range(n):
            if i != piv and not used[i] and m[i][piv] != 0:
                f = m[i][piv] / d
                for t in range(n):
                    m[i][t] -= f * m[piv][t]
                for t in range(n):
                    m[t][i] -= f * m[t][piv]
    return SignaturePair(plus, minus)


def divisibility(L: GramLattice, v) -> int:
    """div(v): positive generator of the pairing ideal (v, L)."""
    if not any(v):
        raise LatticeError("divisibility of the zero vector is undefined")
    from math import gcd
    g = 0
    for row in L.gram:
        g = gcd(g, sum(a * b for a, b in zip(row, v)))
    return g


def sublattice_gram(L: GramLattice, basis_rows) -> GramLattice:
    """Gram matrix of the sublattice spanned by the given row vectors."""
    b = mat(basis_rows)
    return GramLattice(mat_mul(mat_mul(b, L.gram), transpose(b)))


# expression grammar --------------------------------------------------------
#
#   expr   := term ('+' term)*
#   term   := NAME | NAME '(' INT ')' | '[' INT ']' | matrix
#   NAME   := U | A<n> | D<n> | E8 | H5 | K7
#   matrix := [[a,b,...],[...],...]   (explicit integer Gram matrix)

_TOKEN = re.compile(r"\s*([A-Z]\d*|\[\[|-?\d+|[\[\]()+,])")


def parse_lattice(text: str) -> GramLattice:
    text = text.strip()
    if text.startswith("[["):
        try:
            rows = eval(text, {"__builtins__": {}})  # integer list literal only
        except Exception as exc:
            raise LatticeError(f"bad matrix literal: {exc}") from exc
        return GramLattice(mat(rows))
    pos = 0
    parts: list[GramLattice] = []

    def error(msg):
        raise LatticeError(f"{msg} at position {pos} in {text!r}")

    def next_token():
        nonlocal pos
        if pos >= len(text):
            return None
        m = _TOKEN.match(text, pos)
        if not m:
            error(f"unexpected character {text[pos]!r}")
        pos = m.end()
        return m.group(1)

    expect_term = True
    while True:
        tok = next_token()
        if tok is None:
            if expect_term:
                error("expected a lattice block")
            break
        if not expect_term:
            if tok != "+":
                error(f"expected '+' before {tok!r}")
            expect_term = True
            continue
        if tok == "[":
            num = next_token()
            if num is None or not re.fullmatch(r"-?\d+", num):
                error("expected integer inside [ ]")
            close = next_token()
            if close != "]":
                error("expected closing ']'")
            parts.append(rank1(int(num)))
        elif re.fullmatch(r"[A-Z]\d*", tok):
            name = tok
            save = pos
            nxt = next_token()
            scale = 1
            if nxt == "(":
                num = next_token()
                if num is None or not re.fullmatch(r"-?\d+", num):
                    error("expected integer scale")
                close = next_token()
                if close != ")":
                    error("expected closing ')'")
                scale = int(num)
            else:
                pos = save
            parts.append(make_standard(name, scale))
        else:
            error(f"unexpected token {tok!r}")
        expect_term = False
    return direct_sum(*parts)


def _block_sort_key(block: tuple[str, GramLattice]):
    name, L = block
    d = determinant(L)
    return (-L.rank, abs(d), 0 if d > 0 else 1, L.gram)


def format_blocks(blocks: list[str]) -> str:
    """Canonical display for a list of block expressions (sorted)."""
    parsed = [(b, parse_lattice(b)) for b in blocks]
    parsed.sort(key=_block_sort_key)
    return "+".join(b for b, _ in parsed) if parsed else "0"


def format_gram(L: GramLattice) -> str:
    return "[" + ",".join("[" + ",".join(str(x) for x in row) + "]" for row in L.gram) + "]"
