"""Finite quadratic forms: discriminant groups of even lattices.

A torsion quadratic form is a finite abelian group A = (+) Z/d_i with a
quadratic form q: A -> Q/2Z and its polar bilinear form b: A x A -> Q/Z,
satisfying q(x+y) - q(x) - q(y) = 2 b(x,y).  Elements are coordinate tuples
relative to the stored generators.  Groups in this package stay tiny (order
<= a few hundred), so exhaustive element enumeration and backtracking
isomorphism searches are the intended tools; a guard protects against misuse.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .intmat import (
    hnf_row_basis,
    identity,
    inverse_frac,
    mat,
    mat_mul,
    smith_normal_form,
    solve_int,
    transpose,
)
from .lattice import GramLattice, LatticeError

ORDER_GUARD = 1 << 16


class FqfError(ValueError):
    pass


def _mod2(x: Fraction) -> Fraction:
    return Fraction(x) % 2


def _mod1(x: Fraction) -> Fraction:
    return Fraction(x) % 1


@dataclass(frozen=True)
class TorsionQuadraticForm:
    divisors: tuple[int, ...]                       # d_1 | d_2 | ... , each > 1
    q_gens: tuple[Fraction, ...]                    # q of each generator, in Q/2Z
    b_mat: tuple[tuple[Fraction, ...], ...]        # pairwise b values, in Q/Z
    lifts: tuple[tuple[Fraction, ...], ...] | None = None  # dual-vector lifts

    def __post_init__(self):
        k = len(self.divisors)
        object.__setattr__(self, "divisors", tuple(int(d) for d in self.divisors))
        object.__setattr__(self, "q_gens", tuple(_mod2(x) for x in self.q_gens))
        object.__setattr__(
            self, "b_mat",
            tuple(tuple(_mod1(x) for x in row) for row in self.b_mat))
        if any(d <= 1 for d in self.divisors):
            raise FqfError("divisors must exceed 1")
        for i in range(k - 1):
            if self.divisors[i + 1] % self.divisors[i] != 0:
                raise FqfError("divisors must form a chain d_1 | d_2 | ...")
        if len(self.q_gens) != k or len(self.b_mat) != k:
            raise FqfError("generator data sizes disagree")
        for i in range(k):
            if _mod1(self.q_gens[i]) != self.b_mat[i][i]:
                raise FqfError("b(g,g) must equal q(g) mod 1")
            if _mod2(self.divisors[i] ** 2 * self.q_gens[i]) != 0:
                raise FqfError("q value incompatible with generator order")
            for j in range(k):
                if self.b_mat[i][j] != self.b_mat[j][i]:
                    raise FqfError("b must be symmetric")
                if _mod1(self.divisors[i] * self.b_mat[i][j]) != 0:
                    raise FqfError("b value incompatible with generator order")

    @property
    def order(self) -> int:
        return math.prod(self.divisors) if self.divisors else 1

    @property
    def ngens(self) -> int:
        return len(self.divisors)

    def reduce(self, elem) -> tuple[int, ...]:
        return tuple(a % d for a, d in zip(elem, self.divisors))

    def elements(self):
        if self.order > ORDER_GUARD:
            raise FqfError("group too large to enumerate")
        return itertools.product(*(range(d) for d in self.divisors))

    def q(self, elem) -> Fraction:
        e = self.reduce(elem)
        total = Fraction(0)
        for i, a in enumerate(e):
            total += a * a * self.q_gens[i]
            for j in range(i + 1, self.ngens):
                total += 2 * a * e[j] * self.b_mat[i][j]
        return _mod2(total)

    def b(self, x, y) -> Fraction:
        x = self.reduce(x)
        y = self.reduce(y)
        total = Fraction(0)
        for i, a in enumerate(x):
            if a:
                for j, c in enumerate(y):
                    if c:
                        total += a * c * self.b_mat[i][j]
        return _mod1(total)

    def element_order(self, elem) -> int:
        e = self.reduce(elem)
        o = 1
        for a, d in zip(e, self.divisors):
            if a:
                o = math.lcm(o, d // math.gcd(a, d))
        return o

    def is_trivial(self) -> bool:
        return not self.divisors


TRIVIAL_FORM = TorsionQuadraticForm((), (), ())


def discriminant_form(L: GramLattice) -> TorsionQuadraticForm:
    """L#/L with its Q/2Z quadratic form, via SNF of the Gram matrix."""
    n = L.rank
    if n == 0:
        return TRIVIAL_FORM
    d, u, _v = smith_normal_form(L.gram)
    ginv = inverse_frac(L.gram)
    uinv = inverse_frac(u)
    gens = []
    divisors = []
    for i in range(n):
        di = d[i][i]
        if di in (0, 1):
            continue
        # class of the i-th SNF generator of Z^n / gram Z^n, lifted to L*
        col = tuple(uinv[r][i] for r in range(n))
        lift = tuple(
            sum(ginv[r][t] * col[t] for t in range(n)) for r in range(n)
        )
        divisors.append(di)
        gens.append(lift)
    q_gens = []
    b_rows = []
    for i, gi in enumerate(gens):
        qv = _mod2(sum(gi[r] * L.gram[r][t] * gi[t] for r in range(n) for t in range(n)))
        q_gens.append(qv)
        row = []
        for gj in gens:
            row.append(_mod1(sum(gi[r] * L.gram[r][t] * gj[t]
                                 for r in range(n) for t in range(n))))
        b_rows.append(tuple(row))
    return TorsionQuadraticForm(tuple(divisors), tuple(q_gens), tuple(b_rows),
                                lifts=tuple(gens))


def length(F: TorsionQuadraticForm) -> int:
    return F.ngens


def is_p_elementary(F: TorsionQuadraticForm, p: int) -> bool:
    return all(d == p for d in F.divisors)


def delta_invariant(F: TorsionQuadraticForm) -> int:
    """0 iff the 2-elementary form q takes only integer values mod 2Z."""
    if not is_p_elementary(F, 2) and not F.is_trivial():
        raise FqfError("delta invariant needs a 2-elementary form")
    for e in F.elements():
        if F.q(e).denominator != 1:
            return 1
    return 0


def direct_sum_forms(*forms: TorsionQuadraticForm) -> TorsionQuadraticForm:
    return direct_sum_with_maps(*forms)[0]


def direct_sum_with_maps(*forms: TorsionQuadraticForm):
    """Orthogonal sum plus injections of each summand into the result.

    Returns (sum_form, [inject_0, inject_1, ...]) where inject_i maps an
    element of forms[i] to its class in the sum.
    """
    divisors: list[int] = []
    q_gens: list[Fraction] = []
    b_rows: list[list[Fraction]] = []
    total = sum(f.ngens for f in forms)
    off = 0
    offsets = []
    for f in forms:
        offsets.append(off)
        divisors.extend(f.divisors)
        q_gens.extend(f.q_gens)
        for i in range(f.ngens):
            row = [Fraction(0)] * total
            for j in range(f.ngens):
                row[off + j] = f.b_mat[i][j]
            b_rows.append(row)
        off += f.ngens
    raw = _RawForm(tuple(divisors), tuple(q_gens),
                   tuple(tuple(r) for r in b_rows))
    out, to_canonical = raw.canonical_with_map()

    def make_inject(idx):
        f = forms[idx]
        start = offsets[idx]

        def inject(elem):
            e = f.reduce(elem)
            raw_coords = [0] * total
            for t, a in enumerate(e):
                raw_coords[start + t] = a
            return to_canonical(raw_coords)

        return inject

    return out, [make_inject(i) for i in range(len(forms))]


def negate(F: TorsionQuadraticForm) -> TorsionQuadraticForm:
    return TorsionQuadraticForm(
        F.divisors,
        tuple(_mod2(-x) for x in F.q_gens),
        tuple(tuple(_mod1(-x) for x in row) for row in F.b_mat),
    )


@dataclass(frozen=True)
class _RawForm:
    """Form data on generators that need not satisfy the divisor-chain rule."""

    divisors: tuple[int, ...]
    q_gens: tuple[Fraction, ...]
    b_mat: tuple[tuple[Fraction, ...], ...]

    def q_of(self, elem) -> Fraction:
        total = Fraction(0)
        for i, a in enumerate(elem):
            total += a * a * self.q_gens[i]
            for j in range(i + 1, len(elem)):
                total += 2 * a * elem[j] * self.b_mat[i][j]
        return _mod2(total)

    def b_of(self, x, y) -> Fraction:
        total = Fraction(0)
        for i, a in enumerate(x):
            if a:
                for j, c in enumerate(y):
                    if c:
                        total += a * c * self.b_mat[i][j]
        return _mod1(total)

    def canonical(self) -> TorsionQuadraticForm:
        return self.canonical_with_map()[0]

    def canonical_with_map(self):
        """Re-express on SNF-canonical generators (divisor chain, no units).

        Returns (form, to_canonical) where to_canonical maps raw coordinate
        vectors to coordinates w.r.t. the canonical generators.
        """
        k = len(self.divisors)
        if k == 0:
            return TRIVIAL_FORM, (lambda coords: ())
        rel = [[self.divisors[i] if i == j else 0 for j in range(k)] for i in range(k)]
        d, u, _ = smith_normal_form(mat(rel))
        uinv = inverse_frac(u)
        gens = []
        divisors = []
        kept = []
        for i in range(k):
            di = d[i][i]
            if di <= 1:
                continue
            gens.append(tuple(int(uinv[r][i]) for r in range(k)))
            divisors.append(di)
            kept.append(i)
        q_gens = tuple(self.q_of(g) for g in gens)
        b_rows = tuple(tuple(self.b_of(g, h) for h in gens) for g in gens)
        form = TorsionQuadraticForm(tuple(divisors), q_gens, b_rows)

        def to_canonical(coords):
            moved = [sum(u[i][r] * coords[r] for r in range(k)) for i in range(k)]
            return form.reduce(tuple(moved[i] for i in kept))

        return form, to_canonical


def subgroup_form(F: TorsionQuadraticForm, gens) -> tuple[TorsionQuadraticForm, list[tuple[int, ...]]]:
    """Restriction of F to the subgroup generated by `gens`.

    Returns (form, generators-in-F-coordinates) where the returned generators
    realize the canonical divisors of the restricted form.
    """
    k = F.ngens
    rows = [list(F.reduce(g)) for g in gens] + \
           [[F.divisors[i] if i == j else 0 for j in range(k)] for i in range(k)]
    basis = hnf_row_basis(rows, k)
    # subgroup lattice P with diag(divisors) <= P <= Z^k; quotient P / diag(d)
    rel_rows = [[F.divisors[i] if i == j else 0 for j in range(k)] for i in range(k)]
    return _group_quotient(F, basis, mat(rel_rows))


def _group_quotient(F: TorsionQuadraticForm, p_basis, gamma_basis
                    ) -> tuple[TorsionQuadraticForm, list[tuple[int, ...]]]:
    """Quotient P/Gamma of integer row-span lattices diag(d) <= Gamma <= P <= Z^k.

    Returns the induced form (q, b read off through F) and lifts of the
    canonical generators as elements of F.
    """
    p = mat(p_basis)
    if not p:
        return TRIVIAL_FORM, []
    m = len(p)
    pt = transpose(p)
    cols = []
    for r in gamma_basis:
        x = solve_int(pt, r)
        if x is None:
            raise FqfError("gamma is not contained in the subgroup")
        cols.append(x[:m])
    # gamma generators as columns in P-coordinates; quotient of Z^m by their span
    d, u, _ = smith_normal_form(transpose(mat(cols)))
    uinv = inverse_frac(u)
    gens = []
    divisors = []
    for i in range(m):
        di = d[i][i] if i < len(d) and i < len(d[0]) else 0
        if di == 1:
            continue
        if di == 0:
            raise FqfError("quotient is infinite; bad subgroup data")
        vec = tuple(int(sum(uinv[r][i] * p[r][t] for r in range(m)))
                    for t in range(len(p[0])))
        divisors.append(di)
        gens.append(F.reduce(vec))
    raw = _RawForm(tuple(divisors),
                   tuple(F.q(g) for g in gens),
                   tuple(tuple(F.b(g, h) for h in gens) for g in gens))
    out = raw.canonical()
    if out.divisors != tuple(divisors):
        raise FqfError("SNF divisors were not canonical")  # cannot happen
    return out, gens


def orthogonal_quotient(F: TorsionQuadraticForm, gamma_gens
                        ) -> TorsionQuadraticForm:
    """Gamma-perp / Gamma for an isotropic subgroup Gamma of F."""
    out, _ = orthogonal_quotient_with_lifts(F, gamma_gens)
    return out


def orthogonal_quotient_with_lifts(F: TorsionQuadraticForm, gamma_gens):
    k = F.ngens
    gamma = [F.reduce(g) for g in gamma_gens]
    for g in gamma:
        if F.q(g) != 0:
            raise FqfError("gamma is not isotropic")
    if k == 0:
        return TRIVIAL_FORM, []
    if F.order > ORDER_GUARD:
        raise FqfError("group too large")
    # Gamma-perp as an integer lattice between diag(d) and Z^k:
    # x in perp iff b(x, g) = 0 mod 1 for every generator g of Gamma, i.e.
    # sum_i x_i c_{g,i} + m_g s_g = 0 over Z with one slack variable per g.
    from .intmat import kernel_basis
    ngam = len(gamma)
    if ngam == 0:
        p_basis = identity(k)
    else:
        congr = []
        for t, g in enumerate(gamma):
            betas = [F.b(_unit(k, i), g) for i in range(k)]
            m = math.lcm(*[bta.denominator for bta in betas], 1)
            congr.append([int(bta * m) for bta in betas] +
                         [m if s == t else 0 for s in range(ngam)])
        kb = kernel_basis(mat(congr))
        sol_rows = [list(r[:k]) for r in kb]
        sol_rows += [[F.divisors[i] if i == j else 0 for j in range(k)]
                     for i in range(k)]
        p_basis = hnf_row_basis(sol_rows, k)
    gamma_rows = [list(g) for g in gamma] + \
                 [[F.divisors[i] if i == j else 0 for j in range(k)] for i in range(k)]
    g_basis = hnf_row_basis(gamma_rows, k)
    return _group_quotient(F, p_basis, g_basis)


def _unit(k, i):
    return tuple(1 if j == i else 0 for j in range(k))


# isometries ---------------------------------------------------------------

@dataclass(frozen=True)
class FqfIsometry:
    """Group isomorphism between torsion forms, as generator images."""

    source: TorsionQuadraticForm
    target: TorsionQuadraticForm
    images: tuple[tuple[int, ...], ...]   # image of each source generator

    def apply(self, elem):
        e = self.source.reduce(elem)
        k = self.target.ngens
        out = [0] * k
        for a, img in zip(e, self.images):
            for t in range(k):
                out[t] += a * img[t]
        return self.target.reduce(out)

    def order(self, guard: int = 64) -> int:
        if self.source != self.target:
            raise FqfError("order needs an automorphism")
        gens = [self.source.reduce(_unit(self.source.ngens, i))
                for i in range(self.source.ngens)]
        cur = list(gens)
        for n in range(1, guard + 1):
            cur = [self.apply(c) for c in cur]
            if cur == gens:
                return n
        raise FqfError("order guard exceeded")


def _value_profile(F: TorsionQuadraticForm):
    prof: dict[tuple[int, Fraction], int] = {}
    for e in F.elements():
        key = (F.element_order(e), F.q(e))
        prof[key] = prof.get(key, 0) + 1
    return tuple(sorted(prof.items()))


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def odd_elementary_class(F: TorsionQuadraticForm):
    """Complete invariant (p, a, det class) for p-elementary forms, p odd.

    Quadratic forms on (Z/p)^a with p odd are classified by the dimension and
    the square class of the Gram determinant of the bilinear form over F_p.
    Returns None when the form is not odd-p-elementary.
    """
    if F.is_trivial():
        return None
    p = F.divisors[0]
    if p == 2 or p % 2 == 0 or any(d != p for d in F.divisors):
        return None
    a = F.ngens
    m = [[int(F.b_mat[i][j] * p) % p for j in range(a)] for i in range(a)]
    # determinant over F_p by Gaussian elimination
    det = 1
    for col in range(a):
        piv = next((r for r in range(col, a) if m[r][col] % p != 0), None)
        if piv is None:
            raise FqfError("degenerate p-elementary form")
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det = det * m[col][col] % p
        inv = pow(m[col][col], p - 2, p)
        for r in range(col + 1, a):
            if m[r][col] % p:
                f = m[r][col] * inv % p
                for t in range(col, a):
                    m[r][t] = (m[r][t] - f * m[col][t]) % p
    return (p, a, _legendre(det, p))


def gauss_signature(F: TorsionQuadraticForm) -> int:
    """Signature of the form mod 8 (Milgram), via the exact Gauss sum."""
    total = 0j
    for e in F.elements():
        total += cmath.exp(1j * cmath.pi * float(F.q(e)))
    mag = abs(total)
    expect = math.sqrt(F.order)
    if abs(mag - expect) > 1e-6 * max(1.0, expect):
        raise FqfError("degenerate form: Gauss sum magnitude mismatch")
    ang = cmath.phase(total) / (cmath.pi / 4)
    sig = round(ang) % 8
    if abs(ang - round(ang)) > 1e-6:
        raise FqfError("Gauss sum angle not a multiple of pi/4")
    return sig


def isometries_between(F1: TorsionQuadraticForm, F2: TorsionQuadraticForm,
                       *, first_only: bool = False):
    """All q-preserving group isomorphisms F1 -> F2 (brute force, pruned)."""
    results: list[FqfIsometry] = []
    if F1.order != F2.order:
        return results
    if F1.order > ORDER_GUARD:
        raise FqfError("group order exceeds enumeration guard")
    if sorted(F1.divisors) != sorted(F2.divisors):
        return results
    if F1.is_trivial():
        return [FqfIsometry(F1, F2, ())]
    if _value_profile(F1) != _value_profile(F2):
        return results

    elems2 = list(F2.elements())
    by_profile: dict[tuple[int, Fraction], list] = {}
    for e in elems2:
        by_profile.setdefault((F2.element_order(e), F2.q(e)), []).append(e)

    k = F1.ngens
    gens1 = [_unit(k, i) for i in range(k)]

    def generated_order(images):
        rows = [list(img) for img in images] + \
               [[F2.divisors[i] if i == j else 0 for j in range(F2.ngens)]
                for i in range(F2.ngens)]
        basis = hnf_row_basis(rows, F2.ngens)
        sub = 1
        for i, row in enumerate(basis):
            lead = next(j for j in range(F2.ngens) if row[j] != 0)
            sub *= row[lead]
        return F2.order // sub if sub else 0

    def backtrack(i, images):
        if i == k:
            if generated_order(images) == F1.order:
                iso = FqfIsometry(F1, F2, tuple(images))
                results.append(iso)
                return first_only
            return False
        d = F1.divisors[i]
        qv = F1.q_gens[i]
        # image must be killed by d and carry the same q value
        for key, cands in by_profile.items():
            order, val = key
            if d % order != 0 or val != qv:
                continue
            for cand in cands:
                ok = True
                for j in range(i):
                    if F2.b(images[j], cand) != F1.b_mat[j][i]:
                        ok = False
                        break
                if not ok:
                    continue
                images.append(cand)
                if backtrack(i + 1, images):
                    return True
                images.pop()
        return False

    backtrack(0, [])
    return results


def forms_isometric(F1: TorsionQuadraticForm, F2: TorsionQuadraticForm) -> bool:
    c1 = odd_elementary_class(F1)
    if c1 is not None:
        return c1 == odd_elementary_class(F2)
    if odd_elementary_class(F2) is not None:
        return False
    return bool(isometries_between(F1, F2, first_only=True))


def anti_isometries_between(F1, F2, *, first_only: bool = False):
    """Isomorphisms gamma with q2(gamma x) = -q1(x) (gluing maps)."""
    return [FqfIsometry(F1, F2, iso.images)
            for iso in isometries_between(F1, negate(F2), first_only=first_only)]


def subgroups(F: TorsionQuadraticForm, max_order: int | None = None):
    """All subgroups (of order <= max_order if given), as generator lists."""
    if F.order > ORDER_GUARD:
        raise FqfError("group order exceeds enumeration guard")
    if F.is_trivial():
        return [[]]
    elems = [F.reduce(e) for e in F.elements()]
    zero = F.reduce((0,) * F.ngens)
    seen: dict[frozenset, list] = {frozenset([zero]): []}
    frontier = [frozenset([zero])]
    while frontier:
        new_frontier = []
        for sub in frontier:
            for e in elems:
                if e in sub:
                    continue
                closure = set(sub)
                queue = [e]
                while queue:
                    x = queue.pop()
                    if x in closure:
                        continue
                    closure.add(x)
                    for y in list(closure):
                        s = F.reduce(tuple(a + b for a, b in zip(x, y)))
                        if s not in closure:
                            queue.append(s)
                if max_order is not None and len(closure) > max_order:
                    continue
                key = frozenset(closure)
                if key not in seen:
                    seen[key] = seen[frozenset(sub)] + [e]
                    new_frontier.append(key)
        frontier = new_frontier
    out = list(seen.values())
    out.sort(key=lambda gens: (subgroup_order(F, gens), sorted(gens)))
    return out


def subgroup_elements(F, gens):
    zero = F.reduce((0,) * F.ngens)
    closure = {zero}
    queue = [F.reduce(g) for g in gens]
    while queue:
        x = queue.pop()
        if x in closure:
            continue
        closure.add(x)
        for y in list(closure):
            queue.append(F.reduce(tuple(a + b for a, b in zip(x, y))))
    return closure


def subgroup_order(F, gens) -> int:
    return len(subgroup_elements(F, gens))


def induced_action(L: GramLattice, g) -> FqfIsometry:
    """Action of an isometry g of L on the discriminant form."""
    g = mat(g)
    n = L.rank
    if mat_mul(mat_mul(transpose(g), L.gram), g) != L.gram:
        raise LatticeError("matrix is not an isometry of the lattice")
    F = discriminant_form(L)
    if F.lifts is None:
        raise FqfError("form lacks lifts")
    images = []
    ginv_gram = inverse_frac(L.gram)
    for lift in F.lifts:
        moved = tuple(sum(g[r][t] * lift[t] for t in range(n)) for r in range(n))
        # express `moved` in terms of the generator lifts modulo L
        images.append(_express_in_disc(F, L, moved))
    return FqfIsometry(F, F, tuple(images))


def _express_in_disc(F: TorsionQuadraticForm, L: GramLattice, vec):
    """Coordinates of a dual vector's class w.r.t. the stored generators."""
    n = L.rank
    denom = 1
    for x in vec:
        denom = math.lcm(denom, Fraction(x).denominator)
    for lift in F.lifts:
        for x in lift:
            denom = math.lcm(denom, Fraction(x).denominator)
    # solve  vec = sum a_i lift_i + integral  over Z
    cols = [[int(Fraction(lift[r]) * denom) for lift in F.lifts] +
            [denom if r == t else 0 for t in range(n)] for r in range(n)]
    target = [int(Fraction(x) * denom) for x in vec]
    sol = solve_int(mat(cols), tuple(target))
    if sol is None:
        raise FqfError("vector is not in the dual lattice")
    return F.reduce(sol[: F.ngens])


def form_invariant_key(F: TorsionQuadraticForm):
    """Hashable invariant separating forms cheaply (not complete, but close)."""
    cls = odd_elementary_class(F)
    if cls is not None:
        return (F.divisors, cls)
    return (F.divisors, _value_profile(F), gauss_signature(F))
