"""Primitive embeddings of even lattices and overlattice gluing.

A primitive embedding S -> L with complement T is encoded by an embedding
subgroup H of disc(L) and a q-preserving isometry gamma from H onto a
subgroup of disc(S); the complement's discriminant form is the graph
quotient inside disc(L) (+) disc(S)(-1), and |det T| = |det L||det S|/|H|^2.
Embeddings are counted up to the coarse equivalence that only remembers
(|H|, complement signature, complement form class) -- isometry classes of
pairs, not orbits under O(L).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .catalog import Representative, genus_equal, lattice_with_invariants
from .fqf import (
    FqfIsometry,
    TorsionQuadraticForm,
    anti_isometries_between,
    direct_sum_with_maps,
    discriminant_form,
    forms_isometric,
    isometries_between,
    negate,
    orthogonal_quotient_with_lifts,
    subgroup_form,
    subgroup_order,
    subgroups,
)
from .intmat import (
    hnf_row_basis,
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


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingRecord:
    sub: GramLattice
    ambient: GramLattice
    h_order: int
    h_gens: tuple[tuple[int, ...], ...]       # embedding subgroup in disc(L)
    gamma: FqfIsometry | None                 # onto its image in disc(S)
    complement_form: TorsionQuadraticForm
    complement_signature: SignaturePair
    representative: Representative | None

    @property
    def complement_det(self) -> int:
        sign = -1 if self.complement_signature.s_minus % 2 else 1
        return sign * self.complement_form.order

    def check_determinant_identity(self):
        lhs = abs(self.complement_det) * self.h_order ** 2
        rhs = abs(determinant(self.ambient)) * abs(determinant(self.sub))
        if lhs != rhs:
            raise EmbeddingError("determinant identity violated")


def primitive_embeddings(S: GramLattice, L: GramLattice) -> list[EmbeddingRecord]:
    """All primitive embeddings S -> L up to pair-isometry equivalence."""
    sig_t = signature(L) - signature(S)
    if sig_t.s_plus < 0 or sig_t.s_minus < 0:
        return []
    FL = discriminant_form(L)
    FS = discriminant_form(S)
    FSneg = negate(FS)
    sum_form, (inj_l, inj_s) = direct_sum_with_maps(FL, FSneg)

    records: list[EmbeddingRecord] = []
    seen_keys: list[tuple] = []

    max_order = min(FL.order, FS.order)
    subs_l = subgroups(FL, max_order=max_order)
    subs_s = subgroups(FS, max_order=max_order)
    subs_s_by_order: dict[int, list] = {}
    for gens in subs_s:
        subs_s_by_order.setdefault(subgroup_order(FS, gens), []).append(gens)

    for h_gens in subs_l:
        h_order = subgroup_order(FL, h_gens)
        h_form, h_canon = subgroup_form(FL, h_gens)
        for hp_gens in subs_s_by_order.get(h_order, []):
            hp_form, hp_canon = subgroup_form(FS, hp_gens)
            for gamma in isometries_between(h_form, hp_form):
                # graph of gamma inside disc(L) (+) disc(S)(-1)
                graph = []
                for i, g in enumerate(h_canon):
                    img = _combine(FS, gamma.images[i], hp_canon)
                    graph.append(_sum_elem(sum_form, inj_l(g), inj_s(img)))
                q_t, _ = orthogonal_quotient_with_lifts(sum_form, graph)
                rep = lattice_with_invariants(sig_t, q_t)
                if rep is None:
                    continue
                key = (h_order, sig_t)
                matched = False
                for rec in records:
                    if rec.h_order == h_order and \
                            forms_isometric(rec.complement_form, q_t):
                        matched = True
                        break
                if matched:
                    continue
                rec = EmbeddingRecord(
                    sub=S, ambient=L, h_order=h_order,
                    h_gens=tuple(tuple(g) for g in h_gens),
                    gamma=gamma, complement_form=q_t,
                    complement_signature=sig_t, representative=rep)
                rec.check_determinant_identity()
                records.append(rec)
    records.sort(key=lambda r: (r.h_order, abs(r.complement_det),
                                r.representative.expression))
    return records


def _combine(F: TorsionQuadraticForm, coords, gens):
    """Element of F given by integer coordinates w.r.t. a generator list."""
    out = [0] * F.ngens
    for c, g in zip(coords, gens):
        for t in range(F.ngens):
            out[t] += c * g[t]
    return F.reduce(out)


def _sum_elem(sum_form, e1, e2):
    return sum_form.reduce(tuple(a + b for a, b in zip(e1, e2)))


# complements inside a fixed Gram matrix ------------------------------------

def complement_in_fixed(L: GramLattice, basis_cols
                        ) -> tuple[GramLattice, bool]:
    """Orthogonal complement of the span of the given column vectors.

    Returns the complement with its induced Gram matrix and a flag telling
    whether the span was already primitive in L.
    """
    cols = mat(basis_cols)
    if not cols or not cols[0]:
        raise EmbeddingError("empty basis")
    n = L.rank
    vecs = transpose(cols)  # rows = the embedded basis vectors
    if len(hnf_row_basis(vecs, n)) != len(vecs):
        raise EmbeddingError("basis columns are dependent")
    pairing = mat_mul(vecs, L.gram)  # rows: v^T G
    comp_rows = kernel_basis(pairing)
    comp = sublattice_gram(L, comp_rows)
    divisors = snf_divisors(mat(vecs))
    primitive = all(d == 1 for d in divisors)
    return comp, primitive


def embeddings_of_square4(lam_g: GramLattice) -> list[Representative]:
    """Complements of the primitive embeddings of [4] into lam_g."""
    from .lattice import rank1
    recs = primitive_embeddings(rank1(4), lam_g)
    return [rec.representative for rec in recs]


def length_case_analysis(l_g: GramLattice) -> list[tuple[int, int, bool]]:
    """The three embedding-subgroup cases for a 2-elementary coinvariant
    inside the rank-8 lattice with (Z/2)^2 discriminant.

    Returns (|H|, predicted complement length, arithmetically feasible).
    """
    from .fqf import is_p_elementary, length
    F = discriminant_form(l_g)
    if not is_p_elementary(F, 2) and not F.is_trivial():
        raise EmbeddingError("length case analysis needs a 2-elementary lattice")
    ell = length(F)
    comp_rank = 8 - l_g.rank
    out = []
    for n in (0, 1, 2):
        predicted = ell + 2 - 2 * n
        feasible = 0 <= predicted <= comp_rank
        out.append((2 ** n, predicted, feasible))
    return out


# gluing ---------------------------------------------------------------------

@dataclass(frozen=True)
class Gluing:
    k_s_gens: tuple[tuple[int, ...], ...]
    k_t_gens: tuple[tuple[int, ...], ...]   # images, aligned with k_s_gens
    order: int
    has_order4: bool


def find_gluings(S: GramLattice, T: GramLattice, target: GramLattice,
                 *, forbid_order4: bool = False, first_only: bool = True
                 ) -> list[Gluing]:
    """Gluing subgroups K: anti-isometric identifications of subgroups of
    disc(S) and disc(T) whose graph quotient is the discriminant form of
    `target` (so S (+) T glues to a lattice in the genus of `target`)."""
    if signature(S) + signature(T) != signature(target):
        return []
    num = abs(determinant(S)) * abs(determinant(T))
    den = abs(determinant(target))
    if num % den != 0:
        return []
    k2 = num // den
    k = math.isqrt(k2)
    if k * k != k2:
        return []
    FS = discriminant_form(S)
    FT = discriminant_form(T)
    F_target = discriminant_form(target)
    sum_form, (inj_s, inj_t) = direct_sum_with_maps(FS, FT)
    out: list[Gluing] = []
    for ks_gens in subgroups(FS, max_order=k):
        if subgroup_order(FS, ks_gens) != k:
            continue
        ks_form, ks_canon = subgroup_form(FS, ks_gens)
        has4 = any(d % 4 == 0 for d in ks_form.divisors)
        if forbid_order4 and has4:
            continue
        for kt_gens in subgroups(FT, max_order=k):
            if subgroup_order(FT, kt_gens) != k:
                continue
            kt_form, kt_canon = subgroup_form(FT, kt_gens)
            for gamma in anti_isometries_between(ks_form, kt_form):
                graph = []
                for i, g in enumerate(ks_canon):
                    img = _combine(FT, gamma.images[i], kt_canon)
                    graph.append(_sum_elem(sum_form, inj_s(g), inj_t(img)))
                quotient, _ = orthogonal_quotient_with_lifts(sum_form, graph)
                if forms_isometric(quotient, F_target):
                    glue = Gluing(
                        k_s_gens=tuple(tuple(g) for g in ks_canon),
                        k_t_gens=tuple(tuple(_combine(FT, gamma.images[i], kt_canon))
                                       for i in range(len(ks_canon))),
                        order=k, has_order4=has4)
                    out.append(glue)
                    if first_only:
                        return out
    return out


def glue_overlattice(S: GramLattice, T: GramLattice, glue: Gluing
                     ) -> tuple[GramLattice, "tuple[tuple[Fraction, ...], ...]"]:
    """Integral overlattice of S (+) T generated by the glue vectors.

    Returns (lattice, basis rows) where basis rows are rational coordinates
    in the S (+) T basis.
    """
    FS = discriminant_form(S)
    FT = discriminant_form(T)
    ns, nt = S.rank, T.rank
    n = ns + nt
    vectors: list[list[Fraction]] = [
        [Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)
    ]
    for gs, gt in zip(glue.k_s_gens, glue.k_t_gens):
        lift_s = _disc_lift(FS, gs)
        lift_t = _disc_lift(FT, gt)
        vectors.append([*lift_s, *lift_t])
    denom = 1
    for row in vectors:
        for x in row:
            denom = math.lcm(denom, Fraction(x).denominator)
    int_rows = [[int(Fraction(x) * denom) for x in row] for row in vectors]
    basis_scaled = hnf_row_basis(int_rows, n)
    if len(basis_scaled) != n:
        raise EmbeddingError("glue vectors did not span a finite overlattice")
    basis = tuple(tuple(Fraction(x, denom) for x in row) for row in basis_scaled)
    big = direct_sum_gram(S, T)
    gram_frac = [[sum(basis[i][r] * big[r][t] * basis[j][t]
                      for r in range(n) for t in range(n))
                  for j in range(n)] for i in range(n)]
    gram = []
    for i, row in enumerate(gram_frac):
        out_row = []
        for j, x in enumerate(row):
            if Fraction(x).denominator != 1:
                raise EmbeddingError("glue produced a non-integral lattice")
            out_row.append(int(x))
        gram.append(out_row)
    for i in range(n):
        if gram[i][i] % 2:
            raise EmbeddingError("glue produced an odd lattice")
    return GramLattice(mat(gram)), basis


def direct_sum_gram(S: GramLattice, T: GramLattice):
    from .lattice import direct_sum
    return direct_sum(S, T).gram


def _disc_lift(F: TorsionQuadraticForm, elem):
    if F.lifts is None:
        raise EmbeddingError("form lacks lifts")
    e = F.reduce(elem)
    n = len(F.lifts[0]) if F.lifts else 0
    out = [Fraction(0)] * n
    for a, lift in zip(e, F.lifts):
        for t in range(n):
            out[t] += a * lift[t]
    return out
