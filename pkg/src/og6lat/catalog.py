"""Constructive genus catalog for the lattices this classification needs.

Instead of transcribing abstract existence and uniqueness theorems, every
lattice that can occur here (rank <= 10, tiny discriminant) is found as a
direct sum of standard blocks; two lattices are in the same genus iff they
have equal signature and isometric discriminant forms, decided by brute
force.  Nonexistence is certified by cheap necessary conditions (length
bound, 2-adic rank parity, Gauss-sum signature) before ever concluding that
a block search came up empty; a search miss without a certificate raises,
so a silent catalog gap cannot corrupt a classification run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .fqf import (
    TorsionQuadraticForm,
    delta_invariant,
    discriminant_form,
    forms_isometric,
    form_invariant_key,
    gauss_signature,
    is_p_elementary,
    length,
    negate,
)
from .lattice import (
    GramLattice,
    SignaturePair,
    determinant,
    direct_sum,
    format_blocks,
    make_standard,
    parse_lattice,
    rank1,
    signature,
)


class CatalogError(ValueError):
    pass


class CatalogMiss(CatalogError):
    """A lattice passed every nonexistence certificate but no block sum hit."""


@dataclass(frozen=True)
class GenusTag:
    signature: SignaturePair
    p: int
    a: int
    delta: int | None = None

    def __post_init__(self):
        if (self.delta is not None) != (self.p == 2):
            raise CatalogError("delta is recorded exactly for p = 2")

    def as_dict(self):
        d = {"signature": [self.signature.s_plus, self.signature.s_minus],
             "p": self.p, "a": self.a}
        if self.delta is not None:
            d["delta"] = self.delta
        return d


def genus_tag(L: GramLattice, p: int) -> GenusTag:
    F = discriminant_form(L)
    if not is_p_elementary(F, p):
        raise CatalogError("lattice is not p-elementary")
    return GenusTag(signature(L), p, length(F),
                    delta_invariant(F) if p == 2 else None)


@lru_cache(maxsize=4096)
def disc_of(L: GramLattice) -> TorsionQuadraticForm:
    return discriminant_form(L)


@lru_cache(maxsize=4096)
def _form_key_of(L: GramLattice):
    return form_invariant_key(disc_of(L))


def genus_equal(L1: GramLattice, L2: GramLattice) -> bool:
    if signature(L1) != signature(L2):
        return False
    if _form_key_of(L1) != _form_key_of(L2):
        return False
    return forms_isometric(disc_of(L1), disc_of(L2))


# block inventory ------------------------------------------------------------

_BLOCK_EXPRS = [
    "U", "U(2)", "U(3)", "U(5)", "U(7)",
    "[2]", "[-2]", "[4]", "[-4]", "[6]", "[-6]", "[10]", "[-10]", "[14]", "[-14]",
    "A2", "A2(-1)", "A3", "A3(-1)", "D4", "D4(-1)",
    "H5", "H5(-1)", "K7", "K7(-1)", "E8", "E8(-1)",
]


@dataclass(frozen=True)
class _Block:
    expr: str
    lattice: GramLattice
    sig: SignaturePair
    det: int


@lru_cache(maxsize=1)
def _blocks() -> tuple[_Block, ...]:
    out = []
    for expr in _BLOCK_EXPRS:
        L = parse_lattice(expr)
        out.append(_Block(expr, L, signature(L), determinant(L)))
    return tuple(out)


def _iter_block_sums(target_sig: SignaturePair, target_det_abs: int):
    """All block multisets with the exact signature and |det|."""
    blocks = _blocks()
    choice: list[_Block] = []

    def rec(idx, sp, sm, det_abs):
        if sp == 0 and sm == 0:
            if det_abs == 1:
                yield tuple(choice)
            return
        if idx == len(blocks):
            return
        b = blocks[idx]
        if b.sig.s_plus <= sp and b.sig.s_minus <= sm and det_abs % abs(b.det) == 0:
            choice.append(b)
            yield from rec(idx, sp - b.sig.s_plus, sm - b.sig.s_minus,
                           det_abs // abs(b.det))
            choice.pop()
        yield from rec(idx + 1, sp, sm, det_abs)

    yield from rec(0, target_sig.s_plus, target_sig.s_minus, target_det_abs)


def _sum_of(blocks_chosen) -> tuple[GramLattice, str]:
    L = direct_sum(*(b.lattice for b in blocks_chosen))
    expr = format_blocks([b.expr for b in blocks_chosen])
    return L, expr


# nonexistence certificates ---------------------------------------------------

def existence_certificates(sig: SignaturePair, F: TorsionQuadraticForm) -> list[str]:
    """Named necessary conditions that fail for (sig, F); empty means unknown."""
    failed = []
    rank = sig.rank
    if sig.s_plus < 0 or sig.s_minus < 0:
        failed.append("negative-signature")
        return failed
    if length(F) > rank:
        failed.append("length-exceeds-rank")
    l2 = sum(1 for d in F.divisors if d % 2 == 0)
    if (rank - l2) % 2 != 0:
        failed.append("2-adic-rank-parity")
    if not failed:
        if gauss_signature(F) != (sig.s_plus - sig.s_minus) % 8:
            failed.append("gauss-signature")
    return failed


# representative search --------------------------------------------------------

@dataclass(frozen=True)
class Representative:
    lattice: GramLattice
    expression: str


_REP_CACHE: dict = {}


def lattice_with_invariants(sig: SignaturePair, F: TorsionQuadraticForm
                            ) -> Representative | None:
    """A block-sum lattice with the given signature and discriminant form.

    Returns None when a nonexistence certificate fires.  Raises CatalogMiss if
    every certificate passes but no block sum matches (never observed; would
    mean the block inventory is too small for the request).
    """
    key = (sig, form_invariant_key(F))
    bucket = _REP_CACHE.setdefault(key, [])
    for cached_form, hit in bucket:
        if forms_isometric(F, cached_form):
            return hit
    if existence_certificates(sig, F):
        bucket.append((F, None))
        return None
    det_abs = F.order
    want_sign = -1 if sig.s_minus % 2 else 1
    for chosen in _iter_block_sums(sig, det_abs):
        L, expr = _sum_of(chosen)
        if determinant(L) != want_sign * det_abs:
            continue
        if forms_isometric(disc_of(L), F):
            rep = Representative(L, expr)
            bucket.append((F, rep))
            return rep
    raise CatalogMiss(f"no block-sum lattice with signature {sig} and "
                      f"discriminant form of order {det_abs}")


def catalog_p_elementary(p: int, max_rank: int, sig_filter) -> list[Representative]:
    """One representative per genus of p-elementary block sums.

    `sig_filter` is a predicate on SignaturePair.  Deduplication is by
    genus_equal; representatives keep the first (canonical) block expression.
    """
    if max_rank > 12:
        raise CatalogError("max_rank guard exceeded")
    # a direct sum is p-elementary iff every block is, so filter blocks first
    blocks = [b for b in _blocks()
              if is_p_elementary(disc_of(b.lattice), p)]
    found: list[Representative] = []
    choice: list[_Block] = []

    def emit():
        L, expr = _sum_of(choice)
        if not sig_filter(signature(L)):
            return
        for rep in found:
            if genus_equal(rep.lattice, L):
                return
        found.append(Representative(L, expr))

    def rec(idx, rank_left):
        emit()
        if idx == len(blocks):
            return
        b = blocks[idx]
        if b.lattice.rank <= rank_left:
            choice.append(b)
            rec(idx, rank_left - b.lattice.rank)
            choice.pop()
        rec(idx + 1, rank_left)

    rec(0, max_rank)
    found.sort(key=lambda rep: (rep.lattice.rank, abs(determinant(rep.lattice)),
                                rep.expression))
    return found


# admissibility filters --------------------------------------------------------

def admissible_coinvariant(L: GramLattice, p: int, ambient_rank: int
                           ) -> tuple[bool, list[str]]:
    """Arithmetic filters for L to be a coinvariant lattice of a prime-order
    isometry of an ambient lattice of the given rank."""
    F = discriminant_form(L)
    if not is_p_elementary(F, p):
        raise CatalogError("coinvariant candidate must be p-elementary")
    reasons = []
    r = L.rank
    a = length(F)
    if p > 2 and r % (p - 1) != 0:
        reasons.append("rank-not-divisible-by-p-minus-1")
        return (False, reasons)
    m = r // (p - 1)
    if a > m:
        reasons.append("length-exceeds-index-bound")
    if r > ambient_rank:
        reasons.append("rank-exceeds-ambient")
    if a > ambient_rank - r:
        reasons.append("length-exceeds-complement-rank")
    if r == p - 1:
        d = abs(determinant(L))
        num = d * (p ** (p - 2))  # d / p^(p-2) is a square iff d * p^(p-2) is
        root = math.isqrt(num)
        if root * root != num:
            reasons.append("determinant-square-test")
    return (not reasons, reasons)


def k3_embedding_certificate(S: GramLattice) -> bool:
    """Exact inequalities guaranteeing a primitive embedding into the K3
    lattice (signature (3,19)) for a p-elementary lattice of shape (2, r-2)."""
    sig = signature(S)
    if sig.s_plus != 2:
        raise CatalogError("certificate needs signature (2, rank-2)")
    r = S.rank
    a = length(discriminant_form(S))
    return (3 - 2 >= 0) and (19 - (r - 2) >= 0) and (22 - r > a)


@lru_cache(maxsize=1)
def _k3_realizable_tags():
    data = json.loads(resources.files("og6lat.data").joinpath(
        "k3_realizable.json").read_text())
    tags = set()
    for row in data["tags"]:
        tags.add((row["p"], tuple(row["signature"]), row["a"]))
    return tags


def k3_realizable(S: GramLattice, p: int) -> bool:
    """Membership in the bundled list of K3-realizable coinvariant genera."""
    if p == 2:
        return True
    tag = genus_tag(S, p)
    return (p, (tag.signature.s_plus, tag.signature.s_minus), tag.a) \
        in _k3_realizable_tags()
