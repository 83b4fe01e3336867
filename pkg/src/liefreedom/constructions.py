"""Witness constructions over a generator subset and an ideal.

Given a subset K of the generators and a graded ideal N, these routines
produce explicit Lie elements certifying the Fox-derivative statements:

* from cofactors u_j over U(F_K) with sum y_j u_j = 0 mod N_U, an element
  v of F_K cap N with D_j(v) = u_j mod N_U (read off a straightened
  adapted PBW expansion and re-bracketed left-normed);
* the same with cofactors over all of U(F), landing in the ideal generated
  by F_K cap N (split along outside-letter tails, one base witness each);
* the decomposition v = v0 + v1 modulo [N, N] for elements whose Fox
  derivatives outside K vanish mod N_U;
* the derived-ideal membership criterion (all Fox derivatives in N_U),
  cross-checked against direct degreewise membership in [N, N];
* the distinguished-monomial witness for products of representative-system
  monomials.

Everything is exact per degree up to the context truncation; the
constructed witnesses are re-verified against their defining congruences
before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass

from .envelope import (
    PRESET_CONSTRUCTION,
    PRESET_REPRESENTATIVES,
    AdaptedBasis,
    AssocElement,
    PBWMonomial,
    fox_derivative,
    mul,
    quotient_algebra,
)
from .freelie import (
    DegreewiseSubspace,
    LieElement,
    ideal_closure,
    lie_to_assoc,
    lower_central,
    subalgebra_span,
)


class ConstructionError(ValueError):
    pass


class HypothesisError(ConstructionError):
    """The input data violates the hypothesis of the construction."""


class WitnessContext:
    """Shared data for the constructions: subset K, ideal N, adapted bases."""

    def __init__(self, ctx, subset, N):
        self.ctx = ctx
        self.subset = sorted(set(subset))
        if not self.subset:
            raise ConstructionError("empty generator subset")
        self.N = N
        self.FK = subalgebra_span(ctx, self.subset)
        self.meet = self.FK.intersect(N)
        self.quotient = quotient_algebra(ctx, N)
        self.construction_basis = AdaptedBasis(ctx, self.FK, N, PRESET_CONSTRUCTION)
        self.representative_basis = AdaptedBasis(ctx, self.FK, N, PRESET_REPRESENTATIVES)
        self._ideal_meet = None

    @property
    def ideal_meet(self):
        """id_F(F_K cap N), generated by the degreewise basis of the meet."""
        if self._ideal_meet is None:
            self._ideal_meet = ideal_closure(self.ctx, self.meet.all_elements())
        return self._ideal_meet

    def congruent(self, u, v):
        return self.quotient.is_zero_mod(u - v)

    def in_subset_envelope(self, u):
        allowed = set(self.subset)
        return all(set(w) <= allowed for w in u.table)

    def weighted_sum(self, u_map):
        """sum_j y_j u_j over the subset."""
        total = AssocElement.zero(self.ctx)
        for j, u in u_map.items():
            total = total + mul(AssocElement.generator(self.ctx, j), u)
        return total


def _left_normed(head, tail_elements):
    out = head
    for t in tail_elements:
        out = out.bracket(t)
    return out


def lemma1_construct(wctx, u_map):
    """A witness v in F_K cap N with D_j(v) = u_j mod N_U for j in K.

    Requires each cofactor in U(F_K) and sum_j y_j u_j = 0 mod N_U.  The
    witness is read off the adapted straightening of that sum: every
    monomial factors as an intersection letter times subset letters, and
    the left-normed bracketing of each factorization adds up to v.
    """
    ctx = wctx.ctx
    u_map = {j: u for j, u in u_map.items() if not u.is_zero}
    for j, u in u_map.items():
        if j not in wctx.subset:
            raise HypothesisError(f"cofactor index {j} outside the subset")
        if not wctx.in_subset_envelope(u):
            raise HypothesisError(f"cofactor for generator {j} leaves U(F_K)")
    u = wctx.weighted_sum(u_map)
    if not wctx.quotient.is_zero_mod(u):
        raise HypothesisError("sum_j y_j u_j is not congruent to 0 mod N_U")

    ab = wctx.construction_basis
    v = LieElement.zero(ctx)
    for mono, c in ab.nf(u).items():
        letters = [ab.letter(uid) for uid in mono]
        assert all(lt.klass in ("meet", "hside") for lt in letters)
        assert letters and letters[0].klass == "meet"
        v = v + _left_normed(letters[0].element,
                             [lt.element for lt in letters[1:]]).scale(c)

    _verify_membership(wctx.meet, v, "v outside F_K cap N")
    _verify_cofactors(wctx, v, u_map)
    return v


def lemma2_construct(wctx, u_map):
    """A witness v in id_F(F_K cap N), cofactors now over all of U(F).

    Splits each cofactor along its outside-letter tails, produces one base
    witness per tail and re-assembles with left-normed brackets.
    """
    ctx = wctx.ctx
    u_map = {j: u for j, u in u_map.items() if not u.is_zero}
    for j in u_map:
        if j not in wctx.subset:
            raise HypothesisError(f"cofactor index {j} outside the subset")
    total = wctx.weighted_sum(u_map)
    if not wctx.quotient.is_zero_mod(total):
        raise HypothesisError("sum_j y_j u_j is not congruent to 0 mod N_U")

    ab = wctx.construction_basis
    by_tail = {}
    for j, u in u_map.items():
        for mono, c in ab.nf(u).items():
            letters = [ab.letter(uid) for uid in mono]
            if any(lt.klass in ("meet", "nside") for lt in letters):
                continue  # inside N_U, irrelevant mod N_U
            split = next((i for i, lt in enumerate(letters) if lt.klass == "out"),
                         len(letters))
            assert all(lt.klass == "out" for lt in letters[split:])
            prefix, tail = mono[:split], mono[split:]
            table = by_tail.setdefault(tail, {})
            jt = table.setdefault(j, AssocElement.zero(ctx))
            table[j] = jt + ab.lift_mono(prefix).scale(c)

    v = LieElement.zero(ctx)
    for tail, cofactors in sorted(by_tail.items()):
        v_l = lemma1_construct(wctx, cofactors)
        tail_elements = [ab.letter(uid).element for uid in tail]
        v = v + _left_normed(v_l, tail_elements)

    _verify_membership(wctx.ideal_meet, v, "v outside id_F(F_K cap N)")
    _verify_cofactors(wctx, v, u_map)
    return v


def _verify_membership(subspace, v, message):
    if not subspace.contains(v):
        raise ConstructionError(message)


def _verify_cofactors(wctx, v, u_map):
    va = lie_to_assoc(v)
    for j in wctx.subset:
        expected = u_map.get(j, AssocElement.zero(wctx.ctx))
        if not wctx.congruent(fox_derivative(va, j), expected):
            raise ConstructionError(f"constructed witness has wrong cofactor {j}")


@dataclass
class Decomposition:
    """v = v0 + v1 + remainder with the remainder verified inside [N, N]."""

    v0: LieElement
    v1: LieElement
    remainder: LieElement
    remainder_in_derived: bool


def theorem3_decompose(wctx, v):
    """Split v into an F_K part and an id_F(F_K cap N) part, mod [N, N].

    The hypothesis is that every Fox derivative of v outside K vanishes
    mod N_U; violating it raises :class:`HypothesisError` naming the
    offending generator.
    """
    ctx = wctx.ctx
    va = lie_to_assoc(v)
    zero = AssocElement.zero(ctx)
    for k in range(ctx.n):
        if k in wctx.subset:
            continue
        if not wctx.congruent(fox_derivative(va, k), zero):
            raise HypothesisError(
                f"v has an essential dependence on generator {k}")

    ab = wctx.representative_basis
    coords = ab.express(v)
    assert all(lt.klass != "out" for lt in coords), "outside letters survive (13)"
    v0 = LieElement.zero(ctx)
    for lt, c in coords.items():
        if lt.klass == "hside":
            v0 = v0 + lt.element.scale(c)
    rest = v - v0
    if not wctx.N.contains(rest):
        raise ConstructionError("projection failed to land v - v0 in N")

    rest_assoc = lie_to_assoc(rest)
    u_map = {j: fox_derivative(rest_assoc, j) for j in wctx.subset}
    v1 = lemma2_construct(wctx, u_map)
    remainder = rest - v1
    ok = derived_ideal_criterion(remainder, wctx.N)
    if not ok:
        raise ConstructionError("remainder escaped [N, N]")
    return Decomposition(v0, v1, remainder, ok)


_DERIVED_CACHE = {}


def _derived_subalgebra(N):
    from .envelope import _subspace_key

    key = (id(N.ctx), _subspace_key(N))
    got = _DERIVED_CACHE.get(key)
    if got is None:
        got = lower_central(N, 2, verify=False)
        _DERIVED_CACHE[key] = got
    return got


def derived_ideal_criterion(v, N):
    """True iff every Fox derivative of v lies in N_U; requires v in N.

    The verdict is cross-checked against direct degreewise membership in
    [N, N]; a disagreement would falsify the criterion and raises.
    """
    if not N.contains(v):
        raise ConstructionError("element outside N")
    qa = quotient_algebra(v.ctx, N)
    va = lie_to_assoc(v)
    by_fox = all(qa.is_zero_mod(fox_derivative(va, k)) for k in range(v.ctx.n))
    direct = _derived_subalgebra(N).contains(v)
    if by_fox != direct:
        raise ConstructionError(
            "Fox criterion and direct [N, N] membership disagree")
    return by_fox


def lemma4_witness(deltas, mus, ab):
    """The distinguished monomial of the largest outside-degree product.

    Inputs are strictly increasing lists of representative-system monomials.
    Returns None when everything sits in S_alpha; otherwise a triple
    (mu, i0, j0) with mu a monomial appearing in the expansion of
    deltas[i0] * mus[j0] and in no other product, verified by expanding
    every product.
    """
    for seq, name in ((deltas, "deltas"), (mus, "mus")):
        keys = [ab.monomial_sort_key(m.uids) for m in seq]
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise ConstructionError(f"{name} must be strictly increasing")
        for m in seq:
            if not ab.in_representative_system(m.uids):
                raise ConstructionError(f"{name} contains a monomial outside S")
    if not deltas or not mus:
        raise ConstructionError("need at least one monomial on each side")

    def out_count(m):
        return sum(1 for uid in m.uids if ab.letter(uid).klass == "out")

    x = max(out_count(m) for m in deltas)
    y = max(out_count(m) for m in mus)
    if x + y == 0:
        return None
    i0 = max((i for i, m in enumerate(deltas) if out_count(m) == x),
             key=lambda i: ab.monomial_sort_key(deltas[i].uids))
    j0 = max((j for j, m in enumerate(mus) if out_count(m) == y),
             key=lambda j: ab.monomial_sort_key(mus[j].uids))
    if deltas[i0].degree + mus[j0].degree > ab.ctx.D:
        raise ConstructionError(
            "distinguished product exceeds the truncation degree")
    product = ab.mono_mul(deltas[i0].uids, mus[j0].uids)
    mu = max(product, key=ab.monomial_sort_key)
    witness = PBWMonomial(ab, mu)
    assert out_count(witness) == x + y and witness.class_counts[2:] == (0, 0)

    for i, dm in enumerate(deltas):
        for j, mm in enumerate(mus):
            if (i, j) == (i0, j0):
                continue
            if mu in ab.mono_mul(dm.uids, mm.uids):
                raise ConstructionError(
                    "distinguished monomial reappears in another product")
    return witness, i0, j0
