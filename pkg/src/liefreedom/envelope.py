"""The enveloping algebra of the free Lie algebra, truncated by degree.

For a free Lie algebra the envelope is the free associative algebra on the
same alphabet, so elements are sparse {word: scalar} tables.  On top of the
plain word arithmetic this module provides:

* Fox derivatives, the left cofactors in u = sum_j y_j D_j(u);
* congruence modulo the ideal N_U generated by a graded Lie ideal N,
  decided through PBW normal forms in U(F/N) (:class:`QuotientAlgebra`),
  with direct word-space spans (:class:`EnvelopingIdeal`) kept as the
  small-scale independent oracle;
* adapted PBW bases for a pair (H, N) of graded subspaces, with the two
  order presets the constructions need, straightening into them, and the
  representative system S_alpha, S_beta;
* weight filtrations of a nested chain of ideals: Delta-ideal spans, and
  the valuation psi on a quotient context, read off as the minimal chain
  weight of the normal-form monomials.
"""

from __future__ import annotations

import itertools

from .freelie import DegreewiseSubspace, LieElement, lie_to_assoc
from .linalg import EchelonAccumulator, SubspaceBasis, _engine, extend_basis


class EnvelopeError(ValueError):
    pass


class AssocElement:
    """A truncated element of the free associative algebra U(F)."""

    __slots__ = ("ctx", "table")

    def __init__(self, ctx, table=None):
        self.ctx = ctx
        clean = {}
        if table:
            field = ctx.field
            for w, c in table.items():
                if len(w) <= ctx.D and not field.is_zero(c):
                    clean[w] = c
        self.table = clean

    @classmethod
    def zero(cls, ctx):
        return cls(ctx, {})

    @classmethod
    def one(cls, ctx):
        return cls(ctx, {(): ctx.field.one})

    @classmethod
    def generator(cls, ctx, i):
        if not 0 <= i < ctx.n:
            raise EnvelopeError(f"generator index {i} out of range")
        return cls(ctx, {(i,): ctx.field.one})

    @classmethod
    def from_word(cls, ctx, word, coeff=1):
        word = tuple(word)
        coeff = ctx.field.from_int(coeff) if isinstance(coeff, int) else coeff
        return cls(ctx, {word: coeff})

    @classmethod
    def scalar(cls, ctx, c):
        c = ctx.field.from_int(c) if isinstance(c, int) else c
        return cls(ctx, {(): c})

    @property
    def is_zero(self):
        return not self.table

    @property
    def constant_term(self):
        return self.table.get((), self.ctx.field.zero)

    @property
    def min_degree(self):
        return min((len(w) for w in self.table), default=0)

    @property
    def max_degree(self):
        return max((len(w) for w in self.table), default=0)

    def component(self, d):
        return AssocElement(self.ctx, {w: c for w, c in self.table.items()
                                       if len(w) == d})

    def degrees(self):
        return sorted({len(w) for w in self.table})

    def __add__(self, other):
        _check(self, other)
        field = self.ctx.field
        out = dict(self.table)
        for w, c in other.table.items():
            nv = field.add(out.get(w, field.zero), c)
            if field.is_zero(nv):
                out.pop(w, None)
            else:
                out[w] = nv
        return AssocElement(self.ctx, out)

    def __neg__(self):
        field = self.ctx.field
        return AssocElement(self.ctx, {w: field.neg(c) for w, c in self.table.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return mul(self, other)

    def scale(self, c):
        field = self.ctx.field
        if field.is_zero(c):
            return AssocElement.zero(self.ctx)
        return AssocElement(self.ctx, {w: field.mul(c, v) for w, v in self.table.items()})

    def __eq__(self, other):
        return (isinstance(other, AssocElement) and self.ctx is other.ctx
                and self.table == other.table)

    def __str__(self):
        if not self.table:
            return "0"
        names = self.ctx.generators.names
        parts = []
        for w in sorted(self.table, key=lambda w: (len(w), w)):
            mono = "*".join(names[i] for i in w) if w else "1"
            parts.append(f"({self.table[w]})*{mono}")
        return " + ".join(parts)

    __repr__ = __str__


def _check(a, b):
    if a.ctx is not b.ctx:
        raise EnvelopeError("context mismatch")


def mul(a, b):
    """Concatenation product; words beyond the truncation are discarded."""
    _check(a, b)
    field = a.ctx.field
    cap = a.ctx.D
    out = {}
    for w1, c1 in a.table.items():
        d1 = len(w1)
        for w2, c2 in b.table.items():
            if d1 + len(w2) > cap:
                continue
            w = w1 + w2
            nv = field.add(out.get(w, field.zero), field.mul(c1, c2))
            if field.is_zero(nv):
                out.pop(w, None)
            else:
                out[w] = nv
    return AssocElement(a.ctx, out)


def fox_derivative(u, j):
    """D_j(u): the left cofactor of y_j, so that u = sum_j y_j D_j(u).

    Defined only on the augmentation ideal; a nonzero constant term is an
    error.
    """
    if not u.ctx.field.is_zero(u.constant_term):
        raise EnvelopeError("Fox derivatives require zero constant term")
    if not 0 <= j < u.ctx.n:
        raise EnvelopeError(f"generator index {j} out of range")
    out = {}
    for w, c in u.table.items():
        if w and w[0] == j:
            out[w[1:]] = c
    return AssocElement(u.ctx, out)


def fox_gradient(u):
    """All Fox derivatives of u, indexed by the generators."""
    return [fox_derivative(u, j) for j in range(u.ctx.n)]


def word_basis(ctx, d):
    """All words of degree exactly d, in lex order."""
    return list(itertools.product(range(ctx.n), repeat=d))


# ---------------------------------------------------------------------------
# the ideal N_U in word coordinates (small-scale oracle path)
# ---------------------------------------------------------------------------


class EnvelopingIdeal:
    """Degreewise word-coordinate bases of the two-sided ideal N_U.

    Recursion: the degree-e component is spanned by y_i * (N_U)_{e-1},
    (N_U)_{e-1} * y_i and the embedded degree-e part of N.  Exact, but the
    ambient word space has dimension n^e, so this is the desk-scale oracle;
    congruences go through :class:`QuotientAlgebra` instead.
    """

    def __init__(self, ctx, N):
        self.ctx = ctx
        self.N = N
        self._bases = {}

    def component(self, d):
        """Canonical basis of the degree-exactly-d component."""
        if d in self._bases:
            return self._bases[d]
        ctx = self.ctx
        words = word_basis(ctx, d)
        index = {w: i for i, w in enumerate(words)}
        acc = EchelonAccumulator(ctx.field, len(words))
        if d >= 1:
            for x in self.N.elements(d):
                acc.insert({index[w]: c for w, c in lie_to_assoc(x).table.items()})
            if d >= 2 and not acc.is_full:
                prev_words = word_basis(ctx, d - 1)
                prev = self.component(d - 1)
                for row in prev.int_rows():
                    for i in range(ctx.n):
                        acc.insert({index[(i,) + prev_words[c]]: v
                                    for c, v in row.items()})
                        acc.insert({index[prev_words[c] + (i,)]: v
                                    for c, v in row.items()})
                    if acc.is_full:
                        break
        basis = acc.freeze()
        self._bases[d] = basis
        return basis

    def basis_up_to(self, d):
        """Basis of the degree-<= d component in flat word coordinates.

        Flat coordinates enumerate the empty word first, then the words of
        degree 1, 2, ... in lex order.
        """
        offsets = [0]
        for e in range(d + 1):
            offsets.append(offsets[-1] + self.ctx.n ** e)
        rows, pivots = [], []
        for e in range(1, d + 1):
            comp = self.component(e)
            off = offsets[e]
            for piv, row in zip(comp.pivots, comp.rows):
                rows.append({off + c: v for c, v in row.items()})
                pivots.append(off + piv)
        return SubspaceBasis._raw(self.ctx.field, offsets[d + 1],
                                  tuple(rows), tuple(pivots))

    def contains(self, u):
        if not self.ctx.field.is_zero(u.constant_term):
            return False
        for d in u.degrees():
            if d == 0:
                continue
            index = {w: i for i, w in enumerate(word_basis(self.ctx, d))}
            vec = {index[w]: c for w, c in u.table.items() if len(w) == d}
            if not self.component(d).contains(vec):
                return False
        return True


def ideal_NU_basis(N, d, ctx=None):
    """Basis of the degree-<= d component of N_U in flat word coordinates."""
    ctx = ctx or N.ctx
    return EnvelopingIdeal(ctx, N).basis_up_to(d)


# ---------------------------------------------------------------------------
# PBW engines
# ---------------------------------------------------------------------------


class _Letter:
    """A homogeneous Lie basis vector used as a PBW letter."""

    __slots__ = ("uid", "degree", "rank", "element", "weight", "klass")

    def __init__(self, uid, degree, rank, element, weight=0, klass=None):
        self.uid = uid
        self.degree = degree
        self.rank = rank          # total-order key among letters
        self.element = element    # LieElement representative in F
        self.weight = weight      # chain weight, 0 for the complement part
        self.klass = klass        # adapted-basis class tag, if any

    def __repr__(self):
        tag = f" {self.klass}" if self.klass else ""
        return f"<letter{tag} deg={self.degree} w={self.weight} uid={self.uid}>"


class _PBWEngine:
    """Shared straightening machinery over an ordered letter family.

    Subclasses provide the letters per degree and the coordinate map
    ``express`` (an exact change of basis, possibly discarding a quotiented
    part).  Normal-form monomials are tuples of letter uids, weakly
    increasing in the letters' rank order.
    """

    def __init__(self, ctx):
        self.ctx = ctx
        self._by_uid = []
        self._gen_images = None
        self._pair_cache = {}
        self._insert_cache = {}
        self._lift_cache = {}
        self._mono_cache = {}

    def letter(self, uid):
        return self._by_uid[uid]

    def express(self, elem):
        raise NotImplementedError

    def gen_images(self):
        if self._gen_images is None:
            self._gen_images = [self.express(LieElement.generator(self.ctx, i))
                                for i in range(self.ctx.n)]
        return self._gen_images

    def pair_bracket(self, a, b):
        key = (a.uid, b.uid)
        res = self._pair_cache.get(key)
        if res is None:
            res = self.express(a.element.bracket(b.element))
            self._pair_cache[key] = res
        return res

    def _insert(self, mono, letter):
        """Normal form of mono * letter for sorted ``mono``: {mono: scalar}."""
        field = self.ctx.field
        if sum(self._by_uid[u].degree for u in mono) + letter.degree > self.ctx.D:
            return {}
        if not mono or self._by_uid[mono[-1]].rank <= letter.rank:
            return {mono + (letter.uid,): field.one}
        key = (mono, letter.uid)
        res = self._insert_cache.get(key)
        if res is not None:
            return res
        head, last = mono[:-1], self._by_uid[mono[-1]]
        out = {}
        # last * letter = letter * last + [last, letter]
        for m, c in self._insert(head, letter).items():
            for m2, c2 in self._insert(m, last).items():
                _acc(out, m2, field.mul(c, c2), field)
        for lt, c in self.pair_bracket(last, letter).items():
            lt_letter = lt if isinstance(lt, _Letter) else self._by_uid[lt]
            for m2, c2 in self._insert(head, lt_letter).items():
                _acc(out, m2, field.mul(c, c2), field)
        self._insert_cache[key] = out
        return out

    def mono_mul(self, m1, m2):
        field = self.ctx.field
        out = {m1: field.one}
        for uid in m2:
            letter = self._by_uid[uid]
            nxt = {}
            for m, c in out.items():
                for m3, c3 in self._insert(m, letter).items():
                    _acc(nxt, m3, field.mul(c, c3), field)
            out = nxt
        return out

    def nf(self, u):
        """PBW normal form of an associative element: {uid tuple: scalar}."""
        field = self.ctx.field
        images = self.gen_images()
        out = {}
        for w, c in u.table.items():
            terms = {(): c}
            for i in w:
                img = images[i]
                nxt = {}
                for m, cm in terms.items():
                    for lt, cl in img.items():
                        scale = field.mul(cm, cl)
                        if field.is_zero(scale):
                            continue
                        for m2, c2 in self._insert(m, lt).items():
                            _acc(nxt, m2, field.mul(scale, c2), field)
                terms = nxt
                if not terms:
                    break
            for m, cm in terms.items():
                _acc(out, m, cm, field)
        return out

    def is_zero_mod(self, u):
        return not self.nf(u)

    def lift_mono(self, mono):
        cached = self._lift_cache.get(mono)
        if cached is not None:
            return cached
        if not mono:
            out = AssocElement.one(self.ctx)
        else:
            out = mul(self.lift_mono(mono[:-1]),
                      lie_to_assoc(self._by_uid[mono[-1]].element))
        self._lift_cache[mono] = out
        return out

    def mono_degree(self, mono):
        return sum(self._by_uid[u].degree for u in mono)

    def monomials_of_degree(self, d):
        """All normal-form monomials of total degree exactly d (cached)."""
        cached = self._mono_cache.get(d)
        if cached is not None:
            return cached
        letters = []
        for e in range(1, d + 1):
            letters.extend(self.letters(e))
        letters.sort(key=lambda lt: lt.rank)
        out = [()] if d == 0 else []

        def rec(start, remaining, acc):
            for i in range(start, len(letters)):
                lt = letters[i]
                if lt.degree <= remaining:
                    acc.append(lt.uid)
                    if lt.degree == remaining:
                        out.append(tuple(acc))
                    else:
                        rec(i, remaining - lt.degree, acc)
                    acc.pop()

        if d > 0:
            rec(0, d, [])
        self._mono_cache[d] = out
        return out

    def lift(self, nf_table):
        out = AssocElement.zero(self.ctx)
        for mono, c in nf_table.items():
            out = out + self.lift_mono(mono).scale(c)
        return out


def _acc(table, key, value, field):
    nv = field.add(table.get(key, field.zero), value)
    if field.is_zero(nv):
        table.pop(key, None)
    else:
        table[key] = nv


class QuotientAlgebra(_PBWEngine):
    """PBW arithmetic in U(F/M) for a graded Lie ideal M, mod degree > D.

    A nested chain M = N_m <= ... <= N_1 of graded subspaces may be given;
    the surviving letters are then adapted to the chain and carry weights,
    and the minimal total weight over normal-form monomials equals the
    Delta-filtration valuation.  Letters at each degree form an echelon
    completion of M_d built from the deepest chain member outward, so the
    leading-entry greedy expresses any vector exactly.
    """

    def __init__(self, ctx, deep, chain=None):
        super().__init__(ctx)
        self.deep = deep
        if chain is None:
            chain = [deep]
        self.chain = list(chain)
        if self.chain[-1] is not deep and self.chain[-1] != deep:
            raise EnvelopeError("chain must end at the quotienting ideal")
        self._lookup = {}   # degree -> {pivot: (row, letter or None)}

    def letters(self, d):
        if d in self._lookup:
            return [lt for _, lt in sorted(
                ((p, l) for p, (r, l) in self._lookup[d].items() if l is not None),
                key=lambda pl: pl[1].uid)]
        ctx = self.ctx
        dim = ctx.dim(d)
        eng = _engine(ctx.field)
        lookup = {}

        def reduce_row(row):
            while row:
                lead = min(row)
                hit = lookup.get(lead)
                if hit is None:
                    return row
                row = eng.reduce(row, hit[0], lead)
            return {}

        def add_rows(rows, weight):
            for row in rows:
                row = reduce_row(dict(row))
                if not row:
                    continue
                row = eng.normalize(row)
                lookup[min(row)] = (row, weight)

        add_rows(self.deep.basis(d).rows, None)
        for weight in range(len(self.chain) - 1, 0, -1):
            add_rows(self.chain[weight - 1].basis(d).rows, weight)
        add_rows(({c: 1} for c in range(dim)), 0)

        words = ctx.lyndon_basis(d)
        final = {}
        for pivot in sorted(lookup):
            row, weight = lookup[pivot]
            if weight is None:
                final[pivot] = (row, None)
            else:
                elem = LieElement(ctx, {words[c]: ctx.field.from_int(v)
                                        for c, v in row.items()})
                uid = len(self._by_uid)
                letter = _Letter(uid, d, rank=(d, uid), element=elem, weight=weight)
                self._by_uid.append(letter)
                final[pivot] = (row, letter)
        self._lookup[d] = final
        return [lt for _, (row, lt) in sorted(final.items()) if lt is not None]

    def express(self, elem):
        """Coordinates over the surviving letters; the M-part is dropped."""
        ctx = self.ctx
        field = ctx.field
        out = {}
        for d in elem.degrees():
            self.letters(d)
            lookup = self._lookup[d]
            vec = dict(elem.component_coords(d))
            while vec:
                lead = min(vec)
                row, letter = lookup[lead]
                c = field.div(vec[lead], field.from_int(row[lead])
                              if isinstance(row[lead], int) else row[lead])
                if letter is not None and not field.is_zero(c):
                    out[letter] = field.add(out.get(letter, field.zero), c)
                for col, v in row.items():
                    nv = field.sub(vec.get(col, field.zero), field.mul(c, v))
                    if field.is_zero(nv):
                        vec.pop(col, None)
                    else:
                        vec[col] = nv
        return out

    # -- weights and the valuation

    def monomial_weight(self, mono):
        return sum(self._by_uid[u].weight for u in mono)

    def min_weight(self, u):
        """Minimal chain weight over normal-form monomials; None when zero."""
        nf = self.nf(u)
        if not nf:
            return None
        return min(self.monomial_weight(m) for m in nf)


def congruent_mod_NU(u, v, N):
    """True iff u - v lies in the ideal N_U, degreewise up to truncation."""
    _check(u, v)
    return quotient_algebra(u.ctx, N).is_zero_mod(u - v)


_QUOTIENT_CACHE = {}


def quotient_algebra(ctx, N):
    """The cached U(F/N) engine for a graded ideal N."""
    key = (id(ctx), _subspace_key(N))
    qa = _QUOTIENT_CACHE.get(key)
    if qa is None:
        qa = QuotientAlgebra(ctx, N)
        _QUOTIENT_CACHE[key] = qa
    return qa


def _subspace_key(N):
    return tuple(sorted((d, b.pivots, tuple(tuple(sorted(r.items())) for r in b.rows))
                        for d, b in N.comps.items()))


# ---------------------------------------------------------------------------
# adapted bases for a pair (H, N) and straightening into them
# ---------------------------------------------------------------------------

#: order presets: class ranks, smallest first.  In the construction preset
#: the intersection letters come first (a < b < c < d); in the
#: representatives preset the outside letters come first (d < e < b < a).
PRESET_CONSTRUCTION = "construction"
PRESET_REPRESENTATIVES = "representatives"

_CLASS_ORDERS = {
    # klass tags: "meet" = H cap N, "hside" = completes meet inside H,
    # "nside" = completes meet inside N, "out" = completes H + N to F
    PRESET_CONSTRUCTION: ("meet", "hside", "nside", "out"),
    PRESET_REPRESENTATIVES: ("out", "hside", "nside", "meet"),
}

#: paper-facing class letters per preset, in rank order
CLASS_TAGS = {
    PRESET_CONSTRUCTION: {"meet": "a", "hside": "b", "nside": "c", "out": "d"},
    PRESET_REPRESENTATIVES: {"meet": "a", "hside": "e", "nside": "b", "out": "d"},
}


class AdaptedBasis(_PBWEngine):
    """An adapted homogeneous basis of F for a pair (H, N), as PBW letters.

    Per degree the four classes are the canonical basis of H cap N, its
    completions inside H and inside N, and a completion of H + N to F
    drawn from the unit vectors.  The preset fixes the total order; both
    presets used by the constructions are available.
    """

    def __init__(self, ctx, H, N, preset=PRESET_REPRESENTATIVES):
        super().__init__(ctx)
        if preset not in _CLASS_ORDERS:
            raise EnvelopeError(f"unknown preset {preset!r}")
        self.H = H
        self.N = N
        self.preset = preset
        self._class_rank = {k: i for i, k in enumerate(_CLASS_ORDERS[preset])}
        self._built = set()
        self._letters_by_degree = {}
        self._solvers = {}

    def _build(self, d):
        if d in self._built:
            return
        ctx = self.ctx
        field = ctx.field
        dim = ctx.dim(d)
        words = ctx.lyndon_basis(d)
        h, n = self.H.basis(d), self.N.basis(d)
        from .linalg import intersect
        meet = intersect(h, n)
        hn_sum = EchelonAccumulator(field, dim)
        for row in h.rows:
            hn_sum.insert(dict(row), native=True)
        for row in n.rows:
            hn_sum.insert(dict(row), native=True)
        hn_sum = hn_sum.freeze()
        full = SubspaceBasis.full(field, dim)

        classes = {
            "meet": [dict(r) for r in meet.rows],
            "hside": [_to_int(field, v) for v in extend_basis(meet, h)],
            "nside": [_to_int(field, v) for v in extend_basis(meet, n)],
            "out": [_to_int(field, v) for v in extend_basis(hn_sum, full)],
        }
        letters = []
        for klass in _CLASS_ORDERS[self.preset]:
            for idx, row in enumerate(classes[klass]):
                elem = LieElement(ctx, {words[c]: field.from_int(v)
                                        for c, v in row.items()})
                uid = len(self._by_uid)
                rank = (self._class_rank[klass], d, idx)
                letter = _Letter(uid, d, rank, elem, klass=klass)
                self._by_uid.append(letter)
                letters.append((letter, row))
        self._letters_by_degree[d] = [lt for lt, _ in letters]
        self._solvers[d] = _CoordinateSolver(field, dim, letters)
        self._built.add(d)

    def letters(self, d):
        self._build(d)
        return self._letters_by_degree[d]

    def class_letters(self, d, klass):
        return [lt for lt in self.letters(d) if lt.klass == klass]

    def express(self, elem):
        out = {}
        field = self.ctx.field
        for d in elem.degrees():
            self._build(d)
            coords = self._solvers[d].solve(elem.component_coords(d))
            for letter, c in coords:
                if not field.is_zero(c):
                    out[letter] = field.add(out.get(letter, field.zero), c)
        return out

    def monomial_class_counts(self, mono):
        """(theta, eta, nu, mu): counts of out/hside/nside/meet letters."""
        counts = {"out": 0, "hside": 0, "nside": 0, "meet": 0}
        for uid in mono:
            counts[self._by_uid[uid].klass] += 1
        return (counts["out"], counts["hside"], counts["nside"], counts["meet"])

    def monomial_degree(self, mono):
        return sum(self._by_uid[u].degree for u in mono)

    def monomial_sort_key(self, mono):
        """Shorter monomials first, then left-to-right by the letter order."""
        return (len(mono), tuple(self._by_uid[u].rank for u in mono))

    def in_representative_system(self, mono):
        theta, eta, nu, mu = self.monomial_class_counts(mono)
        return nu == 0 and mu == 0

    def reduce_mod_NU(self, nf_table):
        """Drop monomials containing a letter inside N: congruence mod N_U."""
        return {m: c for m, c in nf_table.items()
                if all(self._by_uid[u].klass in ("out", "hside") for u in m)}


class _CoordinateSolver:
    """Exact coordinates over an arbitrary homogeneous basis of F_d.

    Augmented echelon with a marker column: reducing (v | 0 | 1) by the
    stored rows (b_i | e_i | 0) leaves (0 | t | s) with v = sum(-t_i/s) b_i.
    """

    def __init__(self, field, dim, letters):
        self.field = field
        self.dim = dim
        self.letters = [lt for lt, _ in letters]
        self._acc = EchelonAccumulator(field, dim + len(letters) + 1)
        for i, (_, row) in enumerate(letters):
            aug = dict(row)
            aug[dim + i] = 1
            self._acc.insert(aug, native=True)
        if self._acc.rank != len(letters):
            raise EnvelopeError("adapted letters are not independent")

    def solve(self, vec):
        field = self.field
        eng = self._acc._eng
        marker = self.dim + len(self.letters)
        probe = {c: v for c, v in vec.items() if not field.is_zero(v)}
        if not probe:
            return []
        # the marker joins before normalization so it absorbs any rescaling
        probe[marker] = field.one
        aug = eng.prep(probe)
        res = self._acc.residue(aug, native=True)
        if any(c < self.dim for c in res):
            raise EnvelopeError("vector outside the letter span")
        s = res.pop(marker)
        coords = []
        for c, t in res.items():
            lt = self.letters[c - self.dim]
            coords.append((lt, field.div(field.from_int(-t), field.from_int(s))))
        return coords


def _to_int(field, scalar_row):
    return _engine(field).prep(scalar_row)


def pbw_straighten(u, ab):
    """Coordinates of u on the adapted PBW basis: {PBWMonomial: scalar}."""
    return {PBWMonomial(ab, mono): c for mono, c in ab.nf(u).items()}


class PBWMonomial:
    """A sorted monomial in adapted letters, with its class counts."""

    __slots__ = ("basis", "uids")

    def __init__(self, basis, uids):
        self.basis = basis
        self.uids = tuple(uids)

    @property
    def factors(self):
        return tuple(self.basis.letter(u) for u in self.uids)

    @property
    def class_counts(self):
        return self.basis.monomial_class_counts(self.uids)

    @property
    def degree(self):
        return self.basis.monomial_degree(self.uids)

    def sort_key(self):
        return self.basis.monomial_sort_key(self.uids)

    def __eq__(self, other):
        return (isinstance(other, PBWMonomial) and self.basis is other.basis
                and self.uids == other.uids)

    def __hash__(self):
        return hash((id(self.basis), self.uids))

    def __repr__(self):
        tags = CLASS_TAGS[self.basis.preset]
        body = "*".join(f"{tags[self.basis.letter(u).klass]}[{self.basis.letter(u).degree}.{u}]"
                        for u in self.uids) or "1"
        return body


def classify_representatives(ab, d):
    """The degree-d monomials of the representative system, split and sorted.

    Returns (S_alpha, S_beta): monomials over out/hside letters only, those
    without an outside letter first; each list sorted shorter-first then
    lexicographically in the adapted order.
    """
    pool = []
    for e in range(1, d + 1):
        ab.letters(e)
    for e in range(1, d + 1):
        pool.extend(ab.class_letters(e, "out"))
        pool.extend(ab.class_letters(e, "hside"))
    pool.sort(key=lambda lt: lt.rank)
    monos = []

    def rec(start, remaining, acc):
        if remaining == 0:
            monos.append(tuple(acc))
            return
        for i in range(start, len(pool)):
            lt = pool[i]
            if lt.degree <= remaining:
                acc.append(lt.uid)
                rec(i, remaining - lt.degree, acc)
                acc.pop()

    rec(0, d, [])
    alpha, beta = [], []
    for m in monos:
        theta = sum(1 for u in m if ab.letter(u).klass == "out")
        (beta if theta > 0 else alpha).append(PBWMonomial(ab, m))
    alpha.sort(key=PBWMonomial.sort_key)
    beta.sort(key=PBWMonomial.sort_key)
    return alpha, beta


# ---------------------------------------------------------------------------
# Delta ideals and the valuation
# ---------------------------------------------------------------------------


SIDE_FULL = "full"
SIDE_ENVELOPE_OF_HEAD = "head"


class DeltaIdeals:
    """Word-coordinate spans of the weight-filtration ideals of a chain.

    Delta_t is generated by the products of chain members with total weight
    at least t, either as an ideal of the full envelope or of the envelope
    of the chain head.  Desk-scale oracle; the valuation uses the chain
    weights of PBW normal forms instead.
    """

    def __init__(self, ctx, chain, side=SIDE_FULL):
        if side not in (SIDE_FULL, SIDE_ENVELOPE_OF_HEAD):
            raise EnvelopeError(f"unknown side {side!r}")
        self.ctx = ctx
        self.chain = list(chain)
        self.side = side
        self._member_images = None
        self._products = {}
        self._ideal = {}

    def _images(self):
        if self._member_images is None:
            per_member = []
            for sub in self.chain:
                imgs = {}
                for d in range(1, self.ctx.D + 1):
                    imgs[d] = [lie_to_assoc(x) for x in sub.elements(d)]
                per_member.append(imgs)
            self._member_images = per_member
        return self._member_images

    def _product_span(self, w, e):
        """Spanning elements of weight >= w products at degree exactly e."""
        if w <= 0:
            raise EnvelopeError("weight must be positive")
        key = (w, e)
        if key in self._products:
            return self._products[key]
        out = []
        images = self._images()
        for j, imgs in enumerate(images, start=1):
            for d in range(1, e + 1):
                for x in imgs.get(d, ()):
                    if w - j <= 0:
                        if d == e:
                            out.append(x)
                    if e - d >= 1 and w - j >= 1:
                        for q in self._product_span(w - j, e - d):
                            out.append(mul(x, q))
        self._products[key] = out
        return out

    def basis(self, t, d):
        """Degree-exactly-d component of Delta_t in word coordinates."""
        key = (t, d)
        if key in self._ideal:
            return self._ideal[key]
        ctx = self.ctx
        words = word_basis(ctx, d)
        index = {w: i for i, w in enumerate(words)}
        acc = EchelonAccumulator(ctx.field, len(words))
        for x in self._product_span(t, d):
            acc.insert({index[w]: c for w, c in x.table.items()})
        if d >= 2 and not acc.is_full:
            prev_words = word_basis(ctx, d - 1)
            if self.side == SIDE_FULL:
                multipliers = [(AssocElement.generator(ctx, i), 1)
                               for i in range(ctx.n)]
            else:
                multipliers = []
                for e in range(1, d):
                    for x in self.chain[0].elements(e):
                        multipliers.append((lie_to_assoc(x), e))
            for mult, e in multipliers:
                prev = self.basis(t, d - e)
                source_words = word_basis(ctx, d - e)
                for row in prev.int_rows():
                    elem = AssocElement(ctx, {source_words[c]: v
                                              for c, v in row.items()})
                    for prod in (mul(mult, elem), mul(elem, mult)):
                        acc.insert({index[w]: c for w, c in prod.table.items()})
                if acc.is_full:
                    break
        basis = acc.freeze()
        self._ideal[key] = basis
        return basis

    def basis_up_to(self, t, d):
        """Degree-<= d basis in flat word coordinates (empty word first)."""
        offsets = [0]
        for e in range(d + 1):
            offsets.append(offsets[-1] + self.ctx.n ** e)
        rows, pivots = [], []
        for e in range(1, d + 1):
            comp = self.basis(t, e)
            for piv, row in zip(comp.pivots, comp.rows):
                rows.append({offsets[e] + c: v for c, v in row.items()})
                pivots.append(offsets[e] + piv)
        return SubspaceBasis._raw(self.ctx.field, offsets[d + 1],
                                  tuple(rows), tuple(pivots))

    def contains(self, u, t):
        """Membership of u in Delta_t, degreewise."""
        for d in u.degrees():
            if d == 0:
                return False
            index = {w: i for i, w in enumerate(word_basis(self.ctx, d))}
            vec = {index[w]: c for w, c in u.table.items() if len(w) == d}
            if not self.basis(t, d).contains(vec):
                return False
        return True


def delta_ideal_basis(chain, t, d, side=SIDE_FULL, ctx=None):
    """Basis of the degree-<= d part of Delta_t over the given chain."""
    if t < 1:
        raise EnvelopeError("weight must be at least 1")
    ctx = ctx or chain[0].ctx
    return DeltaIdeals(ctx, chain, side).basis_up_to(t, d)


class PsiValue:
    """Value of the valuation: a finite weight, a >=D sentinel, or infinity."""

    __slots__ = ("kind", "value")

    INFINITE = "infinite"
    FINITE = "finite"
    AT_LEAST = "at_least"

    def __init__(self, kind, value=None):
        self.kind = kind
        self.value = value

    @classmethod
    def finite(cls, j):
        return cls(cls.FINITE, j)

    @classmethod
    def infinite(cls):
        return cls(cls.INFINITE)

    @classmethod
    def at_least(cls, bound):
        return cls(cls.AT_LEAST, bound)

    @property
    def is_finite(self):
        return self.kind == self.FINITE

    @property
    def is_infinite(self):
        return self.kind == self.INFINITE

    @property
    def is_sentinel(self):
        return self.kind == self.AT_LEAST

    def pivot_key(self):
        """Sort key for pivot selection: sentinels count as largest."""
        if self.kind == self.FINITE:
            return (0, self.value)
        if self.kind == self.AT_LEAST:
            return (1, self.value)
        return (2, 0)

    def __eq__(self, other):
        return (isinstance(other, PsiValue) and self.kind == other.kind
                and self.value == other.value)

    def __repr__(self):
        if self.kind == self.FINITE:
            return f"psi={self.value}"
        if self.kind == self.AT_LEAST:
            return f"psi>={self.value}"
        return "psi=oo"


def psi_leq(a, b):
    """Decide a <= b for two valuation values; None when truncation hides it."""
    if a.is_infinite:
        return b.is_infinite
    if b.is_infinite:
        return True
    if a.is_finite and b.is_finite:
        return a.value <= b.value
    if a.is_finite and b.is_sentinel:
        return True if a.value <= b.value else None
    if a.is_sentinel and b.is_finite:
        return False if b.value < a.value else None
    return None


class QuotientContext:
    """A chain N_1 >= ... >= N_m of graded ideals with its two quotients.

    Arithmetic happens on U(F) representatives; ``deep`` congruences are
    taken modulo (N_m)_U and the solvable-quotient tests modulo (N_1)_U.
    The valuation of Lemma-5 type is computed on the deep quotient.
    """

    def __init__(self, ctx, chain, check_nesting=True):
        chain = list(chain)
        if not chain:
            raise EnvelopeError("empty chain")
        if check_nesting:
            for outer, inner in zip(chain, chain[1:]):
                if not outer.contains_subspace(inner):
                    raise EnvelopeError("chain members must be nested")
        self.ctx = ctx
        self.chain = chain
        self.algebra = QuotientAlgebra(ctx, chain[-1], chain)

    @classmethod
    def from_series(cls, sctx, k):
        return cls(sctx.ctx, sctx.chain(k), check_nesting=False)

    @property
    def deep(self):
        return self.chain[-1]

    @property
    def solvable_term(self):
        return self.chain[0]

    def is_zero_deep(self, u):
        return self.algebra.is_zero_mod(u)

    def is_zero_solvable(self, u):
        """Vanishing in U(F/N_1), the solvable-quotient image."""
        w = self.algebra.min_weight(u)
        return w is None or w >= 1

    def psi(self, u):
        w = self.algebra.min_weight(u)
        if w is None:
            return PsiValue.infinite()
        if w >= self.ctx.D:
            return PsiValue.at_least(self.ctx.D)
        return PsiValue.finite(w)


def psi_valuation(u, qctx):
    """The valuation of u in the quotient context (see :class:`PsiValue`)."""
    return qctx.psi(u)
