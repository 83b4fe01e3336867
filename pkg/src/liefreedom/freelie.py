"""The graded free Lie algebra on a finite alphabet, truncated by degree.

Elements are kept in coordinates on the Lyndon basis: the Lyndon words of
degree d with their standard bracketings form a basis of the degree-d
component, and every computation is carried per degree up to the context's
truncation bound D.  Brackets are evaluated through the enveloping algebra
(commutator of the associative expansions, re-expressed in Lyndon
coordinates by leading-word elimination) and cached per basis pair.

The module also holds the degreewise subspace machinery built on top of
:mod:`liefreedom.linalg`: spans of subalgebras, lower central powers, ideal
closures, and the polynilpotent series contexts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .fields import QQ
from .linalg import EchelonAccumulator, SubspaceBasis, extend_basis
from .words import GeneratorSet, WordError, is_lyndon, lyndon_words, standard_factorization


class LieError(ValueError):
    pass


class NotLieElement(LieError):
    """An associative element outside the image of the free Lie algebra."""


class AlgebraContext:
    """Generators, ground field and truncation degree, with shared caches.

    All elements and subspaces refer to one context; mixing contexts is an
    error.  The caches (Lyndon bases, associative expansions of basis
    bracketings, pairwise basis brackets) make repeated degreewise span
    computations cheap.
    """

    def __init__(self, generators, field=QQ, degree_cap=6):
        if not isinstance(generators, GeneratorSet):
            generators = GeneratorSet(generators)
        if degree_cap < 1:
            raise LieError("truncation degree must be at least 1")
        self.generators = generators
        self.n = generators.n
        self.field = field
        self.D = degree_cap
        self._lyndon = {}
        self._lyndon_index = {}
        self._offsets = None
        self._expansion = {}
        self._bracket = {}

    # -- basis bookkeeping

    def lyndon_basis(self, d):
        """Lyndon words of degree d, lexicographically sorted."""
        if not 1 <= d <= self.D:
            raise LieError(f"degree {d} outside 1..{self.D}")
        words = self._lyndon.get(d)
        if words is None:
            words = lyndon_words(self.n, d)
            self._lyndon[d] = words
            self._lyndon_index[d] = {w: i for i, w in enumerate(words)}
        return words

    def lyndon_index(self, d):
        self.lyndon_basis(d)
        return self._lyndon_index[d]

    def dim(self, d):
        return len(self.lyndon_basis(d))

    def offsets(self):
        """Flat coordinate offsets for filtered (degree <= d) vectors."""
        if self._offsets is None:
            off = [0] * (self.D + 2)
            for d in range(1, self.D + 1):
                off[d + 1] = off[d] + self.dim(d)
            self._offsets = off
        return self._offsets

    def flat_dim(self, d):
        off = self.offsets()
        return off[d + 1]

    # -- associative expansions and brackets of basis words

    def expansion(self, word):
        """Integer word-coordinates of the standard bracketing of ``word``.

        The expansion of a Lyndon word w equals w plus lexicographically
        larger words of the same degree, which drives the greedy inverse.
        """
        exp = self._expansion.get(word)
        if exp is not None:
            return exp
        if len(word) == 1:
            exp = {word: 1}
        else:
            u, v = standard_factorization(word)
            eu, ev = self.expansion(u), self.expansion(v)
            exp = {}
            for w1, c1 in eu.items():
                for w2, c2 in ev.items():
                    c = c1 * c2
                    w = w1 + w2
                    exp[w] = exp.get(w, 0) + c
                    w = w2 + w1
                    exp[w] = exp.get(w, 0) - c
            exp = {w: c for w, c in exp.items() if c}
        self._expansion[word] = exp
        return exp

    def lyndon_coords(self, table):
        """Lyndon coordinates of an associative {word: scalar} table.

        Raises NotLieElement when the table is not the expansion of a Lie
        element (checked exactly, degree by degree).
        """
        field = self.field
        buckets = {}
        for w, c in table.items():
            if not field.is_zero(c):
                buckets.setdefault(len(w), {})[w] = c
        if 0 in buckets:
            raise NotLieElement("nonzero constant term")
        coords = {}
        for d, work in buckets.items():
            while work:
                w = min(work)
                if not is_lyndon(w):
                    raise NotLieElement(f"leading word {w} is not Lyndon")
                c = work[w]
                coords[w] = c
                for word, k in self.expansion(w).items():
                    nv = field.sub(work.get(word, field.zero), field.mul(c, k))
                    if field.is_zero(nv):
                        work.pop(word, None)
                    else:
                        work[word] = nv
        return coords

    def bracket_words(self, w1, w2):
        """Lyndon coordinates of the bracket of two basis words (cached)."""
        if w1 == w2:
            return {}
        if (len(w1), w1) > (len(w2), w2):
            flip = self.bracket_words(w2, w1)
            return {w: self.field.neg(c) for w, c in flip.items()}
        key = (w1, w2)
        res = self._bracket.get(key)
        if res is not None:
            return res
        e1, e2 = self.expansion(w1), self.expansion(w2)
        prod = {}
        for a, c1 in e1.items():
            for b, c2 in e2.items():
                c = c1 * c2
                w = a + b
                prod[w] = prod.get(w, 0) + c
                w = b + a
                prod[w] = prod.get(w, 0) - c
        field = self.field
        prod = {w: field.from_int(c) for w, c in prod.items() if c}
        res = self.lyndon_coords(prod)
        self._bracket[key] = res
        return res

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return (f"AlgebraContext(n={self.n}, field={self.field!r}, "
                f"D={self.D})")


def _check_ctx(a, b):
    if a.ctx is not b.ctx:
        raise LieError("context mismatch")


class LieElement:
    """A truncated element of the free Lie algebra in Lyndon coordinates."""

    __slots__ = ("ctx", "coords")

    def __init__(self, ctx, coords=None):
        self.ctx = ctx
        clean = {}
        if coords:
            field = ctx.field
            for w, c in coords.items():
                if len(w) <= ctx.D and not field.is_zero(c):
                    clean[w] = c
        self.coords = clean

    @classmethod
    def generator(cls, ctx, i):
        if not 0 <= i < ctx.n:
            raise LieError(f"generator index {i} out of range")
        return cls(ctx, {(i,): ctx.field.one})

    @classmethod
    def zero(cls, ctx):
        return cls(ctx, {})

    @classmethod
    def from_word(cls, ctx, word, coeff=1):
        if not is_lyndon(tuple(word)):
            raise LieError(f"{word} is not a Lyndon word")
        return cls(ctx, {tuple(word): ctx.field.from_int(coeff)
                         if isinstance(coeff, int) else coeff})

    @property
    def is_zero(self):
        return not self.coords

    def degrees(self):
        return sorted({len(w) for w in self.coords})

    @property
    def min_degree(self):
        return min((len(w) for w in self.coords), default=0)

    @property
    def max_degree(self):
        return max((len(w) for w in self.coords), default=0)

    @property
    def is_homogeneous(self):
        return len({len(w) for w in self.coords}) <= 1

    def component(self, d):
        return LieElement(self.ctx, {w: c for w, c in self.coords.items()
                                     if len(w) == d})

    def component_coords(self, d):
        """Sparse coordinate vector of the degree-d component."""
        index = self.ctx.lyndon_index(d)
        return {index[w]: c for w, c in self.coords.items() if len(w) == d}

    def flat_coords(self, level=None):
        """Sparse vector in filtered coordinates of F_{<= level}."""
        level = self.ctx.D if level is None else level
        off = self.ctx.offsets()
        out = {}
        for w, c in self.coords.items():
            d = len(w)
            if d <= level:
                out[off[d] + self.ctx.lyndon_index(d)[w]] = c
        return out

    def __add__(self, other):
        _check_ctx(self, other)
        field = self.ctx.field
        out = dict(self.coords)
        for w, c in other.coords.items():
            nv = field.add(out.get(w, field.zero), c)
            if field.is_zero(nv):
                out.pop(w, None)
            else:
                out[w] = nv
        return LieElement(self.ctx, out)

    def __neg__(self):
        field = self.ctx.field
        return LieElement(self.ctx, {w: field.neg(c) for w, c in self.coords.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        field = self.ctx.field
        if field.is_zero(c):
            return LieElement.zero(self.ctx)
        return LieElement(self.ctx, {w: field.mul(c, v) for w, v in self.coords.items()})

    def bracket(self, other):
        _check_ctx(self, other)
        ctx = self.ctx
        field = ctx.field
        out = {}
        for w1, c1 in self.coords.items():
            d1 = len(w1)
            for w2, c2 in other.coords.items():
                if d1 + len(w2) > ctx.D:
                    continue
                scale = field.mul(c1, c2)
                if field.is_zero(scale):
                    continue
                for w, k in ctx.bracket_words(w1, w2).items():
                    nv = field.add(out.get(w, field.zero), field.mul(scale, k))
                    if field.is_zero(nv):
                        out.pop(w, None)
                    else:
                        out[w] = nv
        return LieElement(ctx, out)

    def apply_elementary(self, killed):
        """Image under the endomorphism killing the given generator indices.

        On the Lyndon basis this is a coordinate projection: a basis
        bracketing dies iff its word touches a killed generator.
        """
        killed = set(killed)
        return LieElement(self.ctx, {w: c for w, c in self.coords.items()
                                     if not killed.intersection(w)})

    def __eq__(self, other):
        return (isinstance(other, LieElement) and self.ctx is other.ctx
                and self.coords == other.coords)

    def __str__(self):
        if not self.coords:
            return "0"
        names = self.ctx.generators.names

        def fmt(word):
            if len(word) == 1:
                return names[word[0]]
            u, v = standard_factorization(word)
            return f"[{fmt(u)},{fmt(v)}]"

        parts = []
        for w in sorted(self.coords, key=lambda w: (len(w), w)):
            c = self.coords[w]
            parts.append(f"({c})*{fmt(w)}")
        return " + ".join(parts)

    __repr__ = __str__


def bracket(a, b):
    """The Lie bracket, re-expressed in Lyndon coordinates (truncated)."""
    return a.bracket(b)


def lie_to_assoc(a):
    """Canonical embedding of the free Lie algebra into its envelope."""
    from .envelope import AssocElement

    field = a.ctx.field
    table = {}
    for w, c in a.coords.items():
        for word, k in a.ctx.expansion(w).items():
            nv = field.add(table.get(word, field.zero), field.mul(c, k))
            if field.is_zero(nv):
                table.pop(word, None)
            else:
                table[word] = nv
    return AssocElement(a.ctx, table)


def assoc_to_lie(p):
    """Inverse of the embedding; raises NotLieElement off the image."""
    return LieElement(p.ctx, p.ctx.lyndon_coords(p.table))


# ---------------------------------------------------------------------------
# degreewise subspaces
# ---------------------------------------------------------------------------


class DegreewiseSubspace:
    """A graded subspace of F given per degree in Lyndon coordinates.

    Zero components are not stored, so equality is dict equality.  Only
    graded objects (spans of homogeneous elements) are represented here;
    filtered objects live in :class:`FilteredSubspace`.
    """

    __slots__ = ("ctx", "comps")

    def __init__(self, ctx, comps):
        self.ctx = ctx
        self.comps = {d: b for d, b in comps.items() if b.dim}

    @classmethod
    def zero(cls, ctx):
        return cls(ctx, {})

    @classmethod
    def full(cls, ctx):
        return cls(ctx, {d: SubspaceBasis.full(ctx.field, ctx.dim(d))
                         for d in range(1, ctx.D + 1)})

    @classmethod
    def from_homogeneous(cls, ctx, elements):
        accs = {}
        for e in elements:
            if e.is_zero:
                continue
            if not e.is_homogeneous:
                raise LieError("graded subspaces need homogeneous spanning sets")
            d = e.max_degree
            acc = accs.get(d)
            if acc is None:
                acc = accs[d] = EchelonAccumulator(ctx.field, ctx.dim(d))
            acc.insert(e.component_coords(d))
        return cls(ctx, {d: a.freeze() for d, a in accs.items()})

    def basis(self, d):
        b = self.comps.get(d)
        if b is None:
            return SubspaceBasis.zero(self.ctx.field, self.ctx.dim(d))
        return b

    def dim(self, d):
        b = self.comps.get(d)
        return b.dim if b else 0

    def cumulative_dim(self, d):
        return sum(self.dim(e) for e in range(1, d + 1))

    @property
    def is_zero(self):
        return not self.comps

    def min_degree(self):
        return min(self.comps, default=None)

    def elements(self, d):
        """Degree-d basis vectors as LieElements (integer coordinates)."""
        words = self.ctx.lyndon_basis(d)
        out = []
        for row in self.basis(d).int_rows():
            out.append(LieElement(self.ctx, {words[c]: v for c, v in row.items()}))
        return out

    def all_elements(self):
        out = []
        for d in sorted(self.comps):
            out.extend(self.elements(d))
        return out

    def contains(self, elem):
        for d in elem.degrees():
            if not self.basis(d).contains(elem.component_coords(d)):
                return False
        return True

    def contains_subspace(self, other):
        return all(self.basis(d).contains_subspace(b)
                   for d, b in other.comps.items())

    def sum(self, other):
        _check_same(self, other)
        from .linalg import subspace_sum
        comps = {}
        for d in set(self.comps) | set(other.comps):
            comps[d] = subspace_sum(self.basis(d), other.basis(d))
        return DegreewiseSubspace(self.ctx, comps)

    def intersect(self, other):
        _check_same(self, other)
        from .linalg import intersect
        comps = {}
        for d in set(self.comps) & set(other.comps):
            comps[d] = intersect(self.basis(d), other.basis(d))
        return DegreewiseSubspace(self.ctx, comps)

    def flat_level(self, d):
        """The degree <= d part as one SubspaceBasis in filtered coordinates."""
        off = self.ctx.offsets()
        rows, pivots = [], []
        for e in range(1, d + 1):
            b = self.comps.get(e)
            if not b:
                continue
            for piv, row in zip(b.pivots, b.rows):
                rows.append({off[e] + c: v for c, v in row.items()})
                pivots.append(off[e] + piv)
        return SubspaceBasis._raw(self.ctx.field, self.ctx.flat_dim(d),
                                  tuple(rows), tuple(pivots))

    def __eq__(self, other):
        return (isinstance(other, DegreewiseSubspace) and self.ctx is other.ctx
                and self.comps == other.comps)

    def __repr__(self):
        dims = [self.dim(d) for d in range(1, self.ctx.D + 1)]
        return f"DegreewiseSubspace(dims={dims})"


def _check_same(a, b):
    if a.ctx is not b.ctx:
        raise LieError("context mismatch")


class FilteredSubspace:
    """A filtered object: per level d, a subspace of F_{<= d} in flat coords.

    For truncated ideal closures of inhomogeneous generators the level can
    only be sandwiched between an inner (certainly contained) and an outer
    (certainly containing) span; ``conclusive[d]`` records whether the two
    agree at level d.
    """

    __slots__ = ("ctx", "outer", "inner", "conclusive")

    def __init__(self, ctx, outer, inner=None, conclusive=None):
        self.ctx = ctx
        self.outer = outer
        self.inner = inner if inner is not None else dict(outer)
        if conclusive is None:
            conclusive = {d: self.inner[d] == self.outer[d] for d in outer}
        self.conclusive = conclusive

    def level(self, d):
        return self.outer[d]

    def inner_level(self, d):
        return self.inner[d]

    def is_conclusive(self, d):
        return self.conclusive.get(d, False)


def graded_span_of_brackets(a, b):
    """Degreewise span of [a, b]: all brackets of basis elements."""
    ctx = a.ctx
    accs = {}
    degs_a = sorted(a.comps)
    degs_b = sorted(b.comps)
    for da in degs_a:
        rows_a = None
        for db in degs_b:
            d = da + db
            if d > ctx.D:
                continue
            acc = accs.get(d)
            if acc is None:
                acc = accs[d] = EchelonAccumulator(ctx.field, ctx.dim(d))
            if acc.is_full:
                continue
            if rows_a is None:
                rows_a = a.elements(da)
            rows_b = b.elements(db)
            for x in rows_a:
                if acc.is_full:
                    break
                for y in rows_b:
                    acc.insert(x.bracket(y).component_coords(d))
                    if acc.is_full:
                        break
    return DegreewiseSubspace(ctx, {d: acc.freeze() for d, acc in accs.items()})


def subalgebra_span(ctx, subset):
    """Degreewise basis of the free subalgebra on a subset of the generators.

    The degree-d component is spanned exactly by the Lyndon bracketings
    whose words use only the chosen letters.
    """
    subset = sorted(set(subset))
    if not subset:
        raise LieError("empty generator subset")
    if any(not 0 <= i < ctx.n for i in subset):
        raise LieError("generator index out of range")
    allowed = set(subset)
    comps = {}
    for d in range(1, ctx.D + 1):
        index = ctx.lyndon_index(d)
        rows = []
        pivots = []
        for w in ctx.lyndon_basis(d):
            if set(w) <= allowed:
                col = index[w]
                rows.append({col: 1})
                pivots.append(col)
        if rows:
            comps[d] = SubspaceBasis._raw(ctx.field, ctx.dim(d),
                                          tuple(rows), tuple(pivots))
    return DegreewiseSubspace(ctx, comps)


def lower_central(sub, l, verify=True):
    """The l-th power X_(l): X_(1) = X, X_(l) = [X_(l-1), X], degreewise."""
    if l < 1:
        raise LieError("power must be at least 1")
    if l == 1:
        return sub
    current = sub
    for step in range(2, l + 1):
        current = graded_span_of_brackets(current, sub)
        if step == 2 and verify and not sub.contains_subspace(current):
            raise LieError("subspace is not closed under the bracket")
    return current


def ideal_closure(ctx, generators):
    """Degreewise basis of the ideal generated by the given elements.

    Homogeneous generator sets get the graded recursion
    ``R_d = span(gens_d) + [R_{d-1}, y_i]`` (exact at every degree);
    inhomogeneous sets fall back to filtered coordinates with certified
    inner/outer sandwich levels, see :class:`FilteredSubspace`.
    """
    gens = [g for g in generators if not g.is_zero]
    if not gens:
        return DegreewiseSubspace.zero(ctx)
    if all(g.is_homogeneous for g in gens):
        return _graded_ideal(ctx, gens)
    return _filtered_ideal(ctx, gens)


def _graded_ideal(ctx, gens):
    field = ctx.field
    ys = [LieElement.generator(ctx, i) for i in range(ctx.n)]
    accs = {d: EchelonAccumulator(field, ctx.dim(d)) for d in range(1, ctx.D + 1)}
    frontier = {d: [] for d in range(1, ctx.D + 1)}
    for g in gens:
        d = g.max_degree
        if accs[d].insert(g.component_coords(d)):
            frontier[d].append(g)
    for d in range(1, ctx.D):
        words = ctx.lyndon_basis(d + 1)
        for x in frontier[d]:
            for y in ys:
                v = x.bracket(y)
                if v.is_zero:
                    continue
                if accs[d + 1].insert(v.component_coords(d + 1)):
                    frontier[d + 1].append(v)
    return DegreewiseSubspace(ctx, {d: acc.freeze() for d, acc in accs.items()})


def _filtered_ideal(ctx, gens):
    field = ctx.field
    ys = [LieElement.generator(ctx, i) for i in range(ctx.n)]
    flat_top = ctx.flat_dim(ctx.D)

    # outer: truncate everything at D, span level-by-level
    outer_acc = EchelonAccumulator(field, flat_top)
    frontier = []
    for g in gens:
        if outer_acc.insert(g.flat_coords()):
            frontier.append(g)
    while frontier:
        next_frontier = []
        for x in frontier:
            if x.min_degree >= ctx.D:
                continue
            for y in ys:
                v = x.bracket(y)
                if not v.is_zero and outer_acc.insert(v.flat_coords()):
                    next_frontier.append(v)
        frontier = next_frontier
    full_outer = outer_acc.freeze()

    # inner: the span of brackets that never lost a component to truncation
    # consists of genuine ideal elements, so its intersection with F_{<= d}
    # is certainly contained in the true level-d component
    genuine = EchelonAccumulator(field, flat_top)
    for g in gens:
        stack = [g]
        genuine.insert(g.flat_coords())
        while stack:
            x = stack.pop()
            if x.max_degree >= ctx.D:
                continue
            for y in ys:
                v = x.bracket(y)
                if not v.is_zero and genuine.insert(v.flat_coords()):
                    stack.append(v)
    genuine = genuine.freeze()

    # every true level-d element is a combination of truncated brackets
    # landing inside F_{<= d}, so cutting the outer span certifies above,
    # cutting the genuine span certifies below
    outer = _coordinate_cuts(ctx, full_outer)
    inner = _coordinate_cuts(ctx, genuine)
    return FilteredSubspace(ctx, outer, inner)


def _coordinate_cuts(ctx, span):
    """Intersections of a flat-coordinate span with every F_{<= d}."""
    from .linalg import intersect as _intersect

    field = ctx.field
    flat_top = ctx.flat_dim(ctx.D)
    out = {}
    for d in range(1, ctx.D + 1):
        cut = ctx.flat_dim(d)
        coord_rows = tuple({c: 1} for c in range(cut))
        coord_space = SubspaceBasis._raw(field, flat_top, coord_rows,
                                         tuple(range(cut)))
        meet = _intersect(span, coord_space)
        level = EchelonAccumulator(field, cut)
        for row in meet.rows:
            level.insert(dict(row), native=True)
        out[d] = level.freeze()
    return out


def free_generators(sub, verify=False):
    """Homogeneous free generators of a graded subalgebra: a basis of X/[X,X].

    Valid for bracket-closed graded subspaces (checked); freeness of the
    generated subalgebra is Shirshov's theorem.
    """
    derived = lower_central(sub, 2)
    gens = []
    for d in range(1, sub.ctx.D + 1):
        inner = derived.basis(d)
        ambient = sub.basis(d)
        words = sub.ctx.lyndon_basis(d)
        for vec in extend_basis(inner, ambient):
            gens.append(LieElement(sub.ctx, {words[c]: v for c, v in vec.items()}))
    if verify:
        span = DegreewiseSubspace.from_homogeneous(sub.ctx, gens)
        closure = span
        while True:
            grown = closure.sum(graded_span_of_brackets(closure, closure))
            if grown == closure:
                break
            closure = grown
        if closure != sub:
            raise LieError("free generator extraction failed")
    return gens


# ---------------------------------------------------------------------------
# polynilpotent series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesSpec:
    """Shape of the series: N_11 = gamma_c(F), steps (m_1, ..., m_s)."""

    base_class: int
    steps: tuple

    def __post_init__(self):
        if self.base_class < 1:
            raise LieError("base class must be at least 1")
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps or any(m < 1 for m in self.steps):
            raise LieError("steps must be a nonempty tuple of positive counts")


class SeriesContext:
    """All terms N_kl of the series, stored degreewise.

    terms[(k, l)] for 1 <= k <= s, 1 <= l <= m_k + 1, with
    N_{k, m_k + 1} = N_{k+1, 1} the identical object.
    """

    def __init__(self, ctx, spec, terms, truncation_warning):
        self.ctx = ctx
        self.spec = spec
        self.terms = terms
        self.truncation_warning = truncation_warning

    def term(self, k, l):
        return self.terms[(k, l)]

    def chain(self, k):
        m = self.spec.steps[k - 1]
        return [self.terms[(k, l)] for l in range(1, m + 2)]

    def all_terms(self):
        out = []
        for k, m in enumerate(self.spec.steps, start=1):
            for l in range(1, m + 2):
                out.append(((k, l), self.terms[(k, l)]))
        return out

    def __repr__(self):
        return (f"SeriesContext(base_class={self.spec.base_class}, "
                f"steps={self.spec.steps})")


def series_compute(ctx, spec):
    """Compute every N_kl degreewise, warning when truncation hides the tail."""
    if not isinstance(spec, SeriesSpec):
        spec = SeriesSpec(*spec)
    full = DegreewiseSubspace.full(ctx)
    n11 = lower_central(full, spec.base_class, verify=False)
    terms = {}
    head = n11
    for k, m in enumerate(spec.steps, start=1):
        terms[(k, 1)] = head
        current = head
        for l in range(2, m + 2):
            current = graded_span_of_brackets(current, head)
            terms[(k, l)] = current
        head = current
    # expected minimal degrees of the terms, to detect invisible tails
    e = spec.base_class
    for m in spec.steps:
        e = e * (m + 1)
    warning = e > ctx.D
    sctx = SeriesContext(ctx, spec, terms, warning)
    _check_series_invariants(sctx)
    return sctx


def _check_series_invariants(sctx):
    for k, m in enumerate(sctx.spec.steps, start=1):
        for l in range(1, m + 1):
            outer, inner = sctx.term(k, l), sctx.term(k, l + 1)
            if not outer.contains_subspace(inner):
                raise LieError(f"series nesting violated at N_{k}{l}")


def elementary_endo_invariance_check(sctx):
    """Stability of every term under all 2^n elementary endomorphisms."""
    ctx = sctx.ctx
    for size in range(ctx.n + 1):
        for killed in itertools.combinations(range(ctx.n), size):
            for (_, term) in sctx.all_terms():
                for d in sorted(term.comps):
                    for elem in term.elements(d):
                        if not term.contains(elem.apply_elementary(killed)):
                            return False
    return True


def random_element(ctx, rng, max_degree=None, terms=4, homogeneous=False):
    """A reproducible random element, for property tests and CLI checks."""
    max_degree = min(max_degree or ctx.D, ctx.D)
    field = ctx.field
    coords = {}
    if homogeneous:
        degrees = [rng.randint(1, max_degree)] * terms
    else:
        degrees = [rng.randint(1, max_degree) for _ in range(terms)]
    for d in degrees:
        words = ctx.lyndon_basis(d)
        w = words[rng.randrange(len(words))]
        coords[w] = field.add(coords.get(w, field.zero),
                              field.from_int(rng.randint(-3, 3)))
    return LieElement(ctx, coords)
