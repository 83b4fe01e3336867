"""Exact dense/sparse linear algebra over the ground fields.

Vectors are sparse ``{column: scalar}`` dicts (dense sequences are accepted
everywhere and converted).  Subspaces are held in canonical reduced row
echelon form so that equality of subspaces is syntactic equality of bases.

Over the rationals the stored rows are the unique primitive integer vectors
proportional to the RREF rows, and elimination is fraction-free
(cross-multiplication plus content stripping): this avoids the coefficient
blowup of naive Fraction pivoting.  Over GF(p) rows are reduced mod p, and
bulk dense reductions are routed through the numpy/numba kernels in
:mod:`liefreedom._gfkernels`.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from . import _gfkernels
from .fields import PrimeField, QQ, RationalField

# dense-kernel routing threshold: rows*cols below this stay on the sparse path
_DENSE_CUTOFF = 2048


class LinAlgError(ValueError):
    pass


def _as_sparse(vec):
    """Accept a dict or a dense sequence, return {col: value} without zeros."""
    if isinstance(vec, dict):
        return {c: v for c, v in vec.items() if v}
    return {c: v for c, v in enumerate(vec) if v}


# ---------------------------------------------------------------------------
# row engines
# ---------------------------------------------------------------------------


class _RationalRows:
    """Primitive-integer sparse rows; fraction-free reduction."""

    def __init__(self, field):
        self.field = field

    @staticmethod
    def _strip(row):
        g = 0
        for v in row.values():
            g = gcd(g, v)
            if g == 1:
                return row
        if g > 1:
            return {c: v // g for c, v in row.items()}
        return row

    def prep(self, vec):
        vec = _as_sparse(vec)
        if not vec:
            return {}
        den = 1
        for v in vec.values():
            if isinstance(v, Fraction):
                den = den * v.denominator // gcd(den, v.denominator)
        row = {}
        for c, v in vec.items():
            iv = int(v * den)
            if iv:
                row[c] = iv
        return self._strip(row)

    def reduce(self, row, basis_row, pivot):
        """Eliminate ``pivot`` from ``row`` using ``basis_row``; both integer."""
        m = row.get(pivot)
        if not m:
            return row
        pb = basis_row[pivot]
        out = {c: v * pb for c, v in row.items()}
        for c, v in basis_row.items():
            nv = out.get(c, 0) - v * m
            if nv:
                out[c] = nv
            else:
                out.pop(c, None)
        return self._strip(out)

    def normalize(self, row):
        row = self._strip(row)
        if row and row[min(row)] < 0:
            row = {c: -v for c, v in row.items()}
        return row

    def to_scalar(self, row):
        """Canonical field row: leading coefficient 1."""
        if not row:
            return {}
        lead = row[min(row)]
        return {c: Fraction(v, lead) for c, v in row.items()}


class _PrimeRows:
    """Rows over GF(p), pivot entries normalized to 1."""

    def __init__(self, field):
        self.field = field
        self.p = field.p

    def prep(self, vec):
        p = self.p
        out = {}
        for c, v in _as_sparse(vec).items():
            if isinstance(v, Fraction):
                iv = v.numerator * pow(v.denominator, p - 2, p) % p
            else:
                iv = v % p
            if iv:
                out[c] = iv
        return out

    def reduce(self, row, basis_row, pivot):
        m = row.get(pivot)
        if not m:
            return row
        p = self.p
        pb = basis_row[pivot]
        if pb != 1:
            m = m * pow(pb, p - 2, p) % p
        out = dict(row)
        for c, v in basis_row.items():
            nv = (out.get(c, 0) - v * m) % p
            if nv:
                out[c] = nv
            else:
                out.pop(c, None)
        return out

    def normalize(self, row):
        if not row:
            return row
        lead = row[min(row)]
        if lead == 1:
            return row
        inv = pow(lead, self.p - 2, self.p)
        return {c: v * inv % self.p for c, v in row.items()}

    def to_scalar(self, row):
        return dict(self.normalize(row))


def _engine(field):
    if isinstance(field, RationalField):
        return _RationalRows(field)
    if isinstance(field, PrimeField):
        return _PrimeRows(field)
    raise LinAlgError(f"unsupported field {field!r}")


# ---------------------------------------------------------------------------
# accumulation and canonical subspaces
# ---------------------------------------------------------------------------


class EchelonAccumulator:
    """Mutable echelon family used to build spans incrementally.

    Rows are kept pivot-reduced downward only; :meth:`freeze` produces the
    canonical fully reduced basis.  ``insert`` returns True when the rank
    grew, so callers can stop feeding spanning sets early once full.
    """

    def __init__(self, field, ambient_dim):
        self.field = field
        self.ambient_dim = ambient_dim
        self._eng = _engine(field)
        self._rows = {}  # pivot column -> native row

    @property
    def rank(self):
        return len(self._rows)

    @property
    def is_full(self):
        return len(self._rows) == self.ambient_dim

    def _residue(self, row):
        rows = self._rows
        eng = self._eng
        while row:
            lead = min(row)
            if lead not in rows:
                break
            row = eng.reduce(row, rows[lead], lead)
        return row

    def insert(self, vec, native=False):
        if self.is_full:
            return False
        row = vec if native else self._eng.prep(vec)
        row = self._residue(row)
        if not row:
            return False
        row = self._eng.normalize(row)
        self._rows[min(row)] = row
        return True

    def contains(self, vec, native=False):
        if self.is_full:
            return True
        row = vec if native else self._eng.prep(vec)
        return not self._residue(row)

    def residue(self, vec, native=False):
        """Reduce against the current family; empty dict means contained."""
        row = vec if native else self._eng.prep(vec)
        return self._residue(row)

    def freeze(self):
        eng = self._eng
        pivots = sorted(self._rows)
        canonical = {}
        for piv in reversed(pivots):
            row = self._rows[piv]
            # clear entries at already-canonicalized pivot columns; each
            # reduction may expose new ones further right, hence the loop
            while True:
                hits = [c for c in row if c != piv and c in canonical]
                if not hits:
                    break
                c = min(hits)
                row = eng.reduce(row, canonical[c], c)
            canonical[piv] = eng.normalize(row)
        rows = tuple(canonical[p] for p in pivots)
        return SubspaceBasis._raw(self.field, self.ambient_dim, rows, tuple(pivots))


class SubspaceBasis:
    """A subspace in canonical reduced row echelon form.

    Immutable and hashable; two instances are equal iff they describe the
    same subspace of the same ambient space.
    """

    __slots__ = ("field", "ambient_dim", "rows", "pivots", "_eng", "_hash")

    def __init__(self, field, ambient_dim, vectors=()):
        acc = EchelonAccumulator(field, ambient_dim)
        for v in vectors:
            acc.insert(v)
        frozen = acc.freeze()
        self._init_raw(field, ambient_dim, frozen.rows, frozen.pivots)

    @classmethod
    def _raw(cls, field, ambient_dim, rows, pivots):
        self = object.__new__(cls)
        self._init_raw(field, ambient_dim, rows, pivots)
        return self

    def _init_raw(self, field, ambient_dim, rows, pivots):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "pivots", pivots)
        object.__setattr__(self, "_eng", _engine(field))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("SubspaceBasis is immutable")

    # -- constructorsableto

    @classmethod
    def zero(cls, field, ambient_dim):
        return cls._raw(field, ambient_dim, (), ())

    @classmethod
    def full(cls, field, ambient_dim):
        rows = tuple({c: 1} for c in range(ambient_dim))
        return cls._raw(field, ambient_dim, rows, tuple(range(ambient_dim)))

    @classmethod
    def from_vectors(cls, field, ambient_dim, vectors):
        vectors = list(vectors)
        if (isinstance(field, PrimeField)
                and field.p <= _gfkernels.MAX_DENSE_PRIME
                and len(vectors) * max(ambient_dim, 1) >= _DENSE_CUTOFF):
            return cls._from_dense_gf(field, ambient_dim, vectors)
        return cls(field, ambient_dim, vectors)

    @classmethod
    def _from_dense_gf(cls, field, ambient_dim, vectors):
        import numpy as np

        eng = _PrimeRows(field)
        mat = np.zeros((len(vectors), ambient_dim), dtype=np.int64)
        for i, v in enumerate(vectors):
            for c, val in eng.prep(v).items():
                mat[i, c] = val
        red, piv = _gfkernels.rref_mod(mat, field.p)
        rows = []
        for i, c in enumerate(piv):
            row = {int(j): int(red[i, j]) for j in np.nonzero(red[i])[0]}
            rows.append(row)
        return cls._raw(field, ambient_dim, tuple(rows), tuple(piv))

    # -- queries

    @property
    def dim(self):
        return len(self.rows)

    @property
    def is_full(self):
        return len(self.rows) == self.ambient_dim

    @property
    def is_zero(self):
        return not self.rows

    def _residue(self, row):
        eng = self._eng
        pivots = self.pivots
        rows = self.rows
        index = {p: i for i, p in enumerate(pivots)}
        while row:
            lead = min(row)
            i = index.get(lead)
            if i is None:
                break
            row = eng.reduce(row, rows[i], lead)
        return row

    def contains(self, vec, native=False):
        if self.is_full:
            return True
        row = vec if native else self._eng.prep(vec)
        return not self._residue(row)

    def residue(self, vec, native=False):
        row = vec if native else self._eng.prep(vec)
        return self._residue(row)

    def contains_subspace(self, other):
        if self.is_full:
            return True
        return all(self.contains(r, native=True) for r in other.rows)

    def vectors(self):
        """Canonical scalar rows (leading coefficient 1)."""
        return [self._eng.to_scalar(r) for r in self.rows]

    def int_rows(self):
        """The stored native rows (primitive integer over Q, monic over GF(p))."""
        return [dict(r) for r in self.rows]

    def accumulator(self):
        """A mutable copy for further insertion."""
        acc = EchelonAccumulator(self.field, self.ambient_dim)
        for p, r in zip(self.pivots, self.rows):
            acc._rows[p] = dict(r)
        return acc

    def __eq__(self, other):
        return (isinstance(other, SubspaceBasis)
                and self.field == other.field
                and self.ambient_dim == other.ambient_dim
                and self.pivots == other.pivots
                and self.rows == other.rows)

    def __hash__(self):
        h = self._hash
        if h is None:
            key = (self.ambient_dim, self.pivots,
                   tuple(tuple(sorted(r.items())) for r in self.rows))
            h = hash(key)
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"SubspaceBasis(dim={self.dim}, ambient={self.ambient_dim})"


# ---------------------------------------------------------------------------
# matrices and the public operations
# ---------------------------------------------------------------------------


class Matrix:
    """A dense rectangular matrix of field scalars; shape fixed at creation."""

    __slots__ = ("field", "nrows", "ncols", "entries")

    def __init__(self, field, entries):
        entries = tuple(tuple(row) for row in entries)
        if entries:
            w = len(entries[0])
            if any(len(r) != w for r in entries):
                raise LinAlgError("ragged rows")
        else:
            w = 0
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "nrows", len(entries))
        object.__setattr__(self, "ncols", w)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.field == other.field
                and self.entries == other.entries)

    def __hash__(self):
        return hash(self.entries)

    def row(self, i):
        return self.entries[i]

    def __repr__(self):
        return f"Matrix({self.nrows}x{self.ncols} over {self.field!r})"


def rref(m):
    """Reduced row echelon form with leading ones; returns (Matrix, pivots).

    Row space is preserved; the zero rows are kept so the shape is unchanged.
    """
    field = m.field
    if isinstance(field, PrimeField) and field.p <= _gfkernels.MAX_DENSE_PRIME \
            and m.nrows and m.ncols:
        import numpy as np

        arr = np.array([[int(x) % field.p for x in row] for row in m.entries],
                       dtype=np.int64)
        red, piv = _gfkernels.rref_mod(arr, field.p)
        ent = [[int(x) for x in row] for row in red]
        return Matrix(field, ent), list(piv)
    eng = _engine(field)
    acc = EchelonAccumulator(field, m.ncols)
    for row in m.entries:
        acc.insert(row)
    basis = acc.freeze()
    zero = field.zero
    out = []
    for r in basis.vectors():
        dense = [zero] * m.ncols
        for c, v in r.items():
            dense[c] = v
        out.append(dense)
    while len(out) < m.nrows:
        out.append([zero] * m.ncols)
    return Matrix(field, out), list(basis.pivots)


def membership(vec, s):
    """True iff ``vec`` lies in the span of the subspace basis ``s``."""
    if not isinstance(vec, dict) and len(vec) != s.ambient_dim:
        raise LinAlgError("vector length does not match ambient dimension")
    sv = _as_sparse(vec)
    if sv and max(sv) >= s.ambient_dim:
        raise LinAlgError("vector length exceeds ambient dimension")
    return s.contains(sv)


def subspace_sum(a, b):
    if a.ambient_dim != b.ambient_dim or a.field != b.field:
        raise LinAlgError("ambient mismatch")
    if a.is_full:
        return a
    if b.is_full:
        return b
    if a.dim < b.dim:
        a, b = b, a
    acc = a.accumulator()
    for r in b.rows:
        acc.insert(r, native=True)
    return acc.freeze()


def kernel_vectors(rows, field, ambient_dim):
    """Left kernel: all c with sum_i c_i rows_i = 0, as scalar dicts.

    ``rows`` may be sparse dicts or dense rows of scalars.  The result is a
    list of canonical kernel basis vectors of length ``len(rows)``.
    """
    eng = _engine(field)
    n = len(rows)
    acc = EchelonAccumulator(field, ambient_dim + n)
    for i, r in enumerate(rows):
        # the tail marker joins before normalization so that any rescaling
        # of the row hits the recorded coefficient as well
        aug = dict(_as_sparse(r))
        aug[ambient_dim + i] = field.one
        acc.insert(aug)
    combos = []
    frozen = acc.freeze()
    for piv, row in zip(frozen.pivots, frozen.rows):
        if piv >= ambient_dim:
            combos.append({c - ambient_dim: v for c, v in row.items()})
    return [eng.to_scalar(c) for c in combos]


def intersect(a, b):
    """Canonical basis of the intersection of two subspaces.

    Kernel construction: the rows of the smaller subspace are inserted,
    augmented with coordinate-tracking tails, into an accumulator preloaded
    with the larger subspace; augmented rows whose ambient part vanished
    record exactly the combinations landing inside both spans.
    """
    if a.ambient_dim != b.ambient_dim or a.field != b.field:
        raise LinAlgError("ambient mismatch")
    if a.is_full:
        return b
    if b.is_full:
        return a
    if a.is_zero or b.is_zero:
        return SubspaceBasis.zero(a.field, a.ambient_dim)
    small, large = (a, b) if a.dim <= b.dim else (b, a)
    ambient = a.ambient_dim
    field = a.field
    acc = EchelonAccumulator(field, ambient + small.dim)
    for r in large.rows:
        acc.insert(dict(r), native=True)
    for i, r in enumerate(small.rows):
        aug = dict(r)
        aug[ambient + i] = 1
        acc.insert(aug, native=True)
    out = EchelonAccumulator(field, ambient)
    for piv, row in acc._rows.items():
        if piv < ambient:
            continue
        vec = {}
        for i_col, ci in row.items():
            for c, v in small.rows[i_col - ambient].items():
                nv = vec.get(c, 0) + ci * v
                if nv:
                    vec[c] = nv
                else:
                    vec.pop(c, None)
        out.insert(vec)
    return out.freeze()


def extend_basis(inner, ambient):
    """Vectors from ``ambient``'s canonical basis completing ``inner``.

    Raises when ``inner`` is not contained in ``ambient``.  The returned
    vectors are (copies of) canonical basis rows of ``ambient`` whenever such
    rows suffice, which they always do here since the completion is greedy.
    """
    if inner.ambient_dim != ambient.ambient_dim or inner.field != ambient.field:
        raise LinAlgError("ambient mismatch")
    if not ambient.contains_subspace(inner):
        raise LinAlgError("inner subspace not contained in ambient subspace")
    acc = inner.accumulator()
    extension = []
    for row in ambient.rows:
        if acc.insert(row, native=True):
            extension.append(dict(row))
        if acc.rank == ambient.dim:
            break
    return [ambient._eng.to_scalar(r) for r in extension]
