"""Relator Jacobians over the truncated envelope and their triangularization.

The matrix of Fox derivatives of the relators is transformed by the four
elementary operations (column swap, row swap, right row scaling, adding a
right multiple of an earlier row) into triangular shape modulo a quotient
context, with pivots chosen by minimal valuation.  Eliminations obtain the
required right multiples by solving the congruence a*c = b*d degreewise in
the quotient normal form; the full transformation log is kept so results
can be replayed and audited.

All quotient arithmetic happens on U(F) representatives: switching the
quotient just switches the chain of ideals in the context.
"""

from __future__ import annotations

from dataclasses import dataclass

from .envelope import (
    AssocElement,
    QuotientContext,
    fox_derivative,
    mul,
    psi_leq,
)
from .freelie import lie_to_assoc
from .linalg import kernel_vectors


class JacobianError(ValueError):
    pass


class OreSearchError(JacobianError):
    """No solution inside the degree bound; widen the truncation."""


class TruncationError(JacobianError):
    """Every pivot candidate has sentinel valuation; the context is too deep."""


# ---------------------------------------------------------------------------
# elementary transformations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnSwap:
    i: int
    j: int


@dataclass(frozen=True)
class RowSwap:
    i: int
    j: int


@dataclass(frozen=True)
class RowScale:
    """Right-multiply row i by c."""

    i: int
    c: AssocElement


@dataclass(frozen=True)
class RowAdd:
    """Add row src, right-multiplied by c, to row dst; requires src < dst."""

    src: int
    dst: int
    c: AssocElement


class RelatorMatrix:
    """A matrix of envelope elements with its transformation log."""

    __slots__ = ("ctx", "nrows", "ncols", "entries", "log")

    def __init__(self, ctx, entries, log=()):
        entries = tuple(tuple(row) for row in entries)
        if not entries or not entries[0]:
            raise JacobianError("empty matrix")
        width = len(entries[0])
        if any(len(r) != width for r in entries):
            raise JacobianError("ragged rows")
        self.ctx = ctx
        self.nrows = len(entries)
        self.ncols = width
        self.entries = entries
        self.log = tuple(log)

    def entry(self, i, j):
        return self.entries[i][j]

    def row(self, i):
        return self.entries[i]

    def column_permutation(self):
        """perm[pos] = index of the original column now sitting at pos."""
        perm = list(range(self.ncols))
        for t in self.log:
            if isinstance(t, ColumnSwap):
                perm[t.i], perm[t.j] = perm[t.j], perm[t.i]
        return perm

    def strip_log(self):
        return RelatorMatrix(self.ctx, self.entries)

    def __eq__(self, other):
        return (isinstance(other, RelatorMatrix) and self.ctx is other.ctx
                and self.entries == other.entries)

    def __repr__(self):
        return f"RelatorMatrix({self.nrows}x{self.ncols}, log={len(self.log)})"


def fox_matrix(relators):
    """The Jacobian: entry (i, j) is D_j of the i-th relator."""
    if not relators:
        raise JacobianError("need at least one relator")
    ctx = relators[0].ctx
    rows = []
    for r in relators:
        if r.is_zero:
            raise JacobianError("zero relator")
        ra = lie_to_assoc(r)
        rows.append([fox_derivative(ra, j) for j in range(ctx.n)])
    return RelatorMatrix(ctx, rows)


def _nonzero(u, qctx):
    if qctx is None:
        return not u.is_zero
    return not qctx.is_zero_deep(u)


def apply_transform(m, t, qctx=None):
    """Apply one elementary transformation, appending it to the log.

    Scaling and row addition multiply on the right; their multipliers must
    be nonzero (modulo the working ideal when a context is given), and row
    addition only adds an earlier row to a later one.
    """
    rows = [list(r) for r in m.entries]
    if isinstance(t, ColumnSwap):
        if not (0 <= t.i < m.ncols and 0 <= t.j < m.ncols):
            raise JacobianError("column index out of range")
        for r in rows:
            r[t.i], r[t.j] = r[t.j], r[t.i]
    elif isinstance(t, RowSwap):
        if not (0 <= t.i < m.nrows and 0 <= t.j < m.nrows):
            raise JacobianError("row index out of range")
        rows[t.i], rows[t.j] = rows[t.j], rows[t.i]
    elif isinstance(t, RowScale):
        if not 0 <= t.i < m.nrows:
            raise JacobianError("row index out of range")
        if not _nonzero(t.c, qctx):
            raise JacobianError("scaling by zero")
        rows[t.i] = [mul(e, t.c) for e in rows[t.i]]
    elif isinstance(t, RowAdd):
        if not (0 <= t.src < m.nrows and 0 <= t.dst < m.nrows):
            raise JacobianError("row index out of range")
        if t.src >= t.dst:
            raise JacobianError("row addition requires src < dst")
        if not _nonzero(t.c, qctx):
            raise JacobianError("adding a zero multiple")
        rows[t.dst] = [e + mul(s, t.c) for e, s in zip(rows[t.dst], rows[t.src])]
    else:
        raise JacobianError(f"unknown transform {t!r}")
    return RelatorMatrix(m.ctx, rows, m.log + (t,))


def replay(base, log, qctx=None):
    """Re-apply a log to a log-free matrix; the determinism oracle."""
    m = base.strip_log()
    for t in log:
        m = apply_transform(m, t, qctx)
    return m


# ---------------------------------------------------------------------------
# Ore right multiples and right division in the quotient
# ---------------------------------------------------------------------------


def _lift_combo(qa, monomials, coeffs):
    out = AssocElement.zero(qa.ctx)
    for i, c in coeffs.items():
        if not qa.ctx.field.is_zero(c):
            out = out + qa.lift_mono(monomials[i]).scale(c)
    return out


def _nf_scale_mul(qa, table, mono, coeff, out, sign):
    """out += sign * coeff * table * mono, all in normal-form coordinates."""
    field = qa.ctx.field
    for m1, c1 in table.items():
        for m2, c2 in qa.mono_mul(m1, mono).items():
            value = field.mul(field.mul(c1, coeff), c2)
            if sign < 0:
                value = field.neg(value)
            prev = out.get(m2, field.zero)
            total = field.add(prev, value)
            if field.is_zero(total):
                out.pop(m2, None)
            else:
                out[m2] = total


def right_divide(a, b, qctx, degree_bound=None):
    """A quotient q with a*q = b modulo the working ideal, or None.

    Solved layer by layer in the graded normal form: the lowest homogeneous
    part of a pins down each degree slice of q (left multiplication is
    injective on the graded quotient), so a failing layer is an exact
    no-divide verdict and costs only one small homogeneous system.
    """
    qa = qctx.algebra
    ctx = qctx.ctx
    field = ctx.field
    nf_b = qa.nf(b)
    if not nf_b:
        return AssocElement.zero(ctx)
    nf_a = qa.nf(a)
    if not nf_a:
        return None
    alpha = min(qa.mono_degree(m) for m in nf_a)
    a_low = {m: c for m, c in nf_a.items() if qa.mono_degree(m) == alpha}
    beta = min(qa.mono_degree(m) for m in nf_b)
    if beta < alpha:
        return None
    bound = ctx.D if degree_bound is None else min(degree_bound, ctx.D)
    residual = dict(nf_b)
    q_table = {}
    for e in range(beta - alpha, min(bound, ctx.D - alpha) + 1):
        target_deg = alpha + e
        rhs = {m: c for m, c in residual.items()
               if qa.mono_degree(m) == target_deg}
        if not rhs:
            continue
        monos = qa.monomials_of_degree(e)
        if not monos:
            return None
        index = {}
        rows = []
        for m in monos:
            vec = {}
            for m2, c2 in _mul_low(qa, a_low, m).items():
                vec[index.setdefault(m2, len(index))] = c2
            rows.append(vec)
        target_vec = {}
        for m2, c2 in rhs.items():
            target_vec[index.setdefault(m2, len(index))] = field.neg(c2)
        rows.append(target_vec)
        solved = None
        for combo in kernel_vectors(rows, field, len(index)):
            scale = combo.get(len(monos))
            if scale is None or field.is_zero(scale):
                continue
            inv = field.invert(scale)
            solved = {monos[i]: field.mul(inv, c)
                      for i, c in combo.items() if i < len(monos)}
            break
        if solved is None:
            return None
        for m, c in solved.items():
            if field.is_zero(c):
                continue
            prev = q_table.get(m, field.zero)
            q_table[m] = field.add(prev, c)
            _nf_scale_mul(qa, nf_a, m, c, residual, -1)
    if residual:
        return None
    q = qa.lift(q_table)
    if not qctx.is_zero_deep(mul(a, q) - b):
        return None
    return q


def _mul_low(qa, table, mono):
    field = qa.ctx.field
    out = {}
    for m1, c1 in table.items():
        for m2, c2 in qa.mono_mul(m1, mono).items():
            prev = out.get(m2, field.zero)
            total = field.add(prev, field.mul(c1, c2))
            if field.is_zero(total):
                out.pop(m2, None)
            else:
                out[m2] = total
    return out


def ore_right_multiple(a, b, qctx, degree_bound=None):
    """Nonzero beta1, beta2 with a*beta1 = b*beta2 modulo the working ideal.

    Unknowns range over quotient normal-form monomials of increasing
    degree; the first kernel combination with both sides nonzero wins, so
    the result is deterministic.  Raises :class:`OreSearchError` when the
    bound is exhausted.
    """
    qa = qctx.algebra
    ctx = qctx.ctx
    field = ctx.field
    nf_a, nf_b = qa.nf(a), qa.nf(b)
    if not nf_a or not nf_b:
        raise JacobianError("Ore multiples need both sides nonzero")
    bound = ctx.D if degree_bound is None else min(degree_bound, ctx.D)
    monos = []
    rows_a = []
    rows_b = []
    index = {}
    for g in range(bound + 1):
        for m in qa.monomials_of_degree(g):
            monos.append(m)
            vec = {}
            for m2, c in _mul_low(qa, nf_a, m).items():
                vec[index.setdefault(m2, len(index))] = c
            rows_a.append(vec)
            vec = {}
            for m2, c in _mul_low(qa, nf_b, m).items():
                vec[index.setdefault(m2, len(index))] = field.neg(c)
            rows_b.append(vec)
        k = len(monos)
        combos = kernel_vectors(rows_a + rows_b, field, len(index))

        def build(combo):
            beta1 = _lift_combo(qa, monos,
                                {i: c for i, c in combo.items() if i < k})
            beta2 = _lift_combo(qa, monos,
                                {i - k: c for i, c in combo.items() if i >= k})
            return beta1, beta2

        candidates = list(combos)
        trial_order = [(i, i) for i in range(len(candidates))]
        trial_order += [(i, j) for i in range(len(candidates))
                        for j in range(i + 1, len(candidates))]
        for c1, c2 in trial_order:
            if c1 == c2:
                combo = candidates[c1]
            else:
                combo = dict(candidates[c1])
                for i, v in candidates[c2].items():
                    combo[i] = field.add(combo.get(i, field.zero), v)
            beta1, beta2 = build(combo)
            if qctx.is_zero_deep(beta1) or qctx.is_zero_deep(beta2):
                continue
            if not qctx.is_zero_deep(mul(a, beta1) - mul(b, beta2)):
                continue
            return beta1, beta2
    raise OreSearchError(
        f"no Ore right multiple within degree bound {bound}")


# ---------------------------------------------------------------------------
# triangular form
# ---------------------------------------------------------------------------


@dataclass
class TriangularizationResult:
    matrix: RelatorMatrix
    rank: int
    pivot_columns: list
    log: tuple

    def __repr__(self):
        return (f"TriangularizationResult(rank={self.rank}, "
                f"pivots={self.pivot_columns})")


def is_triangular_rank(m, qctx, t):
    """Check the triangular-of-rank-t shape modulo the working ideal."""
    if t > min(m.nrows, m.ncols):
        return False
    for k in range(t):
        if qctx.is_zero_deep(m.entry(k, k)):
            return False
        for n in range(k):
            if not qctx.is_zero_deep(m.entry(k, n)):
                return False
    for k in range(t, m.nrows):
        if any(not qctx.is_zero_deep(e) for e in m.row(k)):
            return False
    return True


def _eliminate_below(m, qctx, pivot_row, col, rows, degree_bound):
    """Zero the given column in the given rows using the pivot row."""
    for t in rows:
        x = m.entry(t, col)
        if qctx.is_zero_deep(x):
            continue
        pivot = m.entry(pivot_row, col)
        q = right_divide(pivot, x, qctx, degree_bound=degree_bound)
        if q is not None and not qctx.is_zero_deep(q):
            m = apply_transform(m, RowAdd(pivot_row, t, -q), qctx)
        else:
            beta1, beta2 = ore_right_multiple(pivot, -x, qctx, degree_bound)
            m = apply_transform(m, RowScale(t, beta2), qctx)
            m = apply_transform(m, RowAdd(pivot_row, t, beta1), qctx)
        if not qctx.is_zero_deep(m.entry(t, col)):
            raise JacobianError("elimination failed to clear the entry")
    return m


def _lemma5_pass(m, qctx, row_limit, degree_bound):
    """Restricted-mode pass: rows below the diagonal cleared with (40)/(41).

    Requires the solvable-quotient image of the first ``row_limit`` rows to
    be triangular with nonzero diagonal; proceeds row by row, clearing
    below-diagonal entries against the rows above.
    """
    for k in range(min(row_limit, m.ncols)):
        if qctx.is_zero_solvable(m.entry(k, k)):
            raise JacobianError(
                "restricted mode requires a nonzero solvable-quotient diagonal")
        for n in range(k):
            if not qctx.is_zero_solvable(m.entry(k, n)):
                raise JacobianError(
                    "restricted mode requires a triangular solvable-quotient image")
    for t in range(1, row_limit):
        for col in range(min(t, m.ncols)):
            m = _eliminate_below(m, qctx, col, col, [t], degree_bound)
    return m


def triangularize(m, qctx, mode="full", degree_bound=None):
    """Bring the matrix to triangular shape modulo the working ideal.

    In restricted mode only right scaling and row addition are used and
    the solvable-quotient image must already be triangular; in full mode
    row/column swaps move a minimal-valuation entry into each pivot
    position first (ties: smallest column, then smallest row).
    """
    degree_bound = m.ctx.D if degree_bound is None else degree_bound
    if mode == "restricted":
        m = _lemma5_pass(m, qctx, m.nrows, degree_bound)
        rank = sum(1 for k in range(min(m.nrows, m.ncols))
                   if not qctx.is_zero_deep(m.entry(k, k)))
        if not is_triangular_rank(m, qctx, rank):
            raise JacobianError("restricted pass failed to reach triangular shape")
        perm = m.column_permutation()
        return TriangularizationResult(m, rank, [perm[i] for i in range(rank)], m.log)
    if mode != "full":
        raise JacobianError(f"unknown mode {mode!r}")
    return _full_triangularize(m, qctx, 0, degree_bound)


def _full_triangularize(m, qctx, start, degree_bound):
    pos = start
    while pos < min(m.nrows, m.ncols):
        candidates = []
        for i in range(pos, m.nrows):
            for j in range(pos, m.ncols):
                e = m.entry(i, j)
                if not qctx.is_zero_deep(e):
                    candidates.append((i, j, qctx.psi(e)))
        if not candidates:
            break
        if all(val.is_sentinel for _, _, val in candidates):
            raise TruncationError(
                "all pivot candidates have sentinel valuation")
        i, j, _ = min(candidates, key=lambda c: (c[2].pivot_key(), c[1], c[0]))
        if j != pos:
            m = apply_transform(m, ColumnSwap(pos, j), qctx)
        if i != pos:
            m = apply_transform(m, RowSwap(pos, i), qctx)
        m = _eliminate_below(m, qctx, pos, pos, range(pos + 1, m.nrows),
                             degree_bound)
        pos += 1
    rank = pos
    if not is_triangular_rank(m, qctx, rank):
        raise JacobianError("triangularization failed its own shape check")
    perm = m.column_permutation()
    return TriangularizationResult(m, rank, [perm[i] for i in range(rank)], m.log)


def psi_dominance_report(result, qctx):
    """Sweep psi(b_kk) <= psi(b_kn); returns (holds, checked, skipped)."""
    m = result.matrix
    holds, checked, skipped = True, 0, 0
    for k in range(result.rank):
        diag = qctx.psi(m.entry(k, k))
        for n in range(m.ncols):
            verdict = psi_leq(diag, qctx.psi(m.entry(k, n)))
            if verdict is None:
                skipped += 1
            else:
                checked += 1
                holds = holds and verdict
    return holds, checked, skipped


def row_space_witness(original, result, row_index, qctx, degree_bound=None):
    """A nonzero d with (permuted original row) * d in the result's row space.

    Walks the transformation log: swaps permute the combination, a row
    addition is inverted exactly, and only a right scaling can force a
    common-multiple step (exact division is tried first), which multiplies
    every coefficient and d itself.  Returns (d, coefficients) with the
    right linear combination of the result's rows; the identity is
    re-verified modulo the working ideal before returning.
    """
    ctx = original.ctx
    one = AssocElement.one(ctx)
    zero = AssocElement.zero(ctx)
    coeffs = [zero] * original.nrows
    coeffs[row_index] = one
    d_total = one
    for t in result.matrix.log:
        if isinstance(t, ColumnSwap):
            continue
        if isinstance(t, RowSwap):
            coeffs[t.i], coeffs[t.j] = coeffs[t.j], coeffs[t.i]
            continue
        if isinstance(t, RowAdd):
            # new_dst = dst + src*c, so old src coefficient loses c * b_dst
            coeffs[t.src] = coeffs[t.src] - mul(t.c, coeffs[t.dst])
            continue
        if isinstance(t, RowScale):
            b = coeffs[t.i]
            if qctx.is_zero_deep(b):
                coeffs[t.i] = zero
                continue
            q = right_divide(t.c, b, qctx, degree_bound=degree_bound)
            if q is not None:
                coeffs[t.i] = q
                continue
            c, dd = ore_right_multiple(t.c, b, qctx, degree_bound)
            coeffs = [mul(x, dd) for x in coeffs]
            coeffs[t.i] = c
            d_total = mul(d_total, dd)
            continue
        raise JacobianError(f"unknown transform {t!r}")
    perm = result.matrix.column_permutation()
    for j in range(original.ncols):
        total = mul(original.entry(row_index, perm[j]), d_total)
        for i, c in enumerate(coeffs):
            total = total - mul(result.matrix.entry(i, j), c)
        if not qctx.is_zero_deep(total):
            raise OreSearchError(
                "row-space witness left the truncation window")
    if qctx.is_zero_deep(d_total):
        raise OreSearchError("row-space witness multiplier vanished")
    return d_total, coeffs


# ---------------------------------------------------------------------------
# the rank cascade over the series
# ---------------------------------------------------------------------------


@dataclass
class CascadeResult:
    stages: dict            # k -> TriangularizationResult
    ranks: dict             # k -> t_k
    first_nonzero: int      # K, or None when every rank is zero
    pivot_columns: list     # I_s in original column indices
    complement: list        # the generator indices outside I_s
    matrix: RelatorMatrix   # final transformed matrix


def stage_context(sctx, k):
    """The quotient context of stage k: the chain of block k, or N_11 alone."""
    if k == 0:
        n11 = sctx.term(1, 1)
        return QuotientContext(sctx.ctx, [n11], check_nesting=False)
    return QuotientContext.from_series(sctx, k)


def _relators_in_deepest_term(m, sctx):
    """True when every row reassembles to a relator inside N_{s, m_s + 1}."""
    from .freelie import NotLieElement, assoc_to_lie

    deepest = sctx.term(len(sctx.spec.steps), sctx.spec.steps[-1] + 1)
    for i in range(m.nrows):
        total = AssocElement.zero(m.ctx)
        for j in range(m.ncols):
            total = total + mul(AssocElement.generator(m.ctx, j), m.entry(i, j))
        try:
            relator = assoc_to_lie(total)
        except NotLieElement:
            return False
        if not deepest.contains(relator):
            return False
    return True


def cascade(m, sctx, degree_bound=None):
    """Refine a triangularization through the series quotients.

    Walks the quotient contexts from the shallow end: the first stage with
    nonzero rank is triangularized in full mode, each deeper stage first
    re-runs the restricted pass on the rows already pivoted, then clears
    their columns below, then triangularizes the remaining block.  Returns
    the pivot columns of the original matrix and their complement, which
    is the generator subset the freedom check uses.
    """
    if m.nrows >= m.ncols:
        raise JacobianError("cascade needs fewer relators than generators")
    s = len(sctx.spec.steps)
    if _relators_in_deepest_term(m, sctx):
        # R + N_kl = N_kl for every term: any generator subset works, so no
        # pivots are selected and every rank is reported as zero
        return CascadeResult({}, {k: 0 for k in range(s + 1)}, None, [],
                             list(range(m.ncols)), m)
    stages = {}
    ranks = {}
    first = None
    current = None
    rank = 0
    for k in range(0, s + 1):
        qctx = stage_context(sctx, k)
        if first is None:
            result = _full_triangularize(m.strip_log() if m.log else m,
                                         qctx, 0, degree_bound or m.ctx.D)
            stages[k] = result
            ranks[k] = result.rank
            if result.rank > 0:
                first = k
                current = result.matrix
                rank = result.rank
            continue
        bound = degree_bound or m.ctx.D
        current = _lemma5_pass(current, qctx, rank, bound)
        for col in range(min(rank, current.ncols)):
            current = _eliminate_below(current, qctx, col, col,
                                       range(rank, current.nrows), bound)
        result = _full_triangularize(current, qctx, rank, bound)
        stages[k] = result
        ranks[k] = result.rank
        if result.rank < rank:
            raise JacobianError("cascade rank decreased")
        current = result.matrix
        rank = result.rank
    if first is None:
        return CascadeResult(stages, ranks, None, [],
                             list(range(m.ncols)), m)
    final = stages[s]
    perm = final.matrix.column_permutation()
    pivots = [perm[i] for i in range(final.rank)]
    complement = sorted(set(range(m.ncols)) - set(pivots))
    return CascadeResult(stages, ranks, first, pivots, complement, final.matrix)
