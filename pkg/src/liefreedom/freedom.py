"""End-to-end checkers for the freedom statements, degreewise up to D.

A presentation bundles generators, relators, the series shape, the ground
field and the truncation degree.  The two checkers certify, per series
term and per degree, the intersection identity

    H cap (R + N_kl) = H cap N_kl

either for H = <y_1, ..., y_{n-1}> and a single relator (with the weight
hypothesis r not in H + N_{1,i+1}), or for the generator subset produced
by the Jacobian cascade when there are several relators.  Every reported
equality is the literal outcome of an exact subspace computation; degrees
where truncated ideal closures cannot be certified are flagged as
inconclusive, never extrapolated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .fields import QQ
from .freelie import (
    AlgebraContext,
    DegreewiseSubspace,
    FilteredSubspace,
    LieElement,
    SeriesSpec,
    ideal_closure,
    series_compute,
    subalgebra_span,
)
from .jacobian import JacobianError, cascade, fox_matrix
from .linalg import intersect, subspace_sum
from .words import GeneratorSet

BEYOND_SERIES = "beyond series"


class FreedomError(ValueError):
    pass


class Presentation:
    """Generators, relators, series shape and truncation for the checks."""

    def __init__(self, generators, relators, series, field=QQ, degree_cap=6,
                 context=None):
        if context is not None:
            self.ctx = context
        else:
            if not isinstance(generators, GeneratorSet):
                generators = GeneratorSet(generators)
            self.ctx = AlgebraContext(generators, field, degree_cap)
        if not isinstance(series, SeriesSpec):
            series = SeriesSpec(*series)
        self.series = series
        self.relators = list(relators)
        if not self.relators:
            raise FreedomError("need at least one relator")
        if any(r.is_zero for r in self.relators):
            raise FreedomError("zero relator")
        if any(r.ctx is not self.ctx for r in self.relators):
            raise FreedomError("relator from a different context")
        self._series_ctx = None

    @property
    def n(self):
        return self.ctx.n

    @property
    def m(self):
        return len(self.relators)

    def series_context(self):
        if self._series_ctx is None:
            self._series_ctx = series_compute(self.ctx, self.series)
            n11 = self._series_ctx.term(1, 1)
            for r in self.relators:
                if not n11.contains(r):
                    raise FreedomError("relator outside N_11")
        return self._series_ctx


@dataclass
class DegreeVerdict:
    d: int
    dimA: int
    dimB: int
    equal: bool
    conclusive: bool


@dataclass
class TermReport:
    k: int
    l: int
    degrees: list

    def all_equal(self):
        return all(v.equal for v in self.degrees if v.conclusive)

    def first_inequality(self):
        for v in self.degrees:
            if v.conclusive and not v.equal:
                return v.d
        return None


@dataclass
class CheckReport:
    mode: str
    hypotheses: list
    chosen_subset: list
    per_term: list
    verified_up_to: int
    warnings: list = field(default_factory=list)

    def hypothesis_holds(self):
        return all(h["holds"] for h in self.hypotheses)

    def all_equal(self):
        return all(t.all_equal() for t in self.per_term)

    def inconclusive_count(self):
        return sum(1 for t in self.per_term for v in t.degrees if not v.conclusive)

    @property
    def passed(self):
        return self.hypothesis_holds() and self.all_equal()

    def to_json_dict(self):
        return {
            "mode": self.mode,
            "hypotheses": self.hypotheses,
            "subset": self.chosen_subset,
            "terms": [
                {
                    "k": t.k,
                    "l": t.l,
                    "degrees": [
                        {"d": v.d, "dimA": v.dimA, "dimB": v.dimB,
                         "equal": v.equal, "conclusive": v.conclusive}
                        for v in t.degrees
                    ],
                }
                for t in self.per_term
            ],
            "verified_up_to": self.verified_up_to,
            "warnings": list(self.warnings),
        }


def relator_weight(r, sctx):
    """The unique i with r in N_{1i} minus N_{1,i+1}, within the first block."""
    if not sctx.term(1, 1).contains(r):
        raise FreedomError("relator outside N_11")
    m1 = sctx.spec.steps[0]
    weight = 1
    for l in range(2, m1 + 2):
        if sctx.term(1, l).contains(r):
            weight = l
        else:
            break
    if weight == m1 + 1:
        return BEYOND_SERIES
    return weight


def intersection_oracle(H, R, N_kl, d):
    """(dim, dim, equal) for H cap (R + N_kl) vs H cap N_kl at level <= d.

    The dimensions are cumulative over degrees 1..d.  With a filtered R the
    result carries a fourth component, the conclusiveness flag of the
    inner/outer sandwich at this level.
    """
    if isinstance(R, FilteredSubspace):
        v = _filtered_oracle_level(H, R, N_kl, d)
        return v.dimA, v.dimB, v.equal
    verdicts = _oracle_sweep(H, R, N_kl, d)
    dimA = sum(v[0] for v in verdicts)
    dimB = sum(v[1] for v in verdicts)
    equal = all(v[2] for v in verdicts)
    return dimA, dimB, equal


def _oracle_sweep(H, R, N_kl, up_to):
    """Graded per-degree (dimA_e, dimB_e, equal_e) rows for e = 1..up_to."""
    if isinstance(R, FilteredSubspace):
        raise FreedomError("graded sweep on a filtered ideal")
    out = []
    for e in range(1, up_to + 1):
        h = H.basis(e)
        n = N_kl.basis(e)
        a = intersect(h, subspace_sum(R.basis(e), n))
        b = intersect(h, n)
        out.append((a.dim, b.dim, a == b))
    return out


def _filtered_oracle_level(H, R, N_kl, d):
    h = H.flat_level(d)
    n = N_kl.flat_level(d)
    outer = intersect(h, subspace_sum(R.level(d), n))
    inner = intersect(h, subspace_sum(R.inner_level(d), n))
    b = intersect(h, n)
    equal = outer == b
    conclusive = equal or inner != b
    return DegreeVerdict(d, outer.dim, b.dim, equal, conclusive)


def _term_report(H, R, N_kl, k, l, D):
    if isinstance(R, FilteredSubspace):
        degrees = [_filtered_oracle_level(H, R, N_kl, d) for d in range(1, D + 1)]
        return TermReport(k, l, degrees)
    rows = _oracle_sweep(H, R, N_kl, D)
    degrees = []
    dimA = dimB = 0
    equal = True
    for d, (a, b, eq) in enumerate(rows, start=1):
        dimA += a
        dimB += b
        equal = equal and eq
        degrees.append(DegreeVerdict(d, dimA, dimB, equal, True))
    return TermReport(k, l, degrees)


def _series_warnings(sctx):
    out = []
    if sctx.truncation_warning:
        out.append("truncation cannot distinguish the final series term")
    return out


def theorem1_check(p, subset=None):
    """The one-relator check for H generated by all but the last generator.

    Reports the weight hypothesis and the full per-term, per-degree
    intersection table, so both directions of the statement are visible in
    the output; the converse direction is reported, never asserted.
    """
    ctx = p.ctx
    if ctx.n <= 2:
        raise FreedomError("the one-relator check needs more than two generators")
    if p.m != 1:
        raise FreedomError("the one-relator check takes exactly one relator")
    sctx = p.series_context()
    r = p.relators[0]
    subset = list(range(ctx.n - 1)) if subset is None else sorted(subset)
    H = subalgebra_span(ctx, subset)

    hypotheses = []
    weight = relator_weight(r, sctx)
    if weight == BEYOND_SERIES:
        hypotheses.append({
            "name": "relator-weight",
            "holds": False,
            "details": "relator lies in the last term of the first block",
        })
        hypotheses.append({"name": "outside-H-plus-next-term", "holds": False,
                           "details": "not applicable beyond the series"})
    else:
        hypotheses.append({"name": "relator-weight", "holds": True,
                           "details": f"weight {weight}"})
        next_term = sctx.term(1, weight + 1)
        blocked = H.sum(next_term)
        outside = not blocked.contains(r)
        hypotheses.append({
            "name": "outside-H-plus-next-term",
            "holds": outside,
            "details": f"r {'outside' if outside else 'inside'} "
                       f"H + N(1,{weight + 1})",
        })

    R = ideal_closure(ctx, [r])
    per_term = [_term_report(H, R, term, k, l, ctx.D)
                for (k, l), term in sctx.all_terms()]
    warnings = _series_warnings(sctx)
    report = CheckReport("theorem1", hypotheses,
                         [ctx.generators.names[i] for i in subset],
                         per_term, ctx.D, warnings)
    if not report.hypothesis_holds():
        first = None
        for t in per_term:
            d = t.first_inequality()
            if d is not None:
                first = (t.k, t.l, d)
                break
        if first is not None:
            report.warnings.append(
                f"inequality first witnessed at term ({first[0]},{first[1]}) "
                f"degree {first[2]}")
    inconclusive = report.inconclusive_count()
    if inconclusive:
        report.warnings.append(
            f"{inconclusive} term/degree cells inconclusive near the truncation")
    return report


def theorem2_check(p):
    """The several-relator check with the cascade-selected generator subset.

    Falls back to exhaustive subset search (over subsets of size n - m,
    then larger) when the cascade runs out of truncation room; the report
    records which path chose the subset.
    """
    ctx = p.ctx
    if p.m >= ctx.n:
        raise FreedomError("need fewer relators than generators")
    sctx = p.series_context()
    R = ideal_closure(ctx, p.relators)

    hypotheses = [{"name": "relator-count", "holds": True,
                   "details": f"m = {p.m} < n = {ctx.n}"}]
    warnings = _series_warnings(sctx)
    subset = None
    path = None
    try:
        m = fox_matrix(p.relators)
        result = cascade(m, sctx)
        subset = result.complement
        path = "cascade"
        hypotheses.append({
            "name": "complement-size",
            "holds": len(subset) >= ctx.n - p.m,
            "details": f"p = {len(subset)} >= n - m = {ctx.n - p.m}; "
                       f"ranks {dict(sorted(result.ranks.items()))}",
        })
    except JacobianError as exc:
        warnings.append(f"cascade failed: {exc}; exhaustive fallback used")
        subset = _exhaustive_subset(ctx, sctx, R, ctx.n - p.m)
        path = "exhaustive"
        hypotheses.append({
            "name": "complement-size",
            "holds": subset is not None and len(subset) >= ctx.n - p.m,
            "details": "exhaustive search" if subset is not None
                       else "no subset of size n - m passed",
        })
        if subset is None:
            subset = list(range(ctx.n - p.m))

    H = subalgebra_span(ctx, subset)
    per_term = [_term_report(H, R, term, k, l, ctx.D)
                for (k, l), term in sctx.all_terms()]
    warnings.append(f"subset chosen by {path}")
    report = CheckReport("theorem2", hypotheses,
                         [ctx.generators.names[i] for i in subset],
                         per_term, ctx.D, warnings)
    inconclusive = report.inconclusive_count()
    if inconclusive:
        report.warnings.append(
            f"{inconclusive} term/degree cells inconclusive near the truncation")
    return report


def _exhaustive_subset(ctx, sctx, R, size):
    """First generator subset (by size, then lexicographic) passing the oracle."""
    for count in range(size, ctx.n):
        for subset in itertools.combinations(range(ctx.n), count):
            H = subalgebra_span(ctx, list(subset))
            if _subset_passes(H, R, sctx, ctx.D):
                return list(subset)
    return None


def _subset_passes(H, R, sctx, D):
    for _, term in sctx.all_terms():
        report = _term_report(H, R, term, 0, 0, D)
        if not report.all_equal():
            return False
    return True
