"""Presentation checks: relator weights, the oracle, both theorem checkers."""

import pytest

from liefreedom.fields import QQ
from liefreedom.freedom import (
    BEYOND_SERIES,
    FreedomError,
    Presentation,
    intersection_oracle,
    relator_weight,
    theorem1_check,
    theorem2_check,
)
from liefreedom.freelie import (
    AlgebraContext,
    DegreewiseSubspace,
    LieElement,
    SeriesSpec,
    ideal_closure,
    lower_central,
    series_compute,
    subalgebra_span,
)


def gamma(ctx, k):
    return lower_central(DegreewiseSubspace.full(ctx), k, verify=False)


@pytest.fixture(scope="module")
def ctx():
    return AlgebraContext(3, QQ, 5)


@pytest.fixture(scope="module")
def sctx(ctx):
    return series_compute(ctx, SeriesSpec(1, (3, 2)))


def test_relator_weight_examples(ctx, sctx):
    r = LieElement.from_word(ctx, (0, 2))
    assert relator_weight(r, sctx) == 2
    assert relator_weight(LieElement.generator(ctx, 0), sctx) == 1
    deep = LieElement.from_word(ctx, (0, 0, 0, 1))  # inside gamma_4
    assert relator_weight(deep, sctx) == BEYOND_SERIES


def test_relator_weight_requires_membership():
    ctx = AlgebraContext(3, QQ, 4)
    sctx = series_compute(ctx, SeriesSpec(2, (2,)))
    with pytest.raises(FreedomError):
        relator_weight(LieElement.generator(ctx, 0), sctx)


def test_intersection_oracle_trivial_cases(ctx, sctx):
    H = subalgebra_span(ctx, [0, 1])
    zero = DegreewiseSubspace.zero(ctx)
    g3 = sctx.term(1, 3)
    dimA, dimB, equal = intersection_oracle(H, zero, g3, 4)
    assert equal and dimA == dimB
    # R inside N_kl is absorbed
    r_deep = ideal_closure(ctx, [LieElement.from_word(ctx, (0, 0, 1))])
    dimA, dimB, equal = intersection_oracle(H, r_deep, sctx.term(1, 2), 4)
    assert equal


def test_intersection_oracle_detects_inequality(ctx, sctx):
    # r = [y1, y2] lies in H, so H cap (R + gamma_3) grows at degree 2
    H = subalgebra_span(ctx, [0, 1])
    R = ideal_closure(ctx, [LieElement.from_word(ctx, (0, 1))])
    g3 = sctx.term(1, 3)
    dimA, dimB, equal = intersection_oracle(H, R, g3, 2)
    assert dimA == 1 and dimB == 0 and not equal


def test_intersection_oracle_monotone_dims(ctx, sctx):
    H = subalgebra_span(ctx, [0, 1])
    R = ideal_closure(ctx, [LieElement.from_word(ctx, (0, 2))])
    dims = [intersection_oracle(H, R, sctx.term(1, 2), d)[:2] for d in range(1, 6)]
    for (a1, b1), (a2, b2) in zip(dims, dims[1:]):
        assert a2 >= a1 and b2 >= b1


def test_theorem1_positive_instance(ctx):
    p = Presentation(ctx.generators, [LieElement.from_word(ctx, (0, 2))],
                     SeriesSpec(1, (3, 2)), context=ctx)
    report = theorem1_check(p)
    assert report.hypothesis_holds()
    assert report.all_equal()
    assert report.passed
    assert report.chosen_subset == ["y1", "y2"]
    assert report.inconclusive_count() == 0


def test_theorem1_negative_instance(ctx):
    p = Presentation(ctx.generators, [LieElement.from_word(ctx, (0, 1))],
                     SeriesSpec(1, (3, 2)), context=ctx)
    report = theorem1_check(p)
    assert not report.hypothesis_holds()
    assert not report.passed
    # inequality witnessed at N_13 = gamma_3 by degree 2
    term13 = next(t for t in report.per_term if (t.k, t.l) == (1, 3))
    assert term13.first_inequality() == 2
    # propagation: every deeper decidable term also shows an inequality
    for t in report.per_term:
        if (t.k, t.l) in ((1, 4), (2, 1), (2, 2), (2, 3)):
            assert t.first_inequality() is not None


def test_theorem1_inhomogeneous_relator(ctx):
    r = LieElement.generator(ctx, 0) + LieElement.from_word(ctx, (1, 2))
    p = Presentation(ctx.generators, [r], SeriesSpec(1, (2,)), context=ctx)
    report = theorem1_check(p)
    # the filtered path completes and renders definite verdicts at low degrees
    for t in report.per_term:
        assert t.degrees[0].conclusive


def test_theorem1_requires_three_generators():
    ctx2 = AlgebraContext(2, QQ, 4)
    p = Presentation(ctx2.generators, [LieElement.from_word(ctx2, (0, 1))],
                     SeriesSpec(1, (2,)), context=ctx2)
    with pytest.raises(FreedomError):
        theorem1_check(p)


def test_theorem1_relator_outside_n11():
    ctx = AlgebraContext(3, QQ, 4)
    p = Presentation(ctx.generators, [LieElement.generator(ctx, 0)],
                     SeriesSpec(2, (2,)), context=ctx)
    with pytest.raises(FreedomError):
        theorem1_check(p)


def test_theorem2_single_relator_instance():
    ctx = AlgebraContext(3, QQ, 5)
    p = Presentation(ctx.generators, [LieElement.from_word(ctx, (0, 2))],
                     SeriesSpec(1, (2, 2)), context=ctx)
    report = theorem2_check(p)
    assert report.passed
    assert report.chosen_subset == ["y2", "y3"]
    assert len(report.chosen_subset) >= 2


def test_theorem2_deep_relators_trivial():
    ctx = AlgebraContext(3, QQ, 4)
    p = Presentation(ctx.generators, [LieElement.from_word(ctx, (0, 1))],
                     SeriesSpec(1, (1,)), context=ctx)
    report = theorem2_check(p)
    assert report.passed
    assert report.chosen_subset == ["y1", "y2", "y3"]


def test_theorem2_rejects_too_many_relators():
    ctx = AlgebraContext(3, QQ, 4)
    rel = [LieElement.from_word(ctx, (0, 1)), LieElement.from_word(ctx, (0, 2)),
           LieElement.from_word(ctx, (1, 2))]
    p = Presentation(ctx.generators, rel, SeriesSpec(1, (2,)), context=ctx)
    with pytest.raises(FreedomError):
        theorem2_check(p)


def test_presentation_validation():
    ctx = AlgebraContext(3, QQ, 4)
    with pytest.raises(FreedomError):
        Presentation(ctx.generators, [], SeriesSpec(1, (1,)), context=ctx)
    with pytest.raises(FreedomError):
        Presentation(ctx.generators, [LieElement.zero(ctx)], SeriesSpec(1, (1,)),
                     context=ctx)
