"""Polynilpotent series construction and its invariants."""

import random

import pytest

from liefreedom.fields import QQ
from liefreedom.freelie import (
    AlgebraContext,
    DegreewiseSubspace,
    LieElement,
    LieError,
    SeriesSpec,
    elementary_endo_invariance_check,
    lower_central,
    random_element,
    series_compute,
    subalgebra_span,
)


def test_series_single_step():
    ctx = AlgebraContext(2, QQ, 5)
    sctx = series_compute(ctx, SeriesSpec(1, (1,)))
    full = DegreewiseSubspace.full(ctx)
    assert sctx.term(1, 1) == full
    g2 = lower_central(full, 2)
    assert sctx.term(1, 2) == g2


def test_series_two_blocks():
    ctx = AlgebraContext(2, QQ, 6)
    sctx = series_compute(ctx, SeriesSpec(1, (2, 1)))
    full = DegreewiseSubspace.full(ctx)
    g3 = lower_central(full, 3)
    assert sctx.term(2, 1) == g3
    assert sctx.term(1, 3) == g3
    n22 = sctx.term(2, 2)
    # [gamma_3, gamma_3] on two generators has a nonzero degree-6 part
    assert n22.dim(6) > 0
    assert all(n22.dim(d) == 0 for d in range(1, 6))


def test_series_nesting_and_identification():
    ctx = AlgebraContext(3, QQ, 5)
    sctx = series_compute(ctx, SeriesSpec(1, (2, 2)))
    for k, m in enumerate(sctx.spec.steps, start=1):
        for l in range(1, m + 1):
            assert sctx.term(k, l).contains_subspace(sctx.term(k, l + 1))
    assert sctx.term(1, 3) is sctx.term(2, 1)


def test_series_bracket_compatibility_random():
    ctx = AlgebraContext(2, QQ, 6)
    sctx = series_compute(ctx, SeriesSpec(1, (3,)))
    rng = random.Random(17)
    for _ in range(20):
        p = rng.randint(1, 2)
        q = rng.randint(1, 2)
        if p + q > 4:
            continue
        np_, nq = sctx.term(1, p), sctx.term(1, q)
        dp = rng.choice([d for d in range(1, 7) if np_.dim(d)])
        dq = rng.choice([d for d in range(1, 7) if nq.dim(d)])
        if dp + dq > 6:
            continue
        u = rng.choice(np_.elements(dp))
        v = rng.choice(nq.elements(dq))
        assert sctx.term(1, p + q).contains(u.bracket(v))


def test_truncation_warning_flag():
    ctx = AlgebraContext(2, QQ, 4)
    deep = series_compute(ctx, SeriesSpec(1, (2, 2)))
    assert deep.truncation_warning  # final term starts at degree 9 > 4
    shallow = series_compute(ctx, SeriesSpec(1, (2,)))
    assert not shallow.truncation_warning


def test_elementary_endomorphism_invariance_small():
    ctx = AlgebraContext(3, QQ, 4)
    sctx = series_compute(ctx, SeriesSpec(1, (2,)))
    assert elementary_endo_invariance_check(sctx)


def test_elementary_endomorphism_invariance_base_two():
    ctx = AlgebraContext(3, QQ, 4)
    sctx = series_compute(ctx, SeriesSpec(2, (1,)))
    assert elementary_endo_invariance_check(sctx)


def test_generator_subalgebra_intersection_identity():
    # H cap N_kl = (H cap N_k1)_(l) for generator-subset subalgebras
    ctx = AlgebraContext(3, QQ, 5)
    sctx = series_compute(ctx, SeriesSpec(1, (2,)))
    h = subalgebra_span(ctx, [0, 1])
    for l in range(1, 4):
        lhs = h.intersect(sctx.term(1, l))
        rhs = lower_central(h.intersect(sctx.term(1, 1)), l)
        assert lhs == rhs


def test_series_spec_validation():
    with pytest.raises(LieError):
        SeriesSpec(0, (1,))
    with pytest.raises(LieError):
        SeriesSpec(1, ())
    with pytest.raises(LieError):
        SeriesSpec(1, (1, 0))
