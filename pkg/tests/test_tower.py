import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import RealLineTower, monte_carlo_correlation
from selfsim.errors import IndexOutOfRange, InvalidParams, InvalidStage, StageCapExceeded
from selfsim.tower import (
    LevelSet,
    PointCoord,
    SelfSimilarParams,
    apply_point,
    base_set,
    build_stage,
    correlation,
    height,
    lift_point,
    refine_set,
    same_point,
    same_set,
    spacer_levels,
    translate_set,
    width,
)

P18 = SelfSimilarParams.hp(1, 8)
ORACLE18 = RealLineTower(1, [1, 5], 6)


# --- parameters and layouts ---------------------------------------------------


def test_hp_family_fields():
    assert (P18.r, P18.s, P18.q, P18.p) == (2, (1, 5), 8, 8)


def test_hp_rejects_small_p():
    with pytest.raises(InvalidParams):
        SelfSimilarParams.hp(1, 3)


def test_hp_warns_below_eight():
    with pytest.warns(UserWarning, match="p >= 8"):
        SelfSimilarParams.hp(1, 5)


def test_hp_no_warning_at_eight():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        SelfSimilarParams.hp(1, 8)


@pytest.mark.parametrize("kwargs", [
    dict(h=0, r=2, s=(1, 5)),
    dict(h=1, r=1, s=(1,)),
    dict(h=1, r=2, s=(1,)),
    dict(h=1, r=2, s=(0, 0)),
    dict(h=1, r=2, s=(-1, 3)),
])
def test_invalid_params(kwargs):
    with pytest.raises(InvalidParams):
        SelfSimilarParams(**kwargs)


def test_build_stage_two():
    lay = build_stage(P18, 2)
    assert lay.height == 8
    assert lay.width == Fraction(1, 2)
    assert lay.column_offsets == (0, 2)
    assert spacer_levels(P18, 2) == [1, 3, 4, 5, 6, 7]


def test_build_stage_one():
    lay = build_stage(P18, 1)
    assert (lay.height, lay.width, lay.column_offsets, lay.spacer_ranges) == (1, 1, (), ())


def test_build_stage_general_family():
    params = SelfSimilarParams(1, 2, (0, 1))
    lay = build_stage(params, 2)
    assert (lay.height, lay.width, lay.column_offsets) == (3, Fraction(1, 2), (0, 1))
    assert spacer_levels(params, 2) == [2]


def test_build_stage_rejects_zero():
    with pytest.raises(InvalidStage):
        build_stage(P18, 0)


@pytest.mark.parametrize("params", [
    P18,
    SelfSimilarParams.hp(3, 8),
    SelfSimilarParams(2, 3, (0, 2, 1)),
    SelfSimilarParams(1, 2, (0, 1)),
])
@pytest.mark.parametrize("j", range(2, 9))
def test_layout_partitions_tower(params, j):
    lay = build_stage(params, j)
    assert lay.column_offsets[-1] + lay.column_height + params.s[-1] * lay.column_height == lay.height
    covered = []
    for a, b in lay.column_ranges + lay.spacer_ranges:
        covered.extend(range(a, b))
    assert sorted(covered) == list(range(lay.height))


def test_hp_heights_are_powers():
    for j in range(1, 30):
        assert height(P18, j) == 8 ** (j - 1)
    # beyond 64-bit
    assert height(P18, 23) > 2**63


def test_layout_matches_real_line_oracle():
    # columns of the oracle at stage j are the stage j-1 levels cut in pieces
    for j in range(2, 6):
        starts_prev, w_prev = ORACLE18.levels(j - 1)
        starts, w = ORACLE18.levels(j)
        lay = build_stage(P18, j)
        for col, c in enumerate(lay.column_offsets):
            for lvl in range(lay.column_height):
                assert starts[c + lvl] == starts_prev[lvl] + col * w
        assert w == width(P18, j)


# --- refinement and translation ---------------------------------------------------


def test_refine_one_step():
    assert refine_set(P18, LevelSet(2, (0,)), 3) == LevelSet(3, (0, 16))


def test_refine_two_steps():
    assert refine_set(P18, base_set(1), 3) == LevelSet(3, (0, 2, 16, 18))


def test_refine_empty():
    assert refine_set(P18, LevelSet(2), 5) == LevelSet(5)


def test_refine_backwards_rejected():
    with pytest.raises(InvalidStage):
        refine_set(P18, LevelSet(3, (0,)), 2)


def test_translate_inside_stage():
    assert translate_set(P18, LevelSet(2, (0, 2)), 2) == LevelSet(2, (2, 4))


def test_translate_zero():
    A = LevelSet(2, (0, 2))
    assert translate_set(P18, A, 0) == A


def test_translate_stage_three():
    assert translate_set(P18, LevelSet(3, (0, 2, 16, 18)), 16) == LevelSet(3, (16, 18, 32, 34))


def test_translate_escalates_minimally():
    # E_1 shifted by 8 first fits at stage 3
    assert translate_set(P18, base_set(1), 8) == LevelSet(3, (8, 10, 24, 26))


def test_translate_cap():
    with pytest.raises(StageCapExceeded) as info:
        translate_set(P18, base_set(1), 10**6, max_stage=3)
    assert info.value.needed > 3


def test_translate_negative_inside():
    assert translate_set(P18, LevelSet(3, (16, 18)), -16) == LevelSet(3, (0, 2))


def test_translate_negative_below_bottom():
    with pytest.raises(StageCapExceeded):
        translate_set(P18, base_set(1), -1)


def test_translate_agrees_with_oracle():
    # T^n of a level moves each of its points by the oracle's translation
    rng = random.Random(3)
    for _ in range(200):
        ell = rng.randrange(64)
        n = rng.randrange(0, 300)
        A = LevelSet(3, (ell,))
        try:
            TA = translate_set(P18, A, n, max_stage=6)
        except StageCapExceeded:
            continue
        y = width(P18, 3) * Fraction(rng.randrange(1000), 1000)
        x = ORACLE18.real_coordinate(3, ell, y)
        image = ORACLE18.orbit(x, n)
        lvl = ORACLE18.locate(image)
        # the level holding the image point, expressed at the oracle's stage 6
        assert lvl in refine_set(P18, TA, 6).indices


# --- correlations ----------------------------------------------------------------


@pytest.mark.parametrize("n, expected", [(0, 1), (8, 0), (16, Fraction(1, 2)), (2, Fraction(1, 2))])
def test_correlation_values(n, expected):
    E1 = base_set(1)
    assert correlation(P18, E1, E1, n) == expected


def test_correlation_stage_three_oracle():
    # explicit: {0,2,16,18} + 8 only meets spacers
    shifted = {i + 8 for i in (0, 2, 16, 18)}
    assert shifted.isdisjoint({0, 2, 16, 18})
    assert build_stage(P18, 3).spacer_ranges == ((8, 16), (24, 64))


@pytest.mark.parametrize("n", [0, 2, 8, 14, 16, 18, 130])
def test_correlation_monte_carlo(n):
    rng = random.Random(n)
    est = monte_carlo_correlation(ORACLE18, Fraction(1), n, 4000, rng)
    assert abs(est - float(correlation(P18, base_set(1), base_set(1), n))) < 0.03


def test_correlation_negative_uses_adjoint():
    A, B = LevelSet(2, (0,)), LevelSet(2, (2,))
    assert correlation(P18, A, B, 2) == Fraction(1, 2)
    assert correlation(P18, B, A, -2) == Fraction(1, 2)
    assert correlation(P18, A, B, -2) == 0


def test_correlation_cap_propagates():
    with pytest.raises(StageCapExceeded):
        correlation(P18, base_set(1), base_set(1), 8**10, max_stage=4)


def test_levelset_validate():
    with pytest.raises(IndexOutOfRange):
        LevelSet(2, (8,)).validate(P18)


# --- points ----------------------------------------------------------------------


def test_apply_point_escalates_from_stage_one():
    x = PointCoord(1, 0, Fraction(3, 10))
    assert apply_point(P18, x, 1) == PointCoord(2, 1, Fraction(3, 10))


def test_apply_point_zero():
    x = PointCoord(2, 5, Fraction(1, 3))
    assert apply_point(P18, x, 0) == x


def test_apply_point_top_of_stage_two():
    x = PointCoord(2, 7, Fraction(1, 10))
    assert apply_point(P18, x, 1) == PointCoord(3, 8, Fraction(1, 10))


def test_apply_point_negative_needs_right_column():
    # a point of column 2 of E_1 sits above spacers; T^-1 lands in a spacer
    x = PointCoord(1, 0, Fraction(3, 4))
    y = apply_point(P18, x, -1)
    assert y == PointCoord(2, 1, Fraction(1, 4))


def test_apply_point_offset_zero_never_goes_below_base():
    with pytest.raises(StageCapExceeded):
        apply_point(P18, PointCoord(1, 0, Fraction(0)), -1, max_stage=10)


def test_apply_point_matches_oracle():
    rng = random.Random(11)
    for _ in range(500):
        stage = rng.randrange(1, 4)
        lvl = rng.randrange(height(P18, stage))
        off = width(P18, stage) * Fraction(rng.randrange(997), 997)
        n = rng.randrange(-50, 400)
        x = PointCoord(stage, lvl, off)
        try:
            y = apply_point(P18, x, n, max_stage=6)
        except StageCapExceeded:
            continue
        real_x = ORACLE18.real_coordinate(stage, lvl, off)
        expected = ORACLE18.orbit(real_x, n)
        assert expected is not None
        assert ORACLE18.real_coordinate(y.stage, y.level, y.offset) == expected


def test_lift_and_same_point():
    x = PointCoord(1, 0, Fraction(3, 4))
    assert lift_point(P18, x, 2) == PointCoord(2, 2, Fraction(1, 4))
    # 1/4 is the left end of column 2 at stage 3
    assert same_point(P18, x, PointCoord(3, 18, Fraction(0)))
    assert not same_point(P18, x, PointCoord(3, 2, Fraction(0)))


# --- properties ------------------------------------------------------------------


level_sets = st.builds(
    lambda stage, idx: LevelSet(stage, [i % height(P18, stage) for i in idx]),
    st.integers(1, 3),
    st.lists(st.integers(0, 10**6), min_size=1, max_size=6),
)


@given(level_sets, st.integers(0, 5000))
@settings(max_examples=150, deadline=None)
def test_translation_preserves_measure(A, n):
    assert translate_set(P18, A, n).measure(P18) == A.measure(P18)


@given(level_sets, level_sets, st.integers(-3000, 3000))
@settings(max_examples=150, deadline=None)
def test_correlation_symmetry(A, B, n):
    assert correlation(P18, A, B, n) == correlation(P18, B, A, -n)


@given(level_sets, st.integers(0, 5000))
@settings(max_examples=150, deadline=None)
def test_correlation_bounds(A, n):
    a0 = correlation(P18, A, A, 0)
    assert a0 == A.measure(P18)
    assert 0 <= correlation(P18, A, A, n) <= a0


@given(level_sets, level_sets, st.integers(0, 3000), st.integers(0, 3))
@settings(max_examples=100, deadline=None)
def test_refinement_consistency(A, B, n, extra):
    A2 = refine_set(P18, A, A.stage + extra)
    assert same_set(P18, A, A2)
    assert correlation(P18, A2, B, n) == correlation(P18, A, B, n)


points = st.builds(
    lambda stage, lvl, num: PointCoord(
        stage, lvl % height(P18, stage), width(P18, stage) * Fraction(num % 1009, 1009)
    ),
    st.integers(1, 3),
    st.integers(0, 10**6),
    st.integers(0, 10**6),
)


@given(points, st.integers(-200, 2000), st.integers(-200, 2000))
@settings(max_examples=200, deadline=None)
def test_group_law(x, m, n):
    try:
        lhs = apply_point(P18, apply_point(P18, x, m), n)
        rhs = apply_point(P18, x, m + n)
    except StageCapExceeded:
        return
    assert same_point(P18, lhs, rhs)


def test_group_law_three_eight():
    params = SelfSimilarParams.hp(3, 8)
    rng = random.Random(5)
    for _ in range(300):
        x = PointCoord(2, rng.randrange(24), Fraction(rng.randrange(50), 100))
        m, n = rng.randrange(-20, 500), rng.randrange(-20, 500)
        try:
            lhs = apply_point(params, apply_point(params, x, m), n)
            rhs = apply_point(params, x, m + n)
        except StageCapExceeded:
            continue
        assert same_point(params, lhs, rhs)
