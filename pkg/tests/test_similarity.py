import time
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import RealLineTower, in_union
from selfsim.errors import AmbiguousComponent, InvalidParams, NotInInvariantSet, StageTooLow
from selfsim.similarity import (
    component_classes,
    component_of,
    conjugacy_check,
    invariance_defect,
    invariant_set,
    phi_forward,
)
from selfsim.tower import LevelSet, PointCoord, SelfSimilarParams, base_set, height, lift_point, width

P18 = SelfSimilarParams.hp(1, 8)


def test_invariant_set_small_stages():
    assert invariant_set(P18, 1).levels == LevelSet(1)
    assert invariant_set(P18, 2).levels == LevelSet(2, (0,))
    assert invariant_set(P18, 3).levels == LevelSet(3, (0, 8, 16, 24, 32, 40, 48, 56))


@pytest.mark.parametrize("J", range(2, 6))
def test_invariant_set_is_multiples_of_p(J):
    assert invariant_set(P18, J).levels == LevelSet(J, range(0, height(P18, J), 8))


def test_invariant_set_needs_hp_family():
    with pytest.raises(InvalidParams):
        invariant_set(SelfSimilarParams(1, 2, (0, 1)), 3)


def test_phi_level():
    assert phi_forward(P18, LevelSet(3, (8,))) == LevelSet(2, (1,))


def test_phi_point_doubles_offset():
    y = Fraction(1, 11)
    assert phi_forward(P18, PointCoord(3, 8, y)) == PointCoord(2, 1, 2 * y)
    assert phi_forward(P18, PointCoord(2, 0, Fraction(1, 5))) == PointCoord(1, 0, Fraction(2, 5))


def test_phi_rejects_outside():
    with pytest.raises(NotInInvariantSet):
        phi_forward(P18, LevelSet(3, (9,)))
    with pytest.raises(NotInInvariantSet):
        phi_forward(P18, PointCoord(2, 3, Fraction(0)))


def test_phi_stage_one_point_is_lifted():
    # stage-1 offset 3/4 lies in the right column, which is not in the invariant set
    with pytest.raises(NotInInvariantSet):
        phi_forward(P18, PointCoord(1, 0, Fraction(3, 4)))
    assert phi_forward(P18, PointCoord(1, 0, Fraction(1, 4))) == PointCoord(1, 0, Fraction(1, 2))


def test_phi_doubles_measure():
    A = LevelSet(4, (0, 8, 72))
    assert phi_forward(P18, A).measure(P18) == 2 * A.measure(P18)


@pytest.mark.parametrize("J", range(2, 7))
def test_conjugacy_passes(J):
    rep = conjugacy_check(P18, J)
    assert rep.ok and rep.first_failure is None
    assert rep.checks_attempted == (0 if J == 2 else height(P18, J - 1) - 1)


@pytest.mark.slow
def test_conjugacy_stage_seven():
    assert conjugacy_check(P18, 7).ok


def test_conjugacy_other_h():
    assert conjugacy_check(SelfSimilarParams.hp(2, 8), 4).ok


def test_conjugacy_stage_one_rejected():
    with pytest.raises(StageTooLow):
        conjugacy_check(P18, 1)


def _no_doubling(params, x):
    if isinstance(x, PointCoord):
        x2 = x if x.stage > 1 else lift_point(params, x, 2)
        return PointCoord(x2.stage - 1, x2.level // 8, x2.offset)
    return phi_forward(params, x)


def _wrong_level(params, x):
    if isinstance(x, LevelSet):
        return LevelSet(x.stage - 1, [i // 4 for i in x.indices])
    return phi_forward(params, x)


@pytest.mark.parametrize("bad", [_no_doubling, _wrong_level])
def test_conjugacy_negative_controls(bad):
    rep = conjugacy_check(P18, 4, phi=bad)
    assert not rep.ok
    assert rep.first_failure


def test_conjugacy_runtime():
    t0 = time.perf_counter()
    for J in range(3, 7):
        conjugacy_check(P18, J)
    assert time.perf_counter() - t0 < 5


# --- ergodic components of T^p --------------------------------------------------

@pytest.mark.parametrize("level, stage, k", [(8, 3, 0), (3, 2, 3), (11, 3, 3), (63, 3, 7)])
def test_component_of_examples(level, stage, k):
    assert component_of(P18, level, stage) == k


def test_component_of_stage_one_ambiguous():
    with pytest.raises(AmbiguousComponent):
        component_of(P18, 0, 1)
    # p | 2h: the stage-1 level sits in one component
    assert component_of(SelfSimilarParams.hp(4, 8), 1, 1) == 1


def test_component_of_matches_real_line_oracle():
    # the truncated invariant set, drawn on the real line; a level belongs to
    # component k when moving it back by k lands inside that set
    K = 5
    oracle = RealLineTower(1, [1, 5], K)
    inv = oracle.real_intervals(4, invariant_set(P18, 4).levels.indices)
    starts, w = oracle.levels(4)
    for ell in range(height(P18, 4) - 8):
        x = starts[ell] + w / 3
        hits = [k for k in range(8) if (y := oracle.orbit(x, -k)) is not None and in_union(y, inv)]
        assert hits == [component_of(P18, ell, 4)]


@pytest.mark.parametrize("J", range(3, 6))
def test_component_classes_partition_and_invariance(J):
    classes = component_classes(P18, J)
    assert sum(c.measure(P18) for c in classes) == height(P18, J) * width(P18, J)
    assert sorted(i for c in classes for i in c.indices) == list(range(height(P18, J)))
    for c in classes:
        assert invariance_defect(P18, c, 8) <= 8 * width(P18, J)


def test_invariant_set_defect_bounded():
    for J in range(3, 6):
        X = invariant_set(P18, J).levels
        assert invariance_defect(P18, X, 8) <= 8 * width(P18, J)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 5), st.data())
def test_phi_conjugates_single_levels(J, data):
    i = data.draw(st.integers(0, height(P18, J - 1) - 2))
    A = LevelSet(J, (8 * i,))
    assert phi_forward(P18, A) == LevelSet(J - 1, (i,))
    y = data.draw(st.fractions(0, 1).filter(lambda f: f < 1)) * width(P18, J)
    img = phi_forward(P18, PointCoord(J, 8 * i, y))
    assert img.offset < width(P18, J - 1)
