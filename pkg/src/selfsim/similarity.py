"""The T^p-invariant set, the similarity map and the ergodic components of T^p.

For a type-(h, p) construction the levels ``T^{p i} E_{j+1}`` (``0 <= i < h_j``)
form a set invariant under ``T^p``, and the map sending ``T^{p i} E_{j+1}``
onto ``T^i E_j`` conjugates ``T^p`` on that set with ``T``.  Here the set is
only ever materialised at a finite stage.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from .errors import AmbiguousComponent, IndexOutOfRange, InvalidParams, NotInInvariantSet, StageTooLow
from .tower import (
    LevelSet,
    PointCoord,
    SelfSimilarParams,
    height,
    lift_point,
    refine_set,
    same_point,
    same_set,
    symmetric_difference_measure,
    translate_set,
    width,
    apply_point,
)


def _require_p(params: SelfSimilarParams) -> int:
    p = params.p
    if p is None:
        raise InvalidParams("operation defined for type-(h, p) parameters only")
    return p


@dataclass(frozen=True)
class InvariantSetTruncation:
    J: int
    levels: LevelSet


@dataclass(frozen=True)
class SimilarityReport:
    J: int
    checks_attempted: int
    checks_passed: int
    first_failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.checks_passed == self.checks_attempted


def invariant_set(params: SelfSimilarParams, J: int) -> InvariantSetTruncation:
    """Union of ``T^{p i} E_{j+1}`` over ``j < J`` expressed at stage ``J``."""
    p = _require_p(params)
    if J < 1:
        raise IndexOutOfRange(f"J must be >= 1, got {J}")
    acc: set[int] = set()
    for j in range(1, J):
        terms = LevelSet(j + 1, [p * i for i in range(height(params, j))])
        acc.update(refine_set(params, terms, J).indices)
    return InvariantSetTruncation(J, LevelSet(J, acc))


def _phi_level_set(params, A: LevelSet, p: int) -> LevelSet:
    if A.stage == 1:
        A = refine_set(params, A, 2)
    bad = [i for i in A.indices if i % p]
    if bad:
        raise NotInInvariantSet(f"stage-{A.stage} level {bad[0]} is not a multiple of {p}")
    return LevelSet(A.stage - 1, [i // p for i in A.indices])


def _phi_point(params, x: PointCoord, p: int) -> PointCoord:
    if x.stage == 1:
        x = lift_point(params, x, 2)
    if x.level % p:
        raise NotInInvariantSet(f"stage-{x.stage} level {x.level} is not a multiple of {p}")
    return PointCoord(x.stage - 1, x.level // p, params.r * x.offset)


def phi_forward(params: SelfSimilarParams, x: Union[PointCoord, LevelSet]):
    """Similarity map from the invariant set onto the whole space.

    Stage-``(j+1)`` level ``p*i`` goes to stage-``j`` level ``i``; base
    offsets are multiplied by ``r`` (doubling for the type-(h, p) family).
    Stage-1 input is first refined to stage 2.
    """
    p = _require_p(params)
    if isinstance(x, LevelSet):
        return _phi_level_set(params, x, p)
    if isinstance(x, PointCoord):
        return _phi_point(params, x, p)
    raise TypeError(f"cannot apply the similarity map to {type(x).__name__}")


def _sample_offsets(params, J: int) -> list[Fraction]:
    # one offset in each stage-(J+1) column and one straddling deeper cuts
    w = width(params, J)
    return [w / 7, w * 5 / 8, w * 11 / 13]


def conjugacy_check(
    params: SelfSimilarParams,
    J: int,
    phi: Callable = phi_forward,
) -> SimilarityReport:
    """Verify ``phi(T^p A) == T(phi(A))`` on every stage-``J`` level of the invariant set.

    A level ``p*i`` is checked when ``i + 1 < h_{J-1}``.  Each check compares
    the level-set images and, for a few points on the level, both the
    conjugacy and the stage-consistency of ``phi`` (image of the point equals
    the image of its refinement).
    """
    p = _require_p(params)
    if J < 2:
        raise StageTooLow(f"conjugacy check needs J >= 2, got {J}")
    levels = invariant_set(params, J).levels
    h_prev = height(params, J - 1)
    attempted = passed = 0
    first_failure = None
    for ell in levels.indices:
        i = ell // p
        if i + 1 >= h_prev:
            continue
        attempted += 1
        try:
            failure = _check_level(params, J, ell, p, phi)
        except (IndexOutOfRange, NotInInvariantSet) as exc:
            failure = f"stage {J} level {ell}: invalid image ({exc})"
        if failure is None:
            passed += 1
        elif first_failure is None:
            first_failure = failure
    return SimilarityReport(J, attempted, passed, first_failure)


def _check_level(params, J, ell, p, phi) -> str | None:
    A = LevelSet(J, (ell,))
    lhs = phi(params, translate_set(params, A, p))
    rhs = translate_set(params, phi(params, A), 1)
    if not same_set(params, lhs, rhs):
        return f"stage {J} level {ell}: set images differ ({lhs} vs {rhs})"
    for y in _sample_offsets(params, J):
        x = PointCoord(J, ell, y)
        lhs_pt = phi(params, apply_point(params, x, p))
        rhs_pt = apply_point(params, phi(params, x), 1)
        if not same_point(params, lhs_pt, rhs_pt):
            return f"stage {J} level {ell} offset {y}: conjugacy fails ({lhs_pt} vs {rhs_pt})"
        lifted = phi(params, lift_point(params, x, J + 1))
        if not same_point(params, phi(params, x), lifted):
            return f"stage {J} level {ell} offset {y}: image depends on the stage ({lifted})"
    return None


def component_of(params: SelfSimilarParams, level: int, stage: int) -> int:
    """Index ``k`` of the component ``T^k X~`` of ``T^p`` containing the level.

    Refinement from stage ``j >= 2`` adds multiples of ``p``, so the residue
    ``level mod p`` is stage-independent there.  At stage 1 the column-2
    offset is ``2h``, and a level lies in a single component only when
    ``p`` divides ``2h``.
    """
    p = _require_p(params)
    if not 0 <= level < height(params, stage):
        raise IndexOutOfRange(f"level {level} outside the stage-{stage} tower")
    if stage == 1 and (2 * params.h) % p:
        raise AmbiguousComponent(
            f"stage-1 level {level} meets components {level % p} and {(level + 2 * params.h) % p}"
        )
    return level % p


def component_classes(params: SelfSimilarParams, J: int) -> list[LevelSet]:
    """The ``p`` residue classes of stage-``J`` levels."""
    p = _require_p(params)
    h_J = height(params, J)
    return [LevelSet(J, range(k, h_J, p)) for k in range(p)]


def invariance_defect(params: SelfSimilarParams, A: LevelSet, n: int) -> Fraction:
    """``mu(T^n A  symmetric-difference  A)``, computed exactly."""
    return symmetric_difference_measure(params, translate_set(params, A, n), A)
