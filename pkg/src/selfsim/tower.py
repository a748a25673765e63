"""Exact cutting-and-stacking towers for self-similar rank-one maps.

A construction is fixed by the initial height ``h``, the number of cuts
``r`` and spacer multipliers ``s``: at every stage the base is cut
left-to-right into ``r`` equal pieces, ``s[i] * h_j`` spacer levels are put
on top of column ``i`` and the columns are stacked.  The stage-``j`` tower has
``h * q**(j - 1)`` levels of width ``w / r**(j - 1)`` where
``q = r + sum(s)``.

Sets are unions of full-width levels of a single stage (:class:`LevelSet`),
points carry a level index and an offset inside the base interval
(:class:`PointCoord`).  All arithmetic is on Python ints and
:class:`fractions.Fraction`, so indices never overflow.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import IndexOutOfRange, InvalidParams, InvalidStage, StageCapExceeded

DEFAULT_MAX_STAGE = 48


@dataclass(frozen=True)
class SelfSimilarParams:
    """Parameters of a self-similar rank-one construction.

    Attributes:
        h: initial tower height.
        r: number of columns cut at every stage.
        s: spacer multipliers, column ``i`` receives ``s[i] * h_j`` spacers.
        w: width of the stage-1 base interval.
    """

    h: int
    r: int
    s: tuple[int, ...]
    w: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(int(v) for v in self.s))
        object.__setattr__(self, "w", Fraction(self.w))
        if self.h < 1:
            raise InvalidParams(f"h must be positive, got {self.h}")
        if self.r < 2:
            raise InvalidParams(f"r must be at least 2, got {self.r}")
        if len(self.s) != self.r:
            raise InvalidParams(f"need {self.r} spacer multipliers, got {len(self.s)}")
        if any(v < 0 for v in self.s):
            raise InvalidParams("spacer multipliers must be nonnegative")
        if sum(self.s) == 0:
            raise InvalidParams("at least one spacer multiplier must be positive")
        if self.w <= 0:
            raise InvalidParams("base width must be positive")

    @classmethod
    def hp(cls, h: int, p: int, w=1) -> "SelfSimilarParams":
        """The type-(h, p) family: two cuts, spacer multipliers (1, p - 3)."""
        if p < 4:
            raise InvalidParams(f"type-(h, p) needs p >= 4, got p={p}")
        if p < 8:
            warnings.warn(
                f"p={p} < 8: weak-limit and disjointness properties are only "
                "established for p >= 8",
                stacklevel=2,
            )
        return cls(h=h, r=2, s=(1, p - 3), w=Fraction(w))

    @property
    def q(self) -> int:
        """Similarity coefficient ``r + sum(s)``; also the height ratio."""
        return self.r + sum(self.s)

    @property
    def p(self) -> int | None:
        """``p`` when these are type-(h, p) parameters, else ``None``."""
        if self.r == 2 and self.s[0] == 1:
            return self.q
        return None


def _check_stage(j: int) -> None:
    if j < 1:
        raise InvalidStage(f"stage index must be >= 1, got {j}")


def height(params: SelfSimilarParams, j: int) -> int:
    _check_stage(j)
    return params.h * params.q ** (j - 1)


@lru_cache(maxsize=4096)
def width(params: SelfSimilarParams, j: int) -> Fraction:
    _check_stage(j)
    return params.w / params.r ** (j - 1)


@lru_cache(maxsize=4096)
def column_offsets(params: SelfSimilarParams, j: int) -> tuple[int, ...]:
    """Offsets at stage ``j`` of the ``r`` copies of the stage ``j-1`` tower."""
    if j < 2:
        raise InvalidStage(f"column offsets exist only for stages >= 2, got {j}")
    prev = height(params, j - 1)
    offsets = [0]
    for mult in params.s[:-1]:
        offsets.append(offsets[-1] + (1 + mult) * prev)
    return tuple(offsets)


@dataclass(frozen=True)
class StageLayout:
    j: int
    height: int
    width: Fraction
    column_offsets: tuple[int, ...]
    column_height: int
    spacer_ranges: tuple[tuple[int, int], ...]

    @property
    def column_ranges(self) -> tuple[tuple[int, int], ...]:
        return tuple((c, c + self.column_height) for c in self.column_offsets)


def build_stage(params: SelfSimilarParams, j: int) -> StageLayout:
    """Layout of the stage-``j`` tower.

    Column and spacer ranges are half-open level ranges ``(start, stop)``.
    Stage 1 is the initial tower and has no columns.
    """
    _check_stage(j)
    if j == 1:
        return StageLayout(1, params.h, params.w, (), 0, ())
    offsets = column_offsets(params, j)
    prev = height(params, j - 1)
    spacers = []
    for c, mult in zip(offsets, params.s):
        if mult:
            spacers.append((c + prev, c + prev + mult * prev))
    return StageLayout(j, height(params, j), width(params, j), offsets, prev, tuple(spacers))


@dataclass(frozen=True)
class LevelSet:
    """A union of full-width levels of the stage-``stage`` tower."""

    stage: int
    indices: tuple[int, ...] = field(default=())

    def __post_init__(self):
        _check_stage(self.stage)
        object.__setattr__(self, "indices", tuple(sorted(set(int(i) for i in self.indices))))

    def __len__(self) -> int:
        return len(self.indices)

    def __bool__(self) -> bool:
        return bool(self.indices)

    def measure(self, params: SelfSimilarParams) -> Fraction:
        return len(self.indices) * width(params, self.stage)

    def validate(self, params: SelfSimilarParams) -> "LevelSet":
        if self.indices and (self.indices[0] < 0 or self.indices[-1] >= height(params, self.stage)):
            raise IndexOutOfRange(
                f"level indices must lie in [0, {height(params, self.stage)}) at stage {self.stage}"
            )
        return self


def base_set(j: int) -> LevelSet:
    """The base ``E_j`` of the stage-``j`` tower."""
    return LevelSet(j, (0,))


def _refine_indices(params, indices: Sequence[int], j: int, K: int) -> list[int]:
    out = list(indices)
    for k in range(j + 1, K + 1):
        out = [c + i for c in column_offsets(params, k) for i in out]
    return out


def refine_set(params: SelfSimilarParams, A: LevelSet, K: int) -> LevelSet:
    """Express ``A`` as a union of stage-``K`` levels (``K >= A.stage``)."""
    if K < A.stage:
        raise InvalidStage(f"cannot refine a stage-{A.stage} set to stage {K}")
    if K == A.stage:
        return A
    return LevelSet(K, _refine_indices(params, A.indices, A.stage, K))


def translate_set(
    params: SelfSimilarParams, A: LevelSet, n: int, max_stage: int = DEFAULT_MAX_STAGE
) -> LevelSet:
    """``T^n A`` at the smallest stage where the shift stays inside the tower.

    Refinement keeps index 0 of column 1 in place, so a downward shift that
    leaves the tower at ``A.stage`` leaves it at every stage.
    """
    if n == 0 or not A.indices:
        return A
    if n < 0:
        if A.indices[0] + n < 0:
            raise StageCapExceeded(
                f"T^{n} of a set containing level {A.indices[0]} is not a union of levels"
                " at any stage; use the adjoint identity instead"
            )
        return LevelSet(A.stage, [i + n for i in A.indices])
    top = A.indices[-1]
    K = A.stage
    while top + n >= height(params, K):
        K += 1
        if K > max_stage:
            raise StageCapExceeded(
                f"T^{n} needs a stage above the cap {max_stage}", needed=_stage_needed(params, A, n)
            )
        top += column_offsets(params, K)[-1]
    refined = _refine_indices(params, A.indices, A.stage, K)
    return LevelSet(K, [i + n for i in refined])


def _stage_needed(params, A: LevelSet, n: int) -> int:
    top, K = A.indices[-1], A.stage
    while top + n >= height(params, K):
        K += 1
        top += column_offsets(params, K)[-1]
    return K


def common_stage(params, A: LevelSet, B: LevelSet) -> tuple[LevelSet, LevelSet]:
    K = max(A.stage, B.stage)
    return refine_set(params, A, K), refine_set(params, B, K)


def same_set(params: SelfSimilarParams, A: LevelSet, B: LevelSet) -> bool:
    """Equality as measurable sets (after refinement to a common stage)."""
    A2, B2 = common_stage(params, A, B)
    return A2.indices == B2.indices


def intersection_measure(params, A: LevelSet, B: LevelSet) -> Fraction:
    A2, B2 = common_stage(params, A, B)
    common = set(A2.indices).intersection(B2.indices)
    return len(common) * width(params, A2.stage)


def symmetric_difference_measure(params, A: LevelSet, B: LevelSet) -> Fraction:
    A2, B2 = common_stage(params, A, B)
    diff = set(A2.indices).symmetric_difference(B2.indices)
    return len(diff) * width(params, A2.stage)


def correlation(
    params: SelfSimilarParams,
    A: LevelSet,
    B: LevelSet,
    n: int,
    max_stage: int = DEFAULT_MAX_STAGE,
) -> Fraction:
    """Exact ``mu(T^n A & B)``; negative ``n`` goes through ``mu(T^|n| B & A)``."""
    if n < 0:
        return correlation(params, B, A, -n, max_stage)
    return intersection_measure(params, translate_set(params, A, n, max_stage), B)


@dataclass(frozen=True)
class PointCoord:
    """A point on level ``level`` of the stage-``stage`` tower.

    ``offset`` is the position inside the base interval ``[0, w_stage)``.
    Passing to stage ``stage + 1`` moves the point into the column selected
    by its offset, and the offset is re-measured from that column's left end.
    """

    stage: int
    level: int
    offset: Fraction

    def __post_init__(self):
        _check_stage(self.stage)
        if type(self.offset) is not Fraction:
            object.__setattr__(self, "offset", Fraction(self.offset))

    def validate(self, params: SelfSimilarParams) -> "PointCoord":
        if not 0 <= self.level < height(params, self.stage):
            raise IndexOutOfRange(f"level {self.level} outside stage-{self.stage} tower")
        if not 0 <= self.offset < width(params, self.stage):
            raise IndexOutOfRange(f"offset {self.offset} outside base of stage {self.stage}")
        return self


def column_of(params: SelfSimilarParams, offset: Fraction, j: int) -> int:
    """0-based column of the stage-``j-1`` base that contains ``offset``."""
    return int(offset // width(params, j))


def _escalate(params, x: PointCoord) -> PointCoord:
    k = x.stage + 1
    col = column_of(params, x.offset, k)
    return PointCoord(k, column_offsets(params, k)[col] + x.level, x.offset - col * width(params, k))


def lift_point(params: SelfSimilarParams, x: PointCoord, K: int) -> PointCoord:
    if K < x.stage:
        raise InvalidStage(f"cannot lift a stage-{x.stage} point to stage {K}")
    while x.stage < K:
        x = _escalate(params, x)
    return x


def same_point(params: SelfSimilarParams, x: PointCoord, y: PointCoord) -> bool:
    K = max(x.stage, y.stage)
    return lift_point(params, x, K) == lift_point(params, y, K)


def apply_point(
    params: SelfSimilarParams, x: PointCoord, n: int, max_stage: int = DEFAULT_MAX_STAGE
) -> PointCoord:
    """``T^n x``, escalating stages until the shifted level is in the tower."""
    x.validate(params)
    while not 0 <= x.level + n < height(params, x.stage):
        if x.stage >= max_stage:
            raise StageCapExceeded(f"T^{n} of the point needs a stage above {max_stage}")
        x = _escalate(params, x)
    return PointCoord(x.stage, x.level + n, x.offset)


def level_of(params: SelfSimilarParams, indices: Iterable[int], stage: int) -> LevelSet:
    return LevelSet(stage, indices).validate(params)


def spacer_levels(params: SelfSimilarParams, j: int) -> list[int]:
    """Sorted spacer level indices at stage ``j`` (empty for ``j = 1``)."""
    out = []
    for a, b in build_stage(params, j).spacer_ranges:
        out.extend(range(a, b))
    return out

