"""The q-self-similar rank-one flow with rational parameters.

Stage ``j`` is a rectangle of height ``q^(j-1)`` and width ``2^(1-j)``.
Going to stage ``j+1`` the rectangle is cut into two columns of width
``2^-j``, the right column is stacked directly on the left one (no spacer
between them) and a spacer of height ``(q - 2) q^(j-1)`` goes on top.  The
flow moves points upward at unit speed.

``Phi(u, v) = (2u, v/q)`` maps the stage-``(j+1)`` rectangle onto the
stage-``j`` one and satisfies ``Phi o T_{qt} = T_t o Phi``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .errors import IndexOutOfRange, InvalidQ, InvalidStage, StageCapExceeded, StageTooLow

DEFAULT_MAX_STAGE = 64

Interval = tuple[Fraction, Fraction]


def _q(q) -> Fraction:
    q = Fraction(q)
    if q <= 2:
        raise InvalidQ(f"q must exceed 2, got {q}")
    return q


def flow_height(q, j: int) -> Fraction:
    if j < 1:
        raise InvalidStage(f"stage index must be >= 1, got {j}")
    return _q(q) ** (j - 1)


def flow_width(j: int) -> Fraction:
    if j < 1:
        raise InvalidStage(f"stage index must be >= 1, got {j}")
    return Fraction(1, 2 ** (j - 1))


@dataclass(frozen=True)
class FlowLayout:
    j: int
    height: Fraction
    width: Fraction
    columns: tuple[Interval, ...]
    spacer: Interval | None


def build_flow_stage(q, j: int) -> FlowLayout:
    q = _q(q)
    h = flow_height(q, j)
    if j == 1:
        return FlowLayout(1, h, Fraction(1), (), None)
    prev = flow_height(q, j - 1)
    return FlowLayout(j, h, flow_width(j), ((Fraction(0), prev), (prev, 2 * prev)), (2 * prev, h))


def _normalize(intervals: Iterable[tuple]) -> tuple[Interval, ...]:
    out: list[list[Fraction]] = []
    for a, b in sorted((Fraction(a), Fraction(b)) for a, b in intervals):
        if b <= a:
            continue
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


@dataclass(frozen=True)
class RectSet:
    """Full-width union of height intervals ``[a, b)`` of the stage-``stage`` rectangle."""

    stage: int
    intervals: tuple[Interval, ...] = ()

    def __post_init__(self):
        if self.stage < 1:
            raise InvalidStage(f"stage index must be >= 1, got {self.stage}")
        object.__setattr__(self, "intervals", _normalize(self.intervals))

    @property
    def length(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    @property
    def measure(self) -> Fraction:
        return flow_width(self.stage) * self.length

    def validate(self, q) -> "RectSet":
        if self.intervals and (
            self.intervals[0][0] < 0 or self.intervals[-1][1] > flow_height(q, self.stage)
        ):
            raise IndexOutOfRange(f"intervals leave the stage-{self.stage} rectangle")
        return self


def rectangle(stage: int = 1, q=None) -> RectSet:
    """The whole stage-``stage`` rectangle ``X_stage`` (``q`` needed above stage 1)."""
    top = Fraction(1) if stage == 1 else flow_height(q, stage)
    return RectSet(stage, ((Fraction(0), top),))


def refine_rect(q, A: RectSet, K: int) -> RectSet:
    if K < A.stage:
        raise InvalidStage(f"cannot refine a stage-{A.stage} set to stage {K}")
    intervals = list(A.intervals)
    for k in range(A.stage, K):
        h = flow_height(q, k)
        intervals = intervals + [(a + h, b + h) for a, b in intervals]
    return RectSet(K, intervals)


def flow_translate(q, A: RectSet, t, max_stage: int = DEFAULT_MAX_STAGE) -> RectSet:
    """``T_t A`` at the smallest stage where the shifted intervals fit."""
    t = Fraction(t)
    if t == 0 or not A.intervals:
        return A
    if t < 0:
        if A.intervals[0][0] + t < 0:
            raise StageCapExceeded(f"T_{t} of the set leaves the bottom at every stage")
        return RectSet(A.stage, [(a + t, b + t) for a, b in A.intervals])
    top, K = A.intervals[-1][1], A.stage
    while top + t > flow_height(q, K):
        if K >= max_stage:
            raise StageCapExceeded(f"T_{t} needs a stage above the cap {max_stage}")
        top += flow_height(q, K)
        K += 1
    A = refine_rect(q, A, K)
    return RectSet(K, [(a + t, b + t) for a, b in A.intervals])


def _overlap(xs: Sequence[Interval], ys: Sequence[Interval]) -> Fraction:
    total, i, j = Fraction(0), 0, 0
    while i < len(xs) and j < len(ys):
        lo = max(xs[i][0], ys[j][0])
        hi = min(xs[i][1], ys[j][1])
        if hi > lo:
            total += hi - lo
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    return total


def flow_correlation(q, A: RectSet, B: RectSet, t, max_stage: int = DEFAULT_MAX_STAGE) -> Fraction:
    """Exact ``mu(T_t A & B)``."""
    t = Fraction(t)
    if t < 0:
        return flow_correlation(q, B, A, -t, max_stage)
    TA = flow_translate(q, A, t, max_stage)
    K = max(TA.stage, B.stage)
    TA, B = refine_rect(q, TA, K), refine_rect(q, B, K)
    return flow_width(K) * _overlap(TA.intervals, B.intervals)


def same_rect(q, A: RectSet, B: RectSet) -> bool:
    K = max(A.stage, B.stage)
    return refine_rect(q, A, K).intervals == refine_rect(q, B, K).intervals


@dataclass(frozen=True)
class FlowPoint:
    stage: int
    height: Fraction
    offset: Fraction

    def __post_init__(self):
        if self.stage < 1:
            raise InvalidStage(f"stage index must be >= 1, got {self.stage}")
        object.__setattr__(self, "height", Fraction(self.height))
        object.__setattr__(self, "offset", Fraction(self.offset))

    def validate(self, q) -> "FlowPoint":
        if not 0 <= self.height < flow_height(q, self.stage):
            raise IndexOutOfRange(f"height {self.height} outside the stage-{self.stage} rectangle")
        if not 0 <= self.offset < flow_width(self.stage):
            raise IndexOutOfRange(f"offset {self.offset} outside the stage-{self.stage} base")
        return self


def _escalate(q, x: FlowPoint) -> FlowPoint:
    k = x.stage
    half = flow_width(k + 1)
    if x.offset >= half:
        return FlowPoint(k + 1, x.height + flow_height(q, k), x.offset - half)
    return FlowPoint(k + 1, x.height, x.offset)


def lift_flow_point(q, x: FlowPoint, K: int) -> FlowPoint:
    while x.stage < K:
        x = _escalate(q, x)
    return x


def same_flow_point(q, x: FlowPoint, y: FlowPoint) -> bool:
    K = max(x.stage, y.stage)
    return lift_flow_point(q, x, K) == lift_flow_point(q, y, K)


def flow_apply(q, x: FlowPoint, t, max_stage: int = DEFAULT_MAX_STAGE) -> FlowPoint:
    """``T_t x``; escalates until the point stays inside the rectangle."""
    t = Fraction(t)
    x.validate(q)
    while not 0 <= x.height + t < flow_height(q, x.stage):
        if x.stage >= max_stage:
            raise StageCapExceeded(f"T_{t} of the point needs a stage above {max_stage}")
        x = _escalate(q, x)
    return FlowPoint(x.stage, x.height + t, x.offset)


def phi_flow(q, x: Union[FlowPoint, RectSet]):
    """``Phi(u, v) = (2u, v/q)`` from stage ``j`` onto stage ``j - 1``."""
    q = _q(q)
    if x.stage < 2:
        raise StageTooLow("Phi is defined on stages >= 2")
    if isinstance(x, FlowPoint):
        return FlowPoint(x.stage - 1, x.height / q, 2 * x.offset)
    if isinstance(x, RectSet):
        return RectSet(x.stage - 1, [(a / q, b / q) for a, b in x.intervals])
    raise TypeError(f"cannot apply Phi to {type(x).__name__}")


@dataclass(frozen=True)
class FlowConjugacyReport:
    t: Fraction
    attempted: int
    passed: int
    first_failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.passed == self.attempted


def flow_conjugacy_check(
    q,
    t,
    samples: Sequence[FlowPoint],
    max_stage: int = DEFAULT_MAX_STAGE,
    phi: Callable = phi_flow,
) -> FlowConjugacyReport:
    """Check ``Phi(T_{qt} x) == T_t(Phi x)`` exactly for every sample."""
    q, t = _q(q), Fraction(t)
    passed, first = 0, None
    for x in samples:
        try:
            lhs = phi(q, flow_apply(q, x, q * t, max_stage))
            rhs = flow_apply(q, phi(q, x), t, max_stage)
            ok = same_flow_point(q, lhs, rhs)
            detail = f"{lhs} != {rhs}"
        except (IndexOutOfRange, StageTooLow) as exc:
            ok, detail = False, f"invalid image ({exc})"
        if ok:
            passed += 1
        elif first is None:
            first = f"{x}: {detail}"
    return FlowConjugacyReport(t, len(samples), passed, first)


def sample_points(q, stage: int, count: int, seed: int = 0, denominator: int = 997) -> list[FlowPoint]:
    """Deterministic rational points spread over the stage-``stage`` rectangle."""
    rng = random.Random(seed)
    h, w = flow_height(q, stage), flow_width(stage)
    return [
        FlowPoint(
            stage,
            h * Fraction(rng.randrange(denominator), denominator),
            w * Fraction(rng.randrange(denominator), denominator),
        )
        for _ in range(count)
    ]
