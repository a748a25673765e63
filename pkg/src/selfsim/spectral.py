"""Correlation sequences and the spectral diagnostics built on them.

Correlations ``a_n = mu(T^n A & B)`` are the Fourier coefficients of the
(cross) spectral measure.  This module batches them, scans times for weak
limits of the form ``2^-m T^q``, synthesises Fejer densities and compares a
density with its rotations by ``2 pi / p^k``.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import GridNotDivisible, LengthMismatch
from .tower import (
    DEFAULT_MAX_STAGE,
    LevelSet,
    SelfSimilarParams,
    correlation,
    refine_set,
    translate_set,
    width,
)

Correlator = Callable[[int], Fraction]


@dataclass(frozen=True)
class CorrelationSeq:
    """Exact values ``a_0 .. a_{n_max}``.

    ``symmetric`` marks sequences of the form ``<T^n f, f>`` (and products of
    such), which are positive definite.
    """

    values: tuple[Fraction, ...]
    symmetric: bool = False
    label: str = ""
    params: SelfSimilarParams | None = field(default=None, compare=False)
    pair: tuple[LevelSet, LevelSet] | None = field(default=None, compare=False)

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n: int) -> Fraction:
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def rows(self) -> Iterable[tuple[int, int, int, float]]:
        """CSV rows ``(n, numerator, denominator, float)``."""
        for n, v in enumerate(self.values):
            yield n, v.numerator, v.denominator, float(v)


def correlation_sequence(
    params: SelfSimilarParams,
    A: LevelSet,
    B: LevelSet,
    n_max: int,
    max_stage: int = DEFAULT_MAX_STAGE,
) -> CorrelationSeq:
    """All ``mu(T^n A & B)`` for ``0 <= n <= n_max``.

    Both sets are refined once to a stage where ``T^{n_max} A`` needs no
    escalation; there ``a_n`` is ``w_K`` times the number of index pairs
    ``(a, b)`` with ``b - a = n``.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    values = [Fraction(0)] * (n_max + 1)
    if A.indices and B.indices:
        K = max(translate_set(params, A, n_max, max_stage).stage, B.stage)
        a_idx = refine_set(params, A, K).indices
        b_idx = refine_set(params, B, K).indices
        counts = Counter(b - a for a in a_idx for b in b_idx if 0 <= b - a <= n_max)
        w = width(params, K)
        for n, c in counts.items():
            values[n] = c * w
    return CorrelationSeq(tuple(values), symmetric=A == B, params=params, pair=(A, B))


@dataclass(frozen=True)
class WeakLimitHit:
    """Best ``2^-m T^q`` approximation to ``T^n`` on the test pairs."""

    time: int
    m: int
    q: int
    residual: Fraction
    pair_residuals: tuple[Fraction, ...] = ()

    @property
    def coefficient(self) -> Fraction:
        return Fraction(1, 2**self.m)

    @property
    def exact_pairs(self) -> int:
        return sum(1 for r in self.pair_residuals if r == 0)


def _best_hit(correlators: Sequence[Correlator], baseline, n: int, m_max: int, qs) -> WeakLimitHit:
    at_n = [c(n) for c in correlators]
    best = best_key = None
    for q in qs:
        ref = baseline[q]
        for m in range(m_max + 1):
            scale = Fraction(1, 2**m)
            res = tuple(abs(x - scale * y) for x, y in zip(at_n, ref))
            # ties on the worst pair go to the candidate exact on most pairs
            key = (max(res), sum(1 for r in res if r), abs(q), m, q)
            if best_key is None or key < best_key:
                best_key = key
                best = WeakLimitHit(n, m, q, key[0], res)
    return best


def scan_correlations(
    correlators: Sequence[Correlator],
    times: Iterable[int],
    m_max: int = 6,
    q_range: Iterable[int] = range(-8, 9),
    jobs: int = 1,
) -> list[WeakLimitHit]:
    """Weak-limit scan over arbitrary correlation functions ``n -> a_n``.

    For each time the candidate ``(m, q)`` minimises the largest residual
    ``|a_n - 2^-m a_q|`` over the functions; ties are broken by the number of
    inexact functions, then by ``|q|`` and ``m``.
    """
    if not correlators:
        raise ValueError("need at least one correlation function")
    qs = list(q_range)
    if not qs:
        raise ValueError("q_range is empty")
    baseline = {q: [c(q) for c in correlators] for q in qs}
    times = list(times)
    work = partial(_best_hit, list(correlators), baseline, m_max=m_max, qs=qs)
    if jobs > 1 and len(times) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(work, times))
    return [work(n) for n in times]


def weak_limit_scan(
    params: SelfSimilarParams,
    test_pairs: Sequence[tuple[LevelSet, LevelSet]],
    times: Iterable[int],
    m_max: int = 6,
    q_range: Iterable[int] = range(-8, 9),
    max_stage: int = DEFAULT_MAX_STAGE,
    jobs: int = 1,
) -> list[WeakLimitHit]:
    if not test_pairs:
        raise ValueError("test_pairs must be nonempty")
    correlators = [partial(correlation, params, A, B, max_stage=max_stage) for A, B in test_pairs]
    return scan_correlations(correlators, times, m_max, q_range, jobs)


def sequence_correlator(seq: CorrelationSeq) -> Correlator:
    """Two-sided lookup for a symmetric sequence, ``a_{-n} = a_n``."""
    if not seq.symmetric:
        raise ValueError("negative times need a symmetric sequence")
    return partial(_lookup, seq.values)


def _lookup(values, n: int) -> Fraction:
    return values[abs(n)]


def tensor_correlation(seq_a: CorrelationSeq, seq_b: CorrelationSeq) -> CorrelationSeq:
    """Correlations of the product set under ``T x S``: ``c_n = a_n * b_n``."""
    if len(seq_a) != len(seq_b):
        raise LengthMismatch(f"lengths differ: {len(seq_a)} vs {len(seq_b)}")
    values = tuple(x * y for x, y in zip(seq_a.values, seq_b.values))
    label = f"({seq_a.label or 'a'})x({seq_b.label or 'b'})"
    return CorrelationSeq(values, symmetric=seq_a.symmetric and seq_b.symmetric, label=label)


@dataclass(frozen=True)
class DensityProfile:
    """Fejer density sampled at ``theta_g = 2 pi g / G``."""

    G: int
    samples: np.ndarray
    N: int
    coefficients: np.ndarray = field(repr=False)

    @property
    def thetas(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.G) / self.G

    def riemann_mass(self) -> float:
        """``sum f(theta_g) * 2 pi / G``; aliased whenever ``G <= N``."""
        return float(self.samples.sum() * 2 * np.pi / self.G)

    def total_mass(self) -> float:
        """Integral of the density over the circle.

        Uniform quadrature is exact for trigonometric polynomials of degree
        below the number of nodes, so the density is re-sampled on the
        smallest multiple of ``G`` exceeding ``N``.
        """
        G2 = self.G * (self.N // self.G + 1)
        fine = _synthesise(self.coefficients, G2)
        return float(fine.sum() * 2 * np.pi / G2)


def _fejer_coefficients(values: Sequence[float]) -> np.ndarray:
    a = np.asarray(values, dtype=float)
    N = len(a) - 1
    n = np.arange(N + 1)
    c = 2.0 * (1.0 - n / (N + 1)) * a
    c[0] = a[0]
    return c


def _synthesise(coeffs: np.ndarray, G: int) -> np.ndarray:
    # cos(n theta_g) depends on n mod G: fold, then one FFT
    folded = np.zeros(G)
    np.add.at(folded, np.arange(len(coeffs)) % G, coeffs)
    return np.fft.fft(folded).real / (2 * np.pi)


def fejer_density(seq: CorrelationSeq, G: int) -> DensityProfile:
    """``f_N(theta) = (1/2pi) sum_{|n|<=N} (1 - |n|/(N+1)) a_|n| cos(n theta)``."""
    if not seq.symmetric:
        raise ValueError("Fejer density needs a positive-definite (A = B) sequence")
    if G < 4:
        raise ValueError(f"grid size must be >= 4, got {G}")
    coeffs = _fejer_coefficients(seq.as_floats())
    return DensityProfile(G, _synthesise(coeffs, G), seq.n_max, coeffs)


def density_from_samples(samples: Sequence[float]) -> DensityProfile:
    """Wrap explicit samples (e.g. constructed test profiles) as a profile."""
    arr = np.asarray(samples, dtype=float)
    return DensityProfile(len(arr), arr, 0, np.array([arr.mean() * 2 * np.pi]))


@dataclass(frozen=True)
class QuasiInvarianceReport:
    p: int
    n_rot: int
    shift: int
    floor: float
    count: int
    min_ratio: float
    max_ratio: float
    median_ratio: float
    degenerate: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def quasi_invariance_report(
    density: DensityProfile, p: int, n_rot: int, floor: float
) -> QuasiInvarianceReport:
    """Ratios ``f(theta + 2 pi / p^n_rot) / f(theta)`` where ``f(theta) >= floor``.

    ``degenerate`` is set when some rotated sample vanishes, i.e. the rotation
    moves mass off the support.
    """
    step = p**n_rot
    if density.G % step:
        raise GridNotDivisible(f"grid size {density.G} is not divisible by {p}^{n_rot}")
    shift = density.G // step
    f = density.samples
    rotated = np.roll(f, -shift)
    mask = f >= floor
    if floor <= 0:
        mask &= f > 0
    if not mask.any():
        return QuasiInvarianceReport(p, n_rot, shift, floor, 0, math.nan, math.nan, math.nan, True)
    ratios = rotated[mask] / f[mask]
    lo = float(ratios.min())
    return QuasiInvarianceReport(
        p, n_rot, shift, floor, int(mask.sum()), lo, float(ratios.max()),
        float(np.median(ratios)), degenerate=lo <= 0.0,
    )
