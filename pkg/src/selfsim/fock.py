"""Multiplicity arithmetic on finite pure-point spectra.

A :class:`RotationMultiset` maps rotation numbers ``theta`` in ``[0, 1)``
(eigenvalues ``exp(2 pi i theta)``) to multiplicities.  Direct sums add
multiplicities, tensor products add rotation numbers, and the truncated
exponential is the direct sum of symmetric powers up to a given degree.
Rotation number 0 plays the part of the constants.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping


class RotationMultiset(Mapping[Fraction, int]):
    """Immutable multiset of rotation numbers reduced mod 1."""

    __slots__ = ("_data",)

    def __init__(self, data: Mapping | Iterable = ()):
        counts: Counter = Counter()
        items = data.items() if isinstance(data, Mapping) else ((t, 1) for t in data)
        for theta, mult in items:
            if mult < 0:
                raise ValueError(f"negative multiplicity {mult} at {theta}")
            if mult:
                counts[Fraction(theta) % 1] += int(mult)
        self._data = dict(sorted(counts.items()))

    def __getitem__(self, theta) -> int:
        return self._data[Fraction(theta) % 1]

    def __iter__(self):
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __eq__(self, other) -> bool:
        if isinstance(other, RotationMultiset):
            return self._data == other._data
        if isinstance(other, Mapping):
            return self == RotationMultiset(other)
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._data.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{t}: {m}" for t, m in self._data.items())
        return f"RotationMultiset({{{body}}})"

    @property
    def dim(self) -> int:
        return sum(self._data.values())

    def expand(self) -> list[Fraction]:
        """Rotation numbers listed with repetition."""
        return [t for t, m in self._data.items() for _ in range(m)]

    def __add__(self, other: "RotationMultiset") -> "RotationMultiset":
        return direct_sum(self, other)

    def __rmul__(self, m: int) -> "RotationMultiset":
        return scale_copies(self, m)


EMPTY = RotationMultiset()
CONSTANTS = RotationMultiset({Fraction(0): 1})


def cyclic_spectrum(h: int) -> RotationMultiset:
    """Spectrum of a cyclic permutation of order ``h``: ``{k/h}``."""
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    return RotationMultiset(Fraction(k, h) for k in range(h))


def scale_copies(R: RotationMultiset, m: int) -> RotationMultiset:
    """``m`` copies of ``R``."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return RotationMultiset({t: m * k for t, k in R.items()})


def direct_sum(*parts: RotationMultiset) -> RotationMultiset:
    total: Counter = Counter()
    for R in parts:
        total.update(dict(R.items()))
    return RotationMultiset(total)


def tensor(R1: RotationMultiset, R2: RotationMultiset) -> RotationMultiset:
    out: Counter = Counter()
    for t1, m1 in R1.items():
        for t2, m2 in R2.items():
            out[(t1 + t2) % 1] += m1 * m2
    return RotationMultiset(out)


def _sym_layers(R: RotationMultiset, D: int) -> list[Counter]:
    # layers[d] = Sym^d R, built one distinct rotation number at a time:
    # Sym^d(A + B) = sum_k Sym^k A (x) Sym^(d-k) B and Sym^k of m copies of
    # theta is C(m+k-1, k) copies of k*theta
    layers = [Counter({Fraction(0): 1})] + [Counter() for _ in range(D)]
    for theta, m in R.items():
        new = [Counter() for _ in range(D + 1)]
        for d in range(D + 1):
            for k in range(D - d + 1):
                weight = comb(m + k - 1, k)
                shift = k * theta
                for t, c in layers[d].items():
                    new[d + k][(t + shift) % 1] += c * weight
        layers = new
    return layers


def sym_power(R: RotationMultiset, d: int) -> RotationMultiset:
    """Spectrum of the ``d``-th symmetric tensor power (``Sym^0 = {0: 1}``)."""
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    return RotationMultiset(_sym_layers(R, d)[d])


def exp_truncated(R: RotationMultiset, D: int) -> RotationMultiset:
    """Direct sum of ``Sym^d R`` for ``0 <= d <= D``."""
    if D < 0:
        raise ValueError(f"D must be >= 0, got {D}")
    return direct_sum(*(RotationMultiset(layer) for layer in _sym_layers(R, D)))


def multiplicity_set(R: RotationMultiset, exclude_zero: bool = False) -> set[int]:
    """Distinct multiplicity values, optionally ignoring rotation number 0."""
    return {m for t, m in R.items() if not (exclude_zero and t == 0)}


def sym_dimension(N: int, d: int) -> int:
    """``dim Sym^d`` of an ``N``-dimensional space."""
    return comb(N + d - 1, d) if N else int(d == 0)
