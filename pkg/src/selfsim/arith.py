"""Number theory behind the limit-time arguments.

* times ``n_i`` with ``q n_i = p^i + s_i``, ``0 <= s_i < q``;
* exhaustive collisions between ``{m p^j}`` and ``{n p^i + s}``;
* distances ``dist(x^n, Z)`` for a Pisot number ``x``, through the integer
  power-sum recurrence of its minimal polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .errors import NotCoprime, NotPisot

ROOT_TOL = 1e-9


@dataclass(frozen=True)
class TimeEntry:
    """``q * n = p**i + s`` before reduction; ``*_red`` after dividing by ``p**k``."""

    i: int
    n: int
    s: int
    k: int = 0
    i_red: int | None = None
    n_red: int | None = None
    s_red: int | None = None

    def as_tuple(self) -> tuple[int, int, int]:
        return self.i, self.n, self.s


@dataclass(frozen=True)
class WeakLimitTimes:
    q: int
    p: int
    entries: tuple[TimeEntry, ...]


def weak_limit_times(q: int, p: int, i_max: int) -> WeakLimitTimes:
    """``s_i = (-p^i) mod q`` and ``n_i = (p^i + s_i) / q`` for ``1 <= i <= i_max``.

    When ``p^k`` divides a nonzero ``s_i`` the relation is divided by
    ``p^k`` and the reduced triple is stored alongside.
    """
    if q < 1 or p < 2:
        raise ValueError(f"need q >= 1 and p >= 2, got q={q}, p={p}")
    if math.gcd(q, p) != 1:
        raise NotCoprime(f"q={q} and p={p} are not coprime")
    entries = []
    for i in range(1, i_max + 1):
        pi = p**i
        s = (-pi) % q
        n = (pi + s) // q
        k = 0
        if s:
            while s % p ** (k + 1) == 0 and k < i:
                k += 1
        if k:
            d = p**k
            entries.append(TimeEntry(i, n, s, k, i - k, n // d, s // d))
        else:
            entries.append(TimeEntry(i, n, s))
    return WeakLimitTimes(q, p, tuple(entries))


@dataclass(frozen=True)
class CollisionReport:
    collisions: tuple[tuple[int, int], ...]
    bound: int
    stable: bool


def intersection_finite(m: int, n: int, s: int, p: int, bound: int) -> CollisionReport:
    """All ``(j, i)`` with ``0 <= j, i <= bound`` and ``m p^j = n p^i + s``.

    ``stable`` says no collision uses an exponent above ``bound // 2``, i.e.
    the list stopped growing over the second half of the search range.
    """
    if m < 1 or n < 1 or p < 2 or bound < 1:
        raise ValueError("need m, n >= 1, p >= 2, bound >= 1")
    right = {}
    for i in range(bound + 1):
        right.setdefault(n * p**i + s, []).append(i)
    hits = []
    for j in range(bound + 1):
        for i in right.get(m * p**j, ()):
            hits.append((j, i))
    hits.sort()
    stable = all(max(j, i) <= bound // 2 for j, i in hits)
    return CollisionReport(tuple(hits), bound, stable)


@dataclass(frozen=True)
class PisotSpec:
    """Monic integer polynomial (highest degree first) with a Pisot root."""

    coefficients: tuple[int, ...]
    root: float

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def traces(self, n_max: int) -> list[int]:
        """Power sums ``t_n`` of all roots, ``0 <= n <= n_max`` (Newton's identities)."""
        c = self.coefficients  # c[0] = 1
        d = self.degree
        t = [d]
        for k in range(1, n_max + 1):
            acc = sum(c[i] * t[k - i] for i in range(1, min(k - 1, d) + 1))
            if k <= d:
                acc += k * c[k]
            t.append(-acc)
        return t


def pisot_spec(coefficients: Sequence[int]) -> PisotSpec:
    """Validate a polynomial and locate its Pisot root.

    Raises :class:`NotPisot` unless the polynomial is monic with integer
    coefficients, has a real root above 1 and all other roots inside the
    unit disc (to ``ROOT_TOL``).
    """
    if any(int(c) != c for c in coefficients):
        raise NotPisot("coefficients must be integers")
    coeffs = tuple(int(c) for c in coefficients)
    if len(coeffs) < 2 or coeffs[0] != 1:
        raise NotPisot("polynomial must be monic of degree >= 1")
    roots = np.roots(coeffs)
    order = np.argsort(-np.abs(roots))
    top = roots[order[0]]
    if abs(top.imag) > ROOT_TOL or top.real <= 1 + ROOT_TOL:
        raise NotPisot(f"dominant root {top} is not a real number > 1")
    rest = np.abs(roots[order[1:]])
    if rest.size and rest.max() >= 1 - ROOT_TOL:
        raise NotPisot(f"conjugate of modulus {rest.max():.12g} is not inside the unit disc")
    return PisotSpec(coeffs, float(top.real))


def _precise_root(spec: PisotSpec, dps: int):
    with mpmath.workdps(dps):
        f = lambda x: mpmath.polyval(list(spec.coefficients), x)
        return mpmath.findroot(f, mpmath.mpf(spec.root))


def pisot_distance(spec: PisotSpec, n_max: int) -> list[tuple[int, float]]:
    """``dist(x^n, Z)`` for ``0 <= n <= n_max``.

    ``x^n - t_n`` equals minus the power sum of the conjugates, which is
    tiny; it is evaluated with enough working digits to survive the
    cancellation and then reduced to the nearest integer.
    """
    traces = spec.traces(n_max)
    dps = int(n_max * math.log10(max(spec.root, 2.0))) + 40
    out = []
    with mpmath.workdps(dps):
        x = _precise_root(spec, dps)
        power = mpmath.mpf(1)
        for n in range(n_max + 1):
            r = power - traces[n]
            out.append((n, float(abs(r - mpmath.nint(r)))))
            power *= x
    return out
