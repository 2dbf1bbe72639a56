"""Exact integer primitives: primes, Moebius/radical, squarefree and friable sets.

Everything here is pure and works on Python ints; inputs are desk-scale
(factorisation is trial division against a cached prime table).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np


@dataclass(frozen=True)
class PrimeTable:
    """Complete ascending list of the primes <= ``bound``."""

    bound: int
    primes: tuple[int, ...]

    def __iter__(self):
        return iter(self.primes)

    def __len__(self) -> int:
        return len(self.primes)

    def __contains__(self, n: object) -> bool:
        return n in self._as_set

    @cached_property
    def _as_set(self) -> frozenset[int]:
        return frozenset(self.primes)


@dataclass(frozen=True)
class FriableSet:
    """The integers m <= N with every prime factor <= Q and gcd(m, q_excluded) = 1."""

    N: int
    Q: int
    q_excluded: int
    members: tuple[int, ...]

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, m: object) -> bool:
        return m in self._as_set

    @cached_property
    def _as_set(self) -> frozenset[int]:
        return frozenset(self.members)


_TRIAL_BOUND = 1 << 16


def _sieve_mask(bound: int) -> np.ndarray:
    mask = np.ones(bound + 1, dtype=bool)
    mask[:2] = False
    for i in range(2, math.isqrt(bound) + 1):
        if mask[i]:
            mask[i * i :: i] = False
    return mask


@lru_cache(maxsize=32)
def primes_up_to(bound: int) -> PrimeTable:
    """Sieve of Eratosthenes. ``bound`` of 0 or 1 gives an empty table."""
    if bound < 0:
        raise ValueError(f"bound must be >= 0, got {bound}")
    if bound < 2:
        return PrimeTable(bound, ())
    primes = tuple(int(p) for p in np.flatnonzero(_sieve_mask(bound)))
    return PrimeTable(bound, primes)


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation ``{p: exponent}`` by trial division."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out: dict[int, int] = {}
    for p in primes_up_to(_TRIAL_BOUND).primes:
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
    # beyond the cached table fall back to odd trial divisors
    d = _TRIAL_BOUND + 1
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out[d] = e
        d += 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mobius_and_radical(n: int) -> tuple[int, int]:
    """Return ``(mu(n), rad(n))``."""
    fac = factorize(n)
    rad = math.prod(fac)
    if any(e > 1 for e in fac.values()):
        return 0, rad
    return (-1) ** len(fac), rad


def euler_phi(n: int) -> int:
    result = n
    for p in factorize(n):
        result -= result // p
    return result


def squarefree_up_to(Q: int) -> list[int]:
    """Ascending squarefree integers in [1, Q], including 1."""
    if Q < 1:
        raise ValueError(f"Q must be >= 1, got {Q}")
    mask = np.ones(Q + 1, dtype=bool)
    mask[0] = False
    for i in range(2, math.isqrt(Q) + 1):
        mask[i * i :: i * i] = False
    return [int(q) for q in np.flatnonzero(mask)]


def squarefree_with_factors(Q: int, primes: list[int] | tuple[int, ...]) -> list[tuple[int, tuple[int, ...]]]:
    """Squarefree q <= Q built from ``primes``, with their prime factors.

    Ordered by DFS, not by size; ``(1, ())`` comes first.
    """
    ps = sorted(primes)
    out: list[tuple[int, tuple[int, ...]]] = [(1, ())]
    stack = [(0, 1, ())]
    while stack:
        start, q, fac = stack.pop()
        for i in range(start, len(ps)):
            p = ps[i]
            if q * p > Q:
                break
            item = (q * p, fac + (p,))
            out.append(item)
            stack.append((i + 1, q * p, item[1]))
    return out


def friable_up_to(N: int, Q: int, q_excluded: int = 1) -> FriableSet:
    """Enumerate the Q-friable integers <= N coprime with ``q_excluded``.

    Built by depth-first multiplication over the admissible primes, so the
    cost is proportional to the size of the output rather than to N.
    """
    if N < 1 or Q < 1 or q_excluded < 1:
        raise ValueError("N, Q and q_excluded must all be >= 1")
    ps = [p for p in primes_up_to(Q).primes if q_excluded % p != 0]
    members = [1]
    stack = [(0, 1)]
    while stack:
        start, m = stack.pop()
        for i in range(start, len(ps)):
            p = ps[i]
            if m * p > N:
                break
            mp = m * p
            # the same prime may repeat, so the next index starts at i
            members.append(mp)
            stack.append((i, mp))
    members.sort()
    return FriableSet(N, Q, q_excluded, tuple(members))
