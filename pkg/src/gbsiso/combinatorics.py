"""Detection events, their orbits under mode permutations, and mode replication."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import factorial, prod
from typing import Iterable, Iterator, Sequence

import numpy as np

Event = tuple[int, ...]


class OddTotalError(ValueError):
    """Odd photon totals have zero probability and are not partitioned."""


@dataclass(frozen=True)
class Orbit:
    """All permutations of a detection event; stored by its ascending representative."""

    representative: Event

    def __post_init__(self):
        rep = tuple(int(x) for x in self.representative)
        if any(x < 0 for x in rep):
            raise ValueError(f"negative photon count in {rep}")
        object.__setattr__(self, "representative", tuple(sorted(rep)))

    @property
    def modes(self) -> int:
        return len(self.representative)

    @property
    def total(self) -> int:
        return sum(self.representative)

    @property
    def multiplicities(self) -> dict[int, int]:
        """Photon number j -> number of modes that detect j photons."""
        return dict(sorted(Counter(self.representative).items()))

    @property
    def size(self) -> int:
        return orbit_size(self.representative)

    @property
    def stabilizer_size(self) -> int:
        return prod(factorial(k) for k in self.multiplicities.values())

    @property
    def factorial(self) -> int:
        """n! = prod_i n_i!, constant over the orbit."""
        return prod(factorial(x) for x in self.representative)

    def is_zero_probability(self) -> bool:
        return is_zero_event(self.representative)

    def key(self) -> tuple[int, Event]:
        return (self.total, self.representative)

    def __lt__(self, other: "Orbit") -> bool:
        return self.key() < other.key()

    def elements(self) -> Iterator[Event]:
        return orbit_elements(self.representative)

    def compressed(self) -> str:
        """E.g. ``(0,0,0,0,1,1,1,1,2)`` -> ``"0^4 1^4 2"``."""
        return " ".join(f"{v}^{k}" if k > 1 else f"{v}" for v, k in self.multiplicities.items())

    @classmethod
    def padded(cls, counts: Sequence[int], modes: int) -> "Orbit":
        counts = [int(x) for x in counts]
        if len(counts) > modes:
            raise ValueError(f"event {tuple(counts)} has more than {modes} modes")
        return cls(tuple([0] * (modes - len(counts)) + counts))


def is_zero_event(n: Sequence[int]) -> bool:
    """True when ``p(n)`` vanishes structurally: odd total or some n_i > |n|/2."""
    t = sum(n)
    return t % 2 == 1 or (t > 0 and 2 * max(n) > t)


def partitions(total: int, max_parts: int) -> list[Event]:
    """Partitions of ``total`` into at most ``max_parts`` parts.

    Each is padded with zeros to length ``max_parts`` and sorted ascending;
    the list is in lexicographic order.
    """
    if total < 0 or max_parts < 0:
        raise ValueError("total and max_parts must be non-negative")
    if total % 2:
        raise OddTotalError(f"total {total} is odd; odd totals have zero probability")
    out: list[Event] = []

    def rec(remaining, max_part, parts):
        if remaining == 0:
            out.append(tuple([0] * (max_parts - len(parts)) + parts[::-1]))
            return
        if len(parts) == max_parts:
            return
        for p in range(min(remaining, max_part), 0, -1):
            parts.append(p)
            rec(remaining - p, p, parts)
            parts.pop()

    if max_parts == 0:
        return [()] if total == 0 else []
    rec(total, total, [])
    return sorted(out)


def orbits(total: int, modes: int) -> list[Orbit]:
    return [Orbit(p) for p in partitions(total, modes)]


def orbits_up_to(max_total: int, modes: int) -> list[Orbit]:
    """Every orbit with even total ``<= max_total``, in (total, representative) order."""
    out: list[Orbit] = []
    for t in range(0, max_total + 1, 2):
        out.extend(orbits(t, modes))
    return out


SCHEDULES = ("spread", "lex")


def schedule_key(o: Orbit, schedule: str = "spread"):
    """Sort key for visiting orbits.

    ``lex`` follows (total, ascending representative).  ``spread`` keeps the
    total but puts events with small maximal counts first: within a total the
    descending-sorted counts are compared lexicographically, so
    (1,1,1,1) < (2,1,1) < (2,2) < (3,1) < (4).
    """
    if schedule == "lex":
        return o.key()
    if schedule == "spread":
        return (o.total, tuple(sorted(o.representative, reverse=True)))
    raise ValueError(f"unknown schedule {schedule!r}; choose from {SCHEDULES}")


def scheduled(orbits: Iterable[Orbit], schedule: str = "spread") -> list[Orbit]:
    return sorted(set(orbits), key=lambda o: schedule_key(o, schedule))


def orbit_size(rep: Sequence[int]) -> int:
    """Number of distinct permutations of ``rep`` (a multinomial coefficient)."""
    counts = Counter(rep)
    return factorial(len(rep)) // prod(factorial(k) for k in counts.values())


def orbit_elements(rep: Sequence[int]) -> Iterator[Event]:
    """Lazily yield every distinct permutation of ``rep`` in lexicographic order."""
    a = sorted(int(x) for x in rep)
    n = len(a)
    while True:
        yield tuple(a)
        i = n - 2
        while i >= 0 and a[i] >= a[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while a[j] <= a[i]:
            j -= 1
        a[i], a[j] = a[j], a[i]
        a[i + 1:] = reversed(a[i + 1:])


def weak_compositions(total: int, parts: int) -> Iterator[Event]:
    """All length-``parts`` vectors of non-negative ints summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in weak_compositions(total - first, parts - 1):
            yield (first,) + rest


def kron_reduced(a, n: Sequence[int]) -> np.ndarray:
    """Replicate row and column ``i`` of ``a`` ``n[i]`` times (dropping ``n[i] == 0``).

    Block ``(i, j)`` of the result is ``a[i, j] * J(n_i, n_j)``, so diagonal
    blocks carry ``a[i, i]``.  The result has order ``sum(n)``.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("kron_reduced needs a square matrix")
    if len(n) != a.shape[0]:
        raise ValueError(f"event has {len(n)} modes, matrix has order {a.shape[0]}")
    if any(int(x) < 0 for x in n):
        raise ValueError("photon counts must be non-negative")
    rows = np.repeat(np.arange(len(n)), [int(x) for x in n])
    return a[np.ix_(rows, rows)]


def direct_sum(*blocks) -> np.ndarray:
    mats = [np.asarray(b) for b in blocks]
    size = sum(m.shape[0] for m in mats)
    dtype = np.result_type(*mats) if mats else np.int64
    out = np.zeros((size, size), dtype=dtype)
    pos = 0
    for m in mats:
        k = m.shape[0]
        out[pos:pos + k, pos:pos + k] = m
        pos += k
    return out
