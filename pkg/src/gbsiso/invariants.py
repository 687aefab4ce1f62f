"""Per-orbit certificates, Gaussian moments and their comparison.

Every certificate value is exact.  For an orbit ``O`` of detection events
the certificate keeps

* the multiset of hafnians ``haf(A expanded by m)`` over ``m in O``,
* their sum and the sum of their squares,
* the per-detector photon weights ``sum_m m_k haf(m)^2``.

Orbit probabilities and photon distributions follow by multiplying with
``prefactor * c^|n| / n!``, which is common to the whole orbit.  Square roots
of probabilities reduce to plain hafnians because 0/1 matrices have
non-negative hafnians; this keeps the symmetrized sums exact integers.
"""

from __future__ import annotations

import enum
import itertools
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, prod
from typing import Iterable, Optional, Sequence

import numpy as np

from .combinatorics import Orbit, orbits_up_to, partitions, schedule_key, scheduled
from .families import disjoint_union
from .gbs import GbsEncoding, encode
from .graphs import Graph
from .hafnian import hafnian_blocks

DEFAULT_BUDGET = 10**7
MOMENT_LIMIT = 12
CHUNK = 4096

CRITERIA = ("multiset", "sum", "probability", "photon_vector_sorted")


# --- orbit certificates ----------------------------------------------------


@dataclass(frozen=True)
class OrbitCertificate:
    orbit: Orbit
    multiset: dict[int, int]
    hafnian_sum: int
    squared_sum: int
    photon_vector: tuple[int, ...]
    skipped: bool = False

    @property
    def size(self) -> int:
        return self.orbit.size

    def check(self) -> None:
        """Assert the internal bookkeeping identities."""
        if self.skipped:
            return
        assert sum(self.multiset.values()) == self.orbit.size
        assert self.hafnian_sum == sum(v * k for v, k in self.multiset.items())
        assert self.squared_sum == sum(v * v * k for v, k in self.multiset.items())
        assert sum(self.photon_vector) == self.orbit.total * self.squared_sum

    def compressed_multiset(self) -> str:
        """E.g. ``0_7 1_7 2_1``."""
        return " ".join(f"{v}_{k}" for v, k in self.multiset.items())


def _skipped(o: Orbit) -> OrbitCertificate:
    return OrbitCertificate(o, {}, 0, 0, (0,) * o.modes, skipped=True)


def _accumulate(adj: list[list[int]], events: Sequence[tuple[int, ...]], modes: int):
    counts: Counter = Counter()
    hsum = 0
    sq = 0
    vec = [0] * modes
    for m in events:
        h = hafnian_blocks(adj, m)
        counts[h] += 1
        hsum += h
        h2 = h * h
        sq += h2
        if h2:
            for i, x in enumerate(m):
                if x:
                    vec[i] += x * h2
    return counts, hsum, sq, vec


def _chunks(it, size):
    it = iter(it)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield block


def orbit_certificate(
    e: GbsEncoding,
    o: Orbit,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
    executor: Optional[ProcessPoolExecutor] = None,
) -> OrbitCertificate:
    """Certificate of one orbit.  Orbits larger than ``budget`` are returned as skipped."""
    M = e.modes
    if o.modes != M:
        raise ValueError(f"orbit has {o.modes} modes, encoding has {M}")
    if o.is_zero_probability():
        return OrbitCertificate(o, {0: o.size}, 0, 0, (0,) * M)
    if o.size > budget:
        return _skipped(o)
    adj = e.adjacency.tolist()
    counts: Counter = Counter()
    hsum = sq = 0
    vec = [0] * M
    own = None
    if executor is None and workers > 1 and o.size > CHUNK:
        executor = own = ProcessPoolExecutor(max_workers=workers)
    try:
        if executor is None:
            parts = [_accumulate(adj, list(o.elements()), M)] if o.size <= CHUNK else (
                _accumulate(adj, block, M) for block in _chunks(o.elements(), CHUNK)
            )
        else:
            parts = executor.map(_accumulate, itertools.repeat(adj), _chunks(o.elements(), CHUNK), itertools.repeat(M))
        for c, h, s, v in parts:
            counts.update(c)
            hsum += h
            sq += s
            for i, x in enumerate(v):
                vec[i] += x
    finally:
        if own is not None:
            own.shutdown()
    return OrbitCertificate(o, dict(sorted(counts.items())), hsum, sq, tuple(vec))


def orbit_probability_from(e: GbsEncoding, rec: OrbitCertificate) -> float:
    return e.prefactor * float(e.c ** rec.orbit.total * Fraction(rec.squared_sum, rec.orbit.factorial))


# --- moments -----------------------------------------------------------------


def moment(n: Sequence[int], b, limit: int = MOMENT_LIMIT) -> Fraction:
    """Gaussian moment ``d^n/dx^n exp(x^T B x / 2)`` at zero.

    Equivalently the sum over perfect pairings of the multiset with ``n_i``
    copies of index ``i`` of the products of the paired entries of ``B``
    (loops ``B_ii`` included).  Computed by pairing the first remaining copy
    with every other remaining copy.
    """
    n = tuple(int(x) for x in n)
    total = sum(n)
    if total > limit:
        raise ValueError(f"|n| = {total} exceeds the moment enumeration limit {limit}")
    if total % 2:
        return Fraction(0)
    B = tuple(tuple(Fraction(x) for x in row) for row in (b.tolist() if isinstance(b, np.ndarray) else b))
    if len(B) != len(n):
        raise ValueError(f"event has {len(n)} modes, matrix has order {len(B)}")
    return _pairing_moment(n, B)


def _pairing_moment(n: tuple[int, ...], B) -> Fraction:
    memo: dict[tuple[int, ...], Fraction] = {}

    def rec(r: tuple[int, ...]) -> Fraction:
        if r in memo:
            return memo[r]
        i = next((p for p, x in enumerate(r) if x), None)
        if i is None:
            return Fraction(1)
        rest = list(r)
        rest[i] -= 1
        total = Fraction(0)
        for j, cnt in enumerate(rest):
            if cnt and B[i][j]:
                nxt = list(rest)
                nxt[j] -= 1
                total += cnt * B[i][j] * rec(tuple(nxt))
        memo[r] = total
        return total

    return rec(n)


def moment_diagonal_shift(n: Sequence[int], a, t, limit: int = MOMENT_LIMIT) -> Fraction:
    """``moment(n, tI + A)`` for zero-diagonal ``A``, expanded in powers of ``t``.

    Choosing ``m_i`` loops at mode ``i`` contributes
    ``t^|m| prod_i n_i! / (m_i! 2^m_i (n_i - 2 m_i)!) * moment(n - 2m, A)``.
    """
    t = Fraction(t)
    return sum((cf * t**p for p, cf in enumerate(shift_polynomial(n, a, limit))), Fraction(0))


def shift_polynomial(n: Sequence[int], a, limit: int = MOMENT_LIMIT) -> list[Fraction]:
    """Coefficients ``[t^0, t^1, ...]`` of ``moment(n, tI + A)``."""
    n = tuple(int(x) for x in n)
    rows = a.tolist() if isinstance(a, np.ndarray) else a
    if any(Fraction(rows[i][i]) != 0 for i in range(len(rows))):
        raise ValueError("the shift expansion needs a zero-diagonal matrix")
    if sum(n) % 2:
        return [Fraction(0)]
    coeffs = [Fraction(0)] * (sum(n) // 2 + 1)
    for m in itertools.product(*(range(x // 2 + 1) for x in n)):
        coef = prod(
            Fraction(factorial(x), factorial(k) * 2**k * factorial(x - 2 * k)) for x, k in zip(n, m)
        )
        rest = tuple(x - 2 * k for x, k in zip(n, m))
        coeffs[sum(m)] += coef * moment(rest, rows, limit)
    return coeffs


def symmetrized_moment(n: Sequence[int], b, max_order: int = 7) -> Fraction:
    """``sum_sigma moment(n, P_sigma^T B P_sigma)`` over all mode permutations (brute force)."""
    rows = [[Fraction(x) for x in row] for row in (b.tolist() if isinstance(b, np.ndarray) else b)]
    M = len(rows)
    if M > max_order:
        raise ValueError(f"order {M} exceeds the brute-force limit {max_order}")
    total = Fraction(0)
    for perm in itertools.permutations(range(M)):
        permuted = [[rows[perm[i]][perm[j]] for j in range(M)] for i in range(M)]
        total += moment(n, permuted)
    return total


def symmetrized_moment_sum(e: GbsEncoding, o: Orbit, rec: Optional[OrbitCertificate] = None) -> int:
    """``|stabilizer| * sum of hafnians over the orbit``, the exact symmetrized sum of ``sqrt p``.

    The common factor ``sqrt(prefactor * c^|n| / n!)`` is stripped.
    """
    if o.is_zero_probability():
        return 0
    rec = rec or orbit_certificate(e, o)
    return o.stabilizer_size * rec.hafnian_sum


# --- photon distributions ----------------------------------------------------


def _photon_scale(e: GbsEncoding, o: Orbit) -> Fraction:
    return Fraction(e.c ** o.total) / o.factorial


def photon_distribution_exact(e: GbsEncoding, o: Orbit, rec: Optional[OrbitCertificate] = None) -> list[Fraction]:
    """Per-detector mean photon number over the orbit, without the prefactor."""
    rec = rec or orbit_certificate(e, o)
    s = _photon_scale(e, o)
    return [s * x for x in rec.photon_vector]


def photon_distribution(e: GbsEncoding, o: Orbit, rec: Optional[OrbitCertificate] = None) -> list[float]:
    return [e.prefactor * float(x) for x in photon_distribution_exact(e, o, rec)]


def coarse_photon_distribution_exact(e: GbsEncoding, total: int) -> list[Fraction]:
    if total % 2:
        raise ValueError(f"total {total} is odd; odd totals have zero probability")
    out = [Fraction(0)] * e.modes
    for p in partitions(total, e.modes):
        for i, x in enumerate(photon_distribution_exact(e, Orbit(p))):
            out[i] += x
    return out


def coarse_photon_distribution(e: GbsEncoding, total: int) -> list[float]:
    return [e.prefactor * float(x) for x in coarse_photon_distribution_exact(e, total)]


def photon_matrix(events: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    """Matrix with column ``m`` equal to ``m / m!``; times the squared hafnians it gives photon means."""
    M = len(events[0]) if events else 0
    return [[Fraction(m[k], prod(factorial(x) for x in m)) for m in events] for k in range(M)]


# --- certificates ------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    graph_label: Optional[str]
    graph_hash: str
    modes: int
    c: Fraction
    k: Fraction
    prefactor_sq: Fraction
    records: tuple[OrbitCertificate, ...]

    def __post_init__(self):
        keys = [r.orbit.key() for r in self.records]
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise ValueError("certificate records must be strictly increasing in (total, representative)")

    def record(self, o: Orbit) -> OrbitCertificate:
        for r in self.records:
            if r.orbit == o:
                return r
        raise KeyError(o.representative)

    @property
    def complete(self) -> bool:
        return not any(r.skipped for r in self.records)

    def probability(self, rec: OrbitCertificate) -> float:
        o = rec.orbit
        return (float(self.prefactor_sq) ** 0.5) * float(self.c ** o.total * Fraction(rec.squared_sum, o.factorial))

    def to_json(self) -> dict:
        return {
            "graph": self.graph_label,
            "graph_hash": self.graph_hash,
            "modes": self.modes,
            "c": f"{self.c.numerator}/{self.c.denominator}",
            "k": f"{self.k.numerator}/{self.k.denominator}",
            "prefactor_squared": f"{self.prefactor_sq.numerator}/{self.prefactor_sq.denominator}",
            "records": [record_to_json(r, self) for r in self.records],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, obj: dict) -> "Certificate":
        return cls(
            graph_label=obj.get("graph"),
            graph_hash=obj["graph_hash"],
            modes=int(obj["modes"]),
            c=Fraction(obj["c"]),
            k=Fraction(obj["k"]),
            prefactor_sq=Fraction(obj["prefactor_squared"]),
            records=tuple(record_from_json(r, int(obj["modes"])) for r in obj["records"]),
        )


def record_to_json(r: OrbitCertificate, cert: Optional[Certificate] = None) -> dict:
    out = {
        "orbit": list(r.orbit.representative),
        "size": str(r.orbit.size),
        "skipped": r.skipped,
    }
    if not r.skipped:
        out.update({
            "multiset": {str(v): str(k) for v, k in r.multiset.items()},
            "sum": str(r.hafnian_sum),
            "squared_sum": str(r.squared_sum),
            "photon_vector": [f"{x}/1" for x in r.photon_vector],
        })
        if cert is not None:
            out["probability"] = cert.probability(r)
    return out


def record_from_json(obj: dict, modes: int) -> OrbitCertificate:
    o = Orbit(tuple(obj["orbit"]))
    if obj.get("skipped"):
        return _skipped(o)
    return OrbitCertificate(
        orbit=o,
        multiset=dict(sorted((int(v), int(k)) for v, k in obj["multiset"].items())),
        hafnian_sum=int(obj["sum"]),
        squared_sum=int(obj["squared_sum"]),
        photon_vector=tuple(int(Fraction(x)) for x in obj["photon_vector"]),
    )


def certificate_from_records(e: GbsEncoding, records: Iterable[OrbitCertificate]) -> Certificate:
    recs = tuple(sorted(records, key=lambda r: r.orbit.key()))
    return Certificate(e.graph.label, e.graph.content_hash(), e.modes, e.c, e.k, e.prefactor_sq, recs)


def build_certificate(
    e: GbsEncoding,
    orbits: Optional[Iterable[Orbit]] = None,
    max_total: Optional[int] = None,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
) -> Certificate:
    """Certificate over explicit ``orbits`` or over every orbit with ``|n| <= max_total``."""
    if orbits is None:
        if max_total is None:
            raise ValueError("give either orbits or max_total")
        orbits = orbits_up_to(max_total, e.modes)
    orbits = sorted(set(orbits))
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        recs = [orbit_certificate(e, o, workers=workers, budget=budget, executor=executor) for o in orbits]
    finally:
        if executor is not None:
            executor.shutdown()
    return certificate_from_records(e, recs)


def hierarchy_certificate(g: Graph, copies: int, orbits=None, max_total=None, c=None, k=0, **kw) -> Certificate:
    """Certificate of the disjoint union of ``copies`` copies of ``g``."""
    if copies < 1:
        raise ValueError("copies must be >= 1")
    h = g if copies == 1 else disjoint_union(g, copies)
    return build_certificate(encode(h, c, k), orbits=orbits, max_total=max_total, **kw)


# --- comparison --------------------------------------------------------------


class Verdict(enum.Enum):
    DISTINGUISHED = "DISTINGUISHED"
    UNDISTINGUISHED_UP_TO_LIMIT = "UNDISTINGUISHED_UP_TO_LIMIT"


@dataclass(frozen=True)
class OrbitComparison:
    orbit: Orbit
    results: dict[str, bool]  # criterion -> values agree
    skipped: bool = False

    @property
    def first_difference(self) -> Optional[str]:
        return next((c for c in CRITERIA if c in self.results and not self.results[c]), None)


@dataclass(frozen=True)
class ComparisonReport:
    verdict: Verdict
    threshold_orbit: Optional[Orbit] = None
    separating_criterion: Optional[str] = None
    details: tuple[OrbitComparison, ...] = field(default=())
    reason: str = ""

    @property
    def distinguished(self) -> bool:
        return self.verdict is Verdict.DISTINGUISHED

    @property
    def incomplete(self) -> bool:
        return any(d.skipped for d in self.details)

    def summary(self) -> str:
        if self.distinguished:
            where = f" at orbit {self.threshold_orbit.compressed()}" if self.threshold_orbit else ""
            return f"{self.verdict.value}{where} ({self.separating_criterion})"
        tail = " (some orbits skipped)" if self.incomplete else ""
        return f"{self.verdict.value}{tail}"


def compare_records(
    r1: OrbitCertificate, r2: OrbitCertificate, pf1: Fraction, pf2: Fraction, criteria=CRITERIA
) -> OrbitComparison:
    if r1.orbit != r2.orbit:
        raise ValueError(f"orbit mismatch {r1.orbit.representative} vs {r2.orbit.representative}")
    if r1.skipped or r2.skipped:
        return OrbitComparison(r1.orbit, {}, skipped=True)
    res = {}
    for crit in CRITERIA:
        if crit == "multiset":
            res[crit] = r1.multiset == r2.multiset
        elif crit == "sum":
            res[crit] = r1.hafnian_sum == r2.hafnian_sum
        elif crit == "probability":
            # p = sqrt(pf) * common * squared_sum, so compare pf * squared_sum^2
            res[crit] = pf1 * r1.squared_sum**2 == pf2 * r2.squared_sum**2
        elif crit == "photon_vector_sorted":
            res[crit] = sorted(r1.photon_vector) == sorted(r2.photon_vector)
    active = {c: v for c, v in res.items() if c in criteria}
    return OrbitComparison(r1.orbit, active)


def compare_certificates(
    c1: Certificate, c2: Certificate, criteria: Sequence[str] = CRITERIA, schedule: str = "spread"
) -> ComparisonReport:
    """Walk orbits in ``schedule`` order and report the first one whose certificates differ.

    Agreement on every orbit is reported as UNDISTINGUISHED_UP_TO_LIMIT, which
    is not a proof of isomorphism.
    """
    unknown = set(criteria) - set(CRITERIA)
    if unknown:
        raise ValueError(f"unknown criteria {sorted(unknown)}; choose from {CRITERIA}")
    if (c1.c, c1.k, c1.modes) != (c2.c, c2.k, c2.modes):
        raise ValueError(
            f"encoding parameters differ: (c={c1.c}, k={c1.k}, M={c1.modes}) vs (c={c2.c}, k={c2.k}, M={c2.modes})"
        )
    keys1 = [r.orbit.key() for r in c1.records]
    keys2 = [r.orbit.key() for r in c2.records]
    if keys1 != keys2:
        raise ValueError("certificates cover different orbit sets")
    details = []
    pairs = sorted(zip(c1.records, c2.records), key=lambda rr: schedule_key(rr[0].orbit, schedule))
    for r1, r2 in pairs:
        d = compare_records(r1, r2, c1.prefactor_sq, c2.prefactor_sq, criteria)
        details.append(d)
        crit = d.first_difference
        if crit is not None:
            return ComparisonReport(Verdict.DISTINGUISHED, r1.orbit, crit, tuple(details))
    return ComparisonReport(Verdict.UNDISTINGUISHED_UP_TO_LIMIT, details=tuple(details))


def permutational_similarity_brute(s1, s2, max_order: int = 5) -> bool:
    """Whether ``s2 = P^T s1 P`` for some permutation matrix ``P`` (exhaustive)."""
    a = [[Fraction(x) for x in row] for row in (s1.tolist() if isinstance(s1, np.ndarray) else s1)]
    b = [[Fraction(x) for x in row] for row in (s2.tolist() if isinstance(s2, np.ndarray) else s2)]
    n = len(a)
    if n != len(b):
        return False
    if n > max_order:
        raise ValueError(f"order {n} exceeds the brute-force limit {max_order}")
    return any(
        all(a[p[i]][p[j]] == b[i][j] for i in range(n) for j in range(n))
        for p in itertools.permutations(range(n))
    )



def compare_encodings(
    e1: GbsEncoding,
    e2: GbsEncoding,
    orbits: Iterable[Orbit],
    criteria: Sequence[str] = CRITERIA,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
    schedule: str = "spread",
) -> tuple[ComparisonReport, Certificate, Certificate]:
    """Certify both graphs orbit by orbit and stop at the first separation."""
    if (e1.c, e1.k, e1.modes) != (e2.c, e2.k, e2.modes):
        raise ValueError("encodings must share c, k and the number of modes")
    recs1, recs2, details = [], [], []
    for o in scheduled(orbits, schedule):
        r1 = orbit_certificate(e1, o, workers=workers, budget=budget)
        r2 = orbit_certificate(e2, o, workers=workers, budget=budget)
        recs1.append(r1)
        recs2.append(r2)
        d = compare_records(r1, r2, e1.prefactor_sq, e2.prefactor_sq, criteria)
        details.append(d)
        if d.first_difference is not None:
            report = ComparisonReport(Verdict.DISTINGUISHED, o, d.first_difference, tuple(details))
            break
    else:
        report = ComparisonReport(Verdict.UNDISTINGUISHED_UP_TO_LIMIT, details=tuple(details))
    return report, certificate_from_records(e1, recs1), certificate_from_records(e2, recs2)
