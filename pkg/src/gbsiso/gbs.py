"""Encoding graphs as Gaussian boson sampling devices and exact event probabilities.

A graph with adjacency ``A`` (order ``M``) is encoded in ``2M`` modes by the
doubled matrix ``R = c (A + A + k I)``.  With ``lam_i`` the eigenvalues of
``A + kI`` the normalisation is

    1/sqrt(det sigma_Q) = sqrt(prod_i (1 - c^2 lam_i^2)) = sqrt(det(I - c^2 (A + kI)^2))

and the probability of detection event ``n`` is

    p(n) = prefactor * c^|n| * haf(A expanded by n)^2 / n!

Hafnians stay exact; ``prefactor**2`` is an exact rational and only the final
square root is a float.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .combinatorics import Orbit, is_zero_event, partitions
from .graphs import Graph, spectrum
from .hafnian import hafnian_blocks

BOUNDARY_TOL = 1e-12
DEFAULT_C_DENOMINATOR = 10**6
ORACLE_MAX_PHOTONS = 8
ORACLE_MAX_MODES = 6


class EncodingError(ValueError):
    pass


# --- exact linear algebra helpers -------------------------------------------


def _fraction_det(rows: list[list[Fraction]]) -> Fraction:
    """Determinant by Gaussian elimination over the rationals."""
    m = [list(r) for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        p = m[col][col]
        det *= p
        for r in range(col + 1, n):
            f = m[r][col]
            if f:
                f /= p
                row_r, row_c = m[r], m[col]
                for j in range(col, n):
                    row_r[j] -= f * row_c[j]
    return det


def prefactor_squared(adjacency, c: Fraction, k: Fraction = Fraction(0)) -> Fraction:
    """``det(I - c^2 (A + kI)^2)``, i.e. ``1/det sigma_Q``, exactly."""
    a = np.asarray(adjacency, dtype=np.int64)
    n = a.shape[0]
    sq = (a @ a).tolist()
    deg = a.tolist()
    c2 = c * c
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            # (A + kI)^2 = A^2 + 2kA + k^2 I
            v = Fraction(sq[i][j]) + 2 * k * deg[i][j] + (k * k if i == j else 0)
            row.append((1 if i == j else 0) - c2 * v)
        rows.append(row)
    return _fraction_det(rows)


# --- encodability ------------------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class EncodabilityReport:
    conditions: tuple[ConditionResult, ...]

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.conditions)

    def __bool__(self):
        return self.ok

    def failures(self) -> list[str]:
        return [f"{r.name}: {r.detail}" if r.detail else r.name for r in self.conditions if not r.passed]


def check_encodable(r, c, tol: float = BOUNDARY_TOL) -> EncodabilityReport:
    """Check that ``c * r`` can be the encoding matrix of a pure Gaussian state.

    ``r`` is a real symmetric ``2M x 2M`` matrix split into ``M x M`` blocks.
    Conditions: equal diagonal blocks and equal off-diagonal blocks, a positive
    semidefinite off-diagonal block, and ``0 < c < 1/||r||_2``.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("encoding matrix must be square")
    if r.shape[0] % 2:
        raise ValueError(f"encoding matrix must have even order, got {r.shape[0]}")
    if not np.allclose(r, r.T, atol=tol):
        raise ValueError("encoding matrix must be symmetric")
    m = r.shape[0] // 2
    r11, r12, r21, r22 = r[:m, :m], r[:m, m:], r[m:, :m], r[m:, m:]
    out = []

    blocks_equal = np.allclose(r11, r22, atol=tol) and np.allclose(r12, r21, atol=tol)
    detail = "" if blocks_equal else "R11 != R22 or R12 != R21"
    out.append(ConditionResult("block symmetry", bool(blocks_equal), detail))

    low = float(np.linalg.eigvalsh((r12 + r12.T) / 2).min()) if m else 0.0
    psd = low >= -1e-9
    out.append(ConditionResult(
        "R12 positive semidefinite", psd,
        "" if psd else f"R12 not positive semidefinite (smallest eigenvalue {low:.6g})",
    ))

    norm = float(np.linalg.norm(r, 2)) if m else 0.0
    cf = float(c)
    in_range = cf > 0 and cf * norm < 1 - tol
    bound = "inf" if norm == 0 else f"{1 / norm:.12g}"
    out.append(ConditionResult(
        "scaling in range", in_range,
        "" if in_range else f"c={c} outside (0, 1/||R||_2) = (0, {bound})",
    ))
    return EncodabilityReport(tuple(out))


# --- encoding ----------------------------------------------------------------


def default_scale(norm: float, k=0, denominator: int = DEFAULT_C_DENOMINATOR) -> Fraction:
    """``1/(norm + k + 1)`` rounded down to a multiple of ``1/denominator``."""
    target = 1.0 / (norm + float(k) + 1.0)
    num = math.floor(target * denominator)
    while num <= 0:
        denominator *= 1000
        num = math.floor(target * denominator)
    return Fraction(num, denominator)


def parse_rational(text) -> Fraction:
    """Parse ``"1/6.9"``, ``"0.125"``, ``"3/20"`` or a number into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, (int, float)):
        return Fraction(str(text)) if isinstance(text, float) else Fraction(text)
    s = str(text).strip()
    try:
        if "/" in s:
            a, b = s.split("/", 1)
            return Fraction(a.strip()) / Fraction(b.strip())
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse {text!r} as a rational number") from exc


@dataclass(frozen=True)
class GbsEncoding:
    graph: Graph
    c: Fraction
    k: Fraction
    spectral_norm: float
    prefactor_sq: Fraction = field(repr=False)

    @property
    def modes(self) -> int:
        return self.graph.order

    @property
    def det_sigma_q(self) -> float:
        return float(1 / self.prefactor_sq)

    @property
    def prefactor(self) -> float:
        return math.sqrt(self.prefactor_sq)

    @property
    def adjacency(self) -> np.ndarray:
        return self.graph.adjacency

    def encoding_matrix(self) -> list[list[Fraction]]:
        """``c (A + A + kI)`` as a ``2M x 2M`` list of Fractions."""
        a = self.graph.adjacency.tolist()
        M = self.modes
        out = [[Fraction(0)] * (2 * M) for _ in range(2 * M)]
        for i in range(M):
            for j in range(M):
                out[i][j] = out[M + i][M + j] = self.c * a[i][j]
        for i in range(2 * M):
            out[i][i] += self.c * self.k
        return out


def encode(g: Graph, c=None, k=0) -> GbsEncoding:
    """Encode ``g`` with scale ``c`` (auto-selected when None) and diagonal shift ``k``."""
    k = parse_rational(k)
    if k < 0:
        raise EncodingError(f"diagonal shift k must be non-negative, got {k}")
    norm = spectrum(g).spectral_norm
    if c is None:
        c = default_scale(norm, k)
    c = parse_rational(c)
    limit = norm + float(k)
    if c <= 0 or float(c) * limit >= 1 - BOUNDARY_TOL:
        bound = "inf" if limit == 0 else f"{1 / limit:.12g}"
        raise EncodingError(f"c={c} ({float(c):.12g}) must satisfy 0 < c < 1/(||A||_2 + k) = {bound}")
    pf = prefactor_squared(g.adjacency, c, k)
    if pf <= 0:
        raise EncodingError(f"non-positive normalisation {pf} for c={c}, k={k}")
    return GbsEncoding(graph=g, c=c, k=k, spectral_norm=norm, prefactor_sq=pf)


def sigma_q_dense(e: GbsEncoding) -> float:
    """``det sigma_Q`` from ``(I - X C)^-1`` built densely in ``2M`` modes (test oracle)."""
    M = e.modes
    a = e.adjacency.astype(float)
    C = float(e.c) * (np.kron(np.eye(2), a) + float(e.k) * np.eye(2 * M))
    X = np.block([[np.zeros((M, M)), np.eye(M)], [np.eye(M), np.zeros((M, M))]])
    sigma_q = np.linalg.inv(np.eye(2 * M) - X @ C)
    return float(np.linalg.det(sigma_q))


# --- probabilities -----------------------------------------------------------


@dataclass(frozen=True)
class ProbabilityRecord:
    event: tuple[int, ...]
    hafnian_value: int
    core: Fraction  # c^|n| haf^2 / n!, the probability without the prefactor
    probability: float


def _check_event(e: GbsEncoding, n: Sequence[int]) -> tuple[int, ...]:
    n = tuple(int(x) for x in n)
    if len(n) != e.modes:
        raise ValueError(f"event has {len(n)} modes, encoding has {e.modes}")
    if any(x < 0 for x in n):
        raise ValueError(f"negative photon count in {n}")
    return n


def event_hafnian(adjacency, n: Sequence[int]) -> int:
    """``haf`` of the adjacency matrix expanded by event ``n``, short-circuiting zero events."""
    if is_zero_event(n):
        return 0
    a = adjacency.tolist() if isinstance(adjacency, np.ndarray) else adjacency
    return hafnian_blocks(a, n)


def n_factorial(n: Sequence[int]) -> int:
    return math.prod(math.factorial(x) for x in n)


def event_probability(e: GbsEncoding, n: Sequence[int]) -> ProbabilityRecord:
    n = _check_event(e, n)
    h = event_hafnian(e.adjacency, n)
    core = e.c ** sum(n) * h * h / n_factorial(n)
    return ProbabilityRecord(n, h, Fraction(core), e.prefactor * float(core))


def _shift_add(dst, src, coef, axes):
    """``dst += coef * src`` shifted by one step along each of ``axes`` (truncated)."""
    src_idx = [slice(None)] * src.ndim
    dst_idx = [slice(None)] * src.ndim
    for ax in set(axes):
        step = axes.count(ax)
        if src.shape[ax] <= step:
            return
        src_idx[ax] = slice(0, src.shape[ax] - step)
        dst_idx[ax] = slice(step, None)
    dst[tuple(dst_idx)] += coef * src[tuple(src_idx)]


def derivative_core(e: GbsEncoding, n: Sequence[int]) -> Fraction:
    """Probability without prefactor, from the Taylor expansion of ``exp(g^T R g / 2)``.

    ``g = (beta, conj(beta))`` runs over ``2M`` variables.  The coefficient of
    ``beta^n conj(beta)^n`` in ``(g^T R g / 2)^|n| / |n|!`` times ``n!^2``
    is the mixed derivative at zero; dividing by ``n!`` gives the probability.
    Polynomials are dense integer arrays truncated at exponent ``n_i`` per
    variable, so only modes with ``n_i > 0`` are kept.
    """
    n = _check_event(e, n)
    total = sum(n)
    if total % 2:
        return Fraction(0)
    support = [i for i, x in enumerate(n) if x > 0]
    if not support:
        return Fraction(1)
    a = e.adjacency
    kn, kd = e.k.numerator, e.k.denominator
    m = len(support)
    # variables 0..m-1 are beta over the support, m..2m-1 their conjugates
    caps = [n[i] for i in support] * 2
    # g^T S g with S = kd (A + A) + kn I, written as monomial terms
    terms: list[tuple[int, tuple[int, ...]]] = []
    for half in (0, m):
        for p in range(m):
            if kn:
                terms.append((kn, (half + p, half + p)))
            for q in range(p + 1, m):
                w = int(a[support[p], support[q]]) * kd
                if w:
                    terms.append((2 * w, (half + p, half + q)))
    bound = sum(abs(w) for w, _ in terms) ** total
    dtype = np.int64 if bound < (1 << 62) else object
    poly = np.zeros([x + 1 for x in caps], dtype=dtype)
    poly[(0,) * (2 * m)] = 1
    for _ in range(total):
        nxt = np.zeros_like(poly)
        for w, axes in terms:
            _shift_add(nxt, poly, w, list(axes))
        poly = nxt
    coef = int(poly[tuple(caps)])
    # (g^T R g / 2) = c/(2 kd) * g^T S g
    scale = (e.c / (2 * kd)) ** total / math.factorial(total)
    return scale * coef * n_factorial(n)


def derivative_probability_oracle(e: GbsEncoding, n: Sequence[int]) -> float:
    n = _check_event(e, n)
    if sum(n) > ORACLE_MAX_PHOTONS or e.modes > ORACLE_MAX_MODES:
        raise ValueError(
            f"derivative oracle limited to |n| <= {ORACLE_MAX_PHOTONS} and M <= {ORACLE_MAX_MODES}"
        )
    return e.prefactor * float(derivative_core(e, n))


def orbit_core(e: GbsEncoding, o: Orbit, squared_sum: int | None = None) -> Fraction:
    """``c^|n| / n! * sum_{m in orbit} haf(m)^2`` exactly."""
    if len(o.representative) != e.modes:
        raise ValueError(f"orbit has {o.modes} modes, encoding has {e.modes}")
    if o.is_zero_probability():
        return Fraction(0)
    if squared_sum is None:
        a = e.adjacency.tolist()
        squared_sum = sum(hafnian_blocks(a, m) ** 2 for m in o.elements())
    return Fraction(e.c ** o.total * squared_sum, o.factorial)


def orbit_probability(e: GbsEncoding, o: Orbit, squared_sum: int | None = None) -> float:
    return e.prefactor * float(orbit_core(e, o, squared_sum))


def partition_probability(e: GbsEncoding, total: int) -> float:
    return e.prefactor * float(partition_core(e, total))


def partition_core(e: GbsEncoding, total: int) -> Fraction:
    if total % 2:
        raise ValueError(f"total {total} is odd; odd totals have zero probability")
    return sum((orbit_core(e, Orbit(p)) for p in partitions(total, e.modes)), Fraction(0))


def all_events(modes: int, max_total: int):
    """Every event on ``modes`` modes with total ``<= max_total`` (small cases only)."""
    return (n for n in itertools.product(range(max_total + 1), repeat=modes) if sum(n) <= max_total)
