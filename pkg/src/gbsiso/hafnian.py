"""Exact hafnians over Python integers.

Two independent routes are provided:

* :func:`hafnian_oracle` enumerates every perfect pairing of the index set.
  It is slow ((n-1)!! terms) and exists to check the fast route.
* :func:`hafnian_fast` uses inclusion-exclusion over vertex subsets.  With
  ``E(S)`` the total edge weight inside ``S``,

      haf(M) = 1/(n/2)! * sum_S (-1)^(n-|S|) E(S)^(n/2)

  because a sequence of n/2 edges covering all n vertices is a perfect
  matching in some order.  Rows that are exact copies of each other (as
  produced by replicating modes for multi-photon events) are grouped first,
  so the sum runs over multiplicity vectors instead of subsets.

Odd-order matrices have hafnian 0; the empty matrix has hafnian 1.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb, factorial, lcm
from typing import Sequence

import numpy as np

ORACLE_LIMIT = 14
FAST_CEILING = 32

# grids larger than this are evaluated with numpy instead of a Python loop
_PY_GRID_MAX = 96
# rows per vectorised block
_BLOCK_ROWS = 1 << 16
_INT64_SAFE = 1 << 62


class HafnianLimitError(ValueError):
    """Raised when a matrix exceeds the configured size limit."""


def as_int_matrix(m) -> list[list[int]]:
    """Return ``m`` as a square, symmetric list of lists of Python ints."""
    if isinstance(m, np.ndarray):
        rows = [[int(x) for x in row] for row in m.tolist()]
    else:
        rows = [[int(x) for x in row] for row in m]
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ValueError(f"matrix is not square: row {i} has length {len(row)}, expected {n}")
    for i in range(n):
        for j in range(i + 1, n):
            if rows[i][j] != rows[j][i]:
                raise ValueError(f"matrix is not symmetric at ({i}, {j})")
    return rows


def hafnian_oracle(m, limit: int = ORACLE_LIMIT) -> int:
    """Hafnian by explicit enumeration of perfect pairings.

    Every pairing of ``{0..n-1}`` into unordered pairs of distinct indices is
    visited once; the diagonal never contributes.  Refuses matrices larger
    than ``limit`` (use :func:`hafnian_fast` for those).
    """
    a = as_int_matrix(m)
    n = len(a)
    if n > limit:
        raise HafnianLimitError(
            f"order {n} exceeds the pairing-enumeration limit {limit}; use hafnian_fast"
        )
    if n % 2:
        return 0
    return sum(_pairing_products(a, tuple(range(n))))


def _pairing_products(a, idx):
    if not idx:
        yield 1
        return
    first, rest = idx[0], idx[1:]
    for pos, partner in enumerate(rest):
        w = a[first][partner]
        remaining = rest[:pos] + rest[pos + 1:]
        for tail in _pairing_products(a, remaining):
            yield w * tail


def pairings(n: int):
    """Yield every perfect pairing of ``range(n)`` as a tuple of pairs."""
    if n % 2:
        return

    def rec(idx):
        if not idx:
            yield ()
            return
        first, rest = idx[0], idx[1:]
        for pos, partner in enumerate(rest):
            for tail in rec(rest[:pos] + rest[pos + 1:]):
                yield ((first, partner),) + tail

    yield from rec(tuple(range(n)))


def twin_classes(a: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Group indices whose rows are identical outside the group.

    Returns ``(classes, b)`` where ``b[p][q]`` is the common entry between
    classes ``p`` and ``q`` and ``b[p][p]`` is the common off-diagonal entry
    inside class ``p`` (0 for singletons; it never matters there).  The
    input then equals ``b`` with row/column ``p`` replicated ``len(classes[p])``
    times, up to its diagonal.
    """
    n = len(a)
    classes: list[list[int]] = []
    intra: list[int | None] = []
    for i in range(n):
        row_i = a[i]
        placed = False
        for c, members in enumerate(classes):
            rep = members[0]
            v = intra[c]
            if v is not None and row_i[rep] != v:
                continue
            if any(row_i[u] != row_i[rep] for u in members[1:]):
                continue
            row_r = a[rep]
            ok = True
            for k in range(n):
                if k == i or k == rep:
                    continue
                if row_i[k] != row_r[k] and k not in members:
                    ok = False
                    break
            if ok:
                members.append(i)
                intra[c] = row_i[rep]
                placed = True
                break
        if not placed:
            classes.append([i])
            intra.append(None)
    k = len(classes)
    b = [[0] * k for _ in range(k)]
    for p in range(k):
        for q in range(k):
            if p == q:
                b[p][p] = intra[p] or 0
            else:
                b[p][q] = a[classes[p][0]][classes[q][0]]
    return classes, b


def hafnian_fast(m, ceiling: int = FAST_CEILING) -> int:
    """Exact hafnian by inclusion-exclusion over (twin-compressed) subsets."""
    a = as_int_matrix(m)
    n = len(a)
    if n > ceiling:
        raise HafnianLimitError(f"order {n} exceeds the hafnian ceiling {ceiling}")
    if n % 2:
        return 0
    if n == 0:
        return 1
    classes, b = twin_classes(a)
    return hafnian_blocks(b, [len(c) for c in classes])


def hafnian_blocks(b: Sequence[Sequence[int]], mult: Sequence[int]) -> int:
    """Hafnian of ``b`` with class ``i`` replicated ``mult[i]`` times.

    Block ``(i, j)`` of the expanded matrix is filled with ``b[i][j]``,
    including diagonal blocks (whose own diagonal is ignored).  For a
    zero-diagonal adjacency matrix and a detection event this is the
    hafnian of the reduced Kronecker product without materialising it.
    """
    keep = [i for i, k in enumerate(mult) if k > 0]
    b = [[int(b[i][j]) for j in keep] for i in keep]
    mult = [int(mult[i]) for i in keep]
    n = sum(mult)
    if n % 2:
        return 0
    if n == 0:
        return 1
    half = n // 2
    grid = 1
    for k in mult:
        grid *= k + 1
    if grid <= _PY_GRID_MAX:
        total = _ie_python(b, mult, half)
    else:
        total = _ie_numpy(b, mult, half)
    q, r = divmod(total, factorial(half))
    assert r == 0, "inclusion-exclusion sum not divisible by (n/2)!"
    return q


def _edge_weight(b, s):
    e = 0
    k = len(s)
    for i in range(k):
        si = s[i]
        if not si:
            continue
        row = b[i]
        e += row[i] * (si * (si - 1) // 2)
        for j in range(i + 1, k):
            if s[j]:
                e += row[j] * si * s[j]
    return e


def _ie_python(b, mult, half):
    n = sum(mult)
    total = 0
    for s in itertools.product(*(range(k + 1) for k in mult)):
        w = 1
        for k, si in zip(mult, s):
            w *= comb(k, si)
        term = w * _edge_weight(b, s) ** half
        if (n - sum(s)) % 2:
            total -= term
        else:
            total += term
    return total


def _ie_numpy(b, mult, half):
    """Vectorised inclusion-exclusion.

    Edge weights of all multiplicity vectors are built class by class, then
    grouped by value so the big-integer powers are taken once per distinct
    weight.
    """
    k = len(mult)
    n = sum(mult)
    bound = sum(abs(b[i][j]) for i in range(k) for j in range(k)) * max(mult) ** 2 + 1
    weight_bound = 1 << n
    if bound >= _INT64_SAFE or weight_bound >= _INT64_SAFE:
        return _ie_python(b, mult, half)
    B = np.asarray(b, dtype=np.int64)

    # split classes into an inner block (vectorised) and an outer loop
    inner: list[int] = []
    size = 1
    for i in range(k):
        if size * (mult[i] + 1) > _BLOCK_ROWS:
            break
        inner.append(i)
        size *= mult[i] + 1
    outer = list(range(len(inner), k))

    E_in = np.zeros(1, dtype=np.int64)
    R_in = np.zeros((1, k), dtype=np.int64)  # row sums towards every class
    W_in = np.ones(1, dtype=np.int64)
    S_in = np.zeros(1, dtype=np.int64)
    for i in inner:
        s = np.arange(mult[i] + 1, dtype=np.int64)
        w = np.array([comb(mult[i], x) for x in range(mult[i] + 1)], dtype=np.int64)
        E_in = (E_in[:, None] + s[None, :] * R_in[:, i][:, None] + B[i, i] * (s * (s - 1) // 2)[None, :]).ravel()
        R_in = (R_in[:, None, :] + s[None, :, None] * B[i][None, None, :]).reshape(-1, k)
        W_in = (W_in[:, None] * w[None, :]).ravel()
        S_in = (S_in[:, None] + s[None, :]).ravel()

    acc: dict[int, int] = {}
    for s_out in itertools.product(*(range(mult[i] + 1) for i in outer)):
        E = E_in
        w_out = 1
        e_out = 0
        for idx, i in enumerate(outer):
            si = s_out[idx]
            w_out *= comb(mult[i], si)
            if si:
                E = E + si * R_in[:, i]
                e_out += int(B[i, i]) * (si * (si - 1) // 2)
                for jdx in range(idx + 1, len(outer)):
                    j = outer[jdx]
                    e_out += int(B[i, j]) * si * s_out[jdx]
        E = E + e_out
        parity = (n - S_in - sum(s_out)) % 2
        signed = np.where(parity == 1, -W_in, W_in) * w_out
        vals, inv = np.unique(E, return_inverse=True)
        sums = np.zeros(len(vals), dtype=np.int64)
        np.add.at(sums, inv.ravel(), signed)
        for v, c in zip(vals.tolist(), sums.tolist()):
            if c:
                acc[v] = acc.get(v, 0) + c
    return sum(c * v**half for v, c in acc.items())


def hafnian(m) -> int:
    """Exact hafnian (fast route)."""
    return hafnian_fast(m)


def hafnian_rational(m) -> Fraction:
    """Exact hafnian of a symmetric matrix with rational entries."""
    rows = [[Fraction(x) for x in row] for row in m]
    n = len(rows)
    if n % 2:
        return Fraction(0)
    den = 1
    for row in rows:
        for x in row:
            den = lcm(den, x.denominator)
    scaled = [[int(x * den) for x in row] for row in rows]
    return Fraction(hafnian_fast(scaled), den ** (n // 2))


def hafnian_squared_identity(a, c, k) -> tuple[bool, Fraction, Fraction]:
    """Evaluate both sides of ``haf(c(A+A + kI)) = c^M haf(A)^2`` exactly.

    ``A+A`` is the block-diagonal doubling of ``a`` (order ``M``, even).
    Returns ``(holds, lhs, rhs)``.
    """
    base = as_int_matrix(a)
    M = len(base)
    if M % 2:
        raise ValueError(f"identity needs an even order, got {M}")
    c = Fraction(c)
    k = Fraction(k)
    lhs_matrix = [[Fraction(0)] * (2 * M) for _ in range(2 * M)]
    for i in range(M):
        for j in range(M):
            lhs_matrix[i][j] = c * base[i][j]
            lhs_matrix[M + i][M + j] = c * base[i][j]
    for i in range(2 * M):
        lhs_matrix[i][i] += c * k
    lhs = hafnian_rational(lhs_matrix)
    rhs = c**M * hafnian_fast(base) ** 2
    return lhs == rhs, lhs, rhs


def hafnian_squared_identity_check(a, c, k) -> bool:
    return hafnian_squared_identity(a, c, k)[0]
