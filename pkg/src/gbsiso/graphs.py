"""Simple undirected graphs: ingestion, spectra, SRG checks and small-graph oracles.

Vertices are 0-indexed everywhere in code and in the JSON format.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

COSPECTRAL_TOL = 1e-9
BRUTE_FORCE_LIMIT = 10
ENUMERATION_LIMIT = 7


class GraphFormatError(ValueError):
    """Malformed graph input."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph stored as a read-only 0/1 adjacency matrix."""

    adjacency: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=np.int64, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphFormatError(f"adjacency must be square, got shape {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise GraphFormatError("adjacency entries must be 0 or 1")
        if (a != a.T).any():
            raise GraphFormatError("adjacency must be symmetric")
        if np.diag(a).any():
            raise GraphFormatError("adjacency must have a zero diagonal")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def order(self) -> int:
        return self.adjacency.shape[0]

    @classmethod
    def from_edges(cls, order: int, edges: Iterable[Sequence[int]], label: Optional[str] = None) -> "Graph":
        a = np.zeros((order, order), dtype=np.int64)
        for e in edges:
            i, j = (int(x) for x in e)
            if not (0 <= i < order and 0 <= j < order):
                raise GraphFormatError(f"edge {(i, j)} out of range for order {order}")
            if i == j:
                raise GraphFormatError(f"self-loop at vertex {i}")
            a[i, j] = a[j, i] = 1
        return cls(a, label)

    def edges(self) -> list[tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def degrees(self) -> list[int]:
        return self.adjacency.sum(axis=1).tolist()

    def relabel(self, label: Optional[str]) -> "Graph":
        return Graph(self.adjacency, label)

    def content_hash(self) -> str:
        return hashlib.sha256(emit_graph6(self).encode()).hexdigest()

    def same_adjacency(self, other: "Graph") -> bool:
        return self.adjacency.shape == other.adjacency.shape and bool((self.adjacency == other.adjacency).all())

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.same_adjacency(other) and self.label == other.label

    def __hash__(self):
        return hash((self.adjacency.tobytes(), self.order, self.label))

    def __repr__(self):
        name = f" {self.label!r}" if self.label else ""
        return f"<Graph{name} order={self.order} edges={len(self.edges())}>"


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple[float, ...]  # descending
    spectral_norm: float


@dataclass(frozen=True)
class SrgParams:
    N: int
    k: int
    lam: int
    mu: int

    def identity_holds(self) -> bool:
        return self.k * (self.k - self.lam - 1) == self.mu * (self.N - self.k - 1)

    def __str__(self):
        return f"SRG({self.N},{self.k},{self.lam},{self.mu})"


# ---------------------------------------------------------------------------
# graph6

def _g6_size_chars(n: int) -> str:
    if n < 63:
        return chr(n + 63)
    if n < 258048:
        return "~" + "".join(chr(((n >> s) & 63) + 63) for s in (12, 6, 0))
    return "~~" + "".join(chr(((n >> s) & 63) + 63) for s in (30, 24, 18, 12, 6, 0))


def emit_graph6(g: Graph) -> str:
    """Encode ``g`` as a graph6 string (no header, no newline)."""
    n = g.order
    a = g.adjacency
    bits = [int(a[i, j]) for j in range(1, n) for i in range(j)]
    bits += [0] * (-len(bits) % 6)
    body = "".join(
        chr(63 + int("".join(map(str, bits[p:p + 6])), 2)) for p in range(0, len(bits), 6)
    )
    return _g6_size_chars(n) + body


def parse_graph6(text: str, label: Optional[str] = None) -> Graph:
    """Decode one graph6 string.  Errors name the offending byte offset."""
    s = text.strip()
    offset = 0
    if s.startswith(">>graph6<<"):
        s = s[10:]
        offset = 10
    if not s:
        raise GraphFormatError("empty graph6 string")
    for pos, ch in enumerate(s):
        if not 63 <= ord(ch) <= 126:
            raise GraphFormatError(f"byte {offset + pos}: character {ch!r} outside graph6 range 63..126")
    vals = [ord(ch) - 63 for ch in s]
    if vals[0] == 63:
        if len(vals) >= 2 and vals[1] == 63:
            if len(vals) < 8:
                raise GraphFormatError(f"byte {offset}: truncated 8-byte order header")
            n = 0
            for v in vals[2:8]:
                n = (n << 6) | v
            pos = 8
        else:
            if len(vals) < 4:
                raise GraphFormatError(f"byte {offset}: truncated 4-byte order header")
            n = (vals[1] << 12) | (vals[2] << 6) | vals[3]
            pos = 4
    else:
        n = vals[0]
        pos = 1
    nbits = n * (n - 1) // 2
    need = -(-nbits // 6)
    body = vals[pos:]
    if len(body) != need:
        raise GraphFormatError(
            f"byte {offset + pos}: expected {need} data bytes for order {n}, found {len(body)}"
        )
    a = np.zeros((n, n), dtype=np.int64)
    pairs = [(i, j) for j in range(1, n) for i in range(j)]
    idx = 0
    for bpos, v in enumerate(body):
        for shift in range(5, -1, -1):
            bit = (v >> shift) & 1
            if idx < nbits:
                if bit:
                    i, j = pairs[idx]
                    a[i, j] = a[j, i] = 1
            elif bit:
                raise GraphFormatError(f"byte {offset + pos + bpos}: non-zero padding bit")
            idx += 1
    return Graph(a, label)


def read_graph6_lines(lines: Iterable[str], stem: str = "g") -> list[Graph]:
    """Parse one graph per non-blank line; labels are ``stem[i]``."""
    graphs = []
    for lineno, line in enumerate(lines):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            graphs.append(parse_graph6(line, label=f"{stem}[{len(graphs)}]"))
        except GraphFormatError as exc:
            raise GraphFormatError(f"line {lineno + 1}: {exc}") from None
    return graphs


# ---------------------------------------------------------------------------
# JSON: {"order": int, "edges": [[i, j], ...], "label": str}; a file may hold
# one such object or a list of them.

def graph_to_json(g: Graph) -> dict:
    d = {"order": g.order, "edges": [list(e) for e in g.edges()]}
    if g.label is not None:
        d["label"] = g.label
    return d


def graph_from_json(obj: dict) -> Graph:
    try:
        order = int(obj["order"])
        edges = obj["edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"bad graph JSON object: {exc}") from None
    return Graph.from_edges(order, edges, obj.get("label"))


def read_graph_file(path, fmt: Optional[str] = None) -> list[Graph]:
    """Read every graph in ``path`` (graph6 lines or JSON)."""
    from pathlib import Path

    path = Path(path)
    text = path.read_text()
    if fmt is None:
        fmt = "json" if path.suffix.lower() == ".json" or text.lstrip().startswith(("{", "[")) else "graph6"
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"{path}: {exc}") from None
        items = data if isinstance(data, list) else [data]
        graphs = [graph_from_json(d) for d in items]
        return [g if g.label else g.relabel(f"{path.stem}[{i}]") for i, g in enumerate(graphs)]
    if fmt == "graph6":
        return read_graph6_lines(text.splitlines(), stem=path.stem)
    raise GraphFormatError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# spectra

def spectrum(g: Graph) -> Spectrum:
    """Adjacency eigenvalues, descending (``numpy.linalg.eigvalsh``, ~1e-12 accurate here)."""
    if g.order == 0:
        return Spectrum((), 0.0)
    ev = np.linalg.eigvalsh(g.adjacency.astype(float))[::-1]
    return Spectrum(tuple(float(x) for x in ev), float(max(abs(ev[0]), abs(ev[-1]))))


def is_cospectral(g1: Graph, g2: Graph, tol: float = COSPECTRAL_TOL) -> bool:
    if g1.order != g2.order:
        raise ValueError(f"order mismatch: {g1.order} vs {g2.order}")
    e1 = np.array(spectrum(g1).eigenvalues)
    e2 = np.array(spectrum(g2).eigenvalues)
    return bool(np.all(np.abs(e1 - e2) <= tol))


def characteristic_polynomial(g: Graph) -> tuple[int, ...]:
    """Exact integer coefficients of det(xI - A), leading coefficient first.

    Faddeev-LeVerrier; every division is exact for integer matrices.
    """
    n = g.order
    A = g.adjacency.astype(object) if n > 20 else g.adjacency.astype(np.int64)
    coeffs = [1]
    Mk = np.zeros((n, n), dtype=A.dtype)
    eye = np.eye(n, dtype=A.dtype)
    for k in range(1, n + 1):
        Mk = A @ Mk + coeffs[-1] * eye
        tr = int(np.trace(A @ Mk))
        assert tr % k == 0
        coeffs.append(-tr // k)
    return tuple(coeffs)


# ---------------------------------------------------------------------------
# strongly regular graphs

def validate_srg(g: Graph) -> Optional[SrgParams]:
    """Return SRG parameters if ``g`` is strongly regular, else ``None``."""
    a = g.adjacency
    n = g.order
    if n < 2:
        return None
    deg = a.sum(axis=1)
    k = int(deg[0])
    if (deg != k).any() or k == 0 or k == n - 1:
        return None
    common = a @ a
    off = ~np.eye(n, dtype=bool)
    adj = (a == 1) & off
    non = (a == 0) & off
    lam_vals = np.unique(common[adj])
    mu_vals = np.unique(common[non])
    if len(lam_vals) != 1 or len(mu_vals) != 1:
        return None
    params = SrgParams(n, k, int(lam_vals[0]), int(mu_vals[0]))
    assert params.identity_holds()
    return params


def srg_eigenvalues(p: SrgParams) -> list[tuple[float, int]]:
    """Eigenvalues with multiplicities from the SRG parameters alone."""
    N, k, lam, mu = p.N, p.k, p.lam, p.mu
    disc = (lam - mu) ** 2 + 4 * (k - mu)
    r = ((lam - mu) + np.sqrt(disc)) / 2
    s = ((lam - mu) - np.sqrt(disc)) / 2
    f = ((N - 1) * (-s) - k) / (r - s)
    g = (N - 1) - f
    return [(float(k), 1), (float(r), int(round(f))), (float(s), int(round(g)))]


# ---------------------------------------------------------------------------
# permutations and isomorphism oracles

def apply_permutation(g: Graph, perm: Sequence[int], label: Optional[str] = None) -> Graph:
    """Return the graph with adjacency ``P^T A P`` where ``P[perm[i], i] = 1``.

    Equivalently ``A'[i, j] = A[perm[i], perm[j]]``.
    """
    p = np.asarray(perm, dtype=np.int64)
    if p.shape != (g.order,):
        raise ValueError(f"permutation of degree {len(p)} applied to graph of order {g.order}")
    if sorted(p.tolist()) != list(range(g.order)):
        raise ValueError("not a permutation")
    return Graph(g.adjacency[np.ix_(p, p)], label if label is not None else g.label)


def brute_force_isomorphic(g1: Graph, g2: Graph, limit: int = BRUTE_FORCE_LIMIT) -> Optional[tuple[int, ...]]:
    """Exhaustive search for ``perm`` with ``apply_permutation(g2, perm) == g1``.

    Candidates are restricted to degree-preserving maps.  Refuses graphs of
    order above ``limit``; larger pairs are separated by certificates instead.
    """
    if g1.order != g2.order:
        raise ValueError(f"order mismatch: {g1.order} vs {g2.order}")
    n = g1.order
    if n > limit:
        raise ValueError(f"order {n} above brute-force limit {limit}")
    a1, a2 = g1.adjacency, g2.adjacency
    d1, d2 = a1.sum(1), a2.sum(1)
    if sorted(d1.tolist()) != sorted(d2.tolist()):
        return None
    perm = [-1] * n
    used = [False] * n

    def extend(i):
        if i == n:
            return True
        for v in range(n):
            if used[v] or d2[v] != d1[i]:
                continue
            if any(a1[i, j] != a2[v, perm[j]] for j in range(i)):
                continue
            perm[i] = v
            used[v] = True
            if extend(i + 1):
                return True
            used[v] = False
        return False

    return tuple(perm) if extend(0) else None


def _refined_colors(a: np.ndarray) -> list[int]:
    """Colour refinement (1-WL) with isomorphism-invariant colour names."""
    n = a.shape[0]
    colors = a.sum(1).tolist()
    nbrs = [np.nonzero(a[i])[0].tolist() for i in range(n)]
    while True:
        sig = [(colors[i], tuple(sorted(colors[j] for j in nbrs[i]))) for i in range(n)]
        names = {s: r for r, s in enumerate(sorted(set(sig)))}
        new = [names[s] for s in sig]
        if len(set(new)) == len(set(colors)):
            return new
        colors = new


def canonical_form(g: Graph) -> bytes:
    """Canonical adjacency bytes: lexicographic maximum over colour-respecting orders.

    Exponential in the sizes of colour classes; intended for order <= 8.
    """
    a = g.adjacency
    n = g.order
    if n < 2:
        return bytes([n])
    colors = _refined_colors(a)
    classes = [[v for v in range(n) if colors[v] == c] for c in sorted(set(colors))]
    per_class = [np.array(list(itertools.permutations(c)), dtype=np.int64) for c in classes]
    # cartesian product of per-class orderings, concatenated
    perms = per_class[0]
    for block in per_class[1:]:
        perms = np.concatenate(
            [np.repeat(perms, len(block), axis=0), np.tile(block, (len(perms), 1))], axis=1
        )
    iu, ju = np.triu_indices(n, 1)
    best = None
    for start in range(0, len(perms), 4096):
        chunk = perms[start:start + 4096]
        bits = a[chunk[:, iu], chunk[:, ju]].astype(np.uint8)
        # lexicographic max over rows of bits
        order = np.lexsort(bits.T[::-1])
        cand = bits[order[-1]]
        if best is None or tuple(cand) > tuple(best):
            best = cand
    return bytes([len(colors)]) + bytes(sorted(colors)) + np.packbits(best).tobytes()


def graph_from_bits(n: int, bits: Sequence[int]) -> Graph:
    a = np.zeros((n, n), dtype=np.int64)
    iu, ju = np.triu_indices(n, 1)
    a[iu, ju] = bits
    return Graph(a + a.T)


@lru_cache(maxsize=None)
def _nonisomorphic_graphs(n: int) -> tuple[Graph, ...]:
    """All graphs of order ``n`` up to isomorphism, by vertex augmentation."""
    if n == 0:
        return (Graph(np.zeros((0, 0), dtype=np.int64)),)
    seen: dict[bytes, Graph] = {}
    for base in _nonisomorphic_graphs(n - 1):
        for mask in range(1 << (n - 1)):
            a = np.zeros((n, n), dtype=np.int64)
            a[: n - 1, : n - 1] = base.adjacency
            for v in range(n - 1):
                if mask >> v & 1:
                    a[v, n - 1] = a[n - 1, v] = 1
            g = Graph(a)
            key = canonical_form(g)
            if key not in seen:
                seen[key] = g
    return tuple(seen[k] for k in sorted(seen))


def nonisomorphic_graphs(n: int) -> list[Graph]:
    if n > ENUMERATION_LIMIT:
        raise ValueError(f"order {n} above enumeration limit {ENUMERATION_LIMIT}")
    return list(_nonisomorphic_graphs(n))


def is_connected(g: Graph) -> bool:
    n = g.order
    if n == 0:
        return True
    seen = {0}
    stack = [0]
    a = g.adjacency
    while stack:
        v = stack.pop()
        for w in np.nonzero(a[v])[0].tolist():
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def enumerate_cospectral_pairs(order: int, connected_only: bool = False) -> list[tuple[Graph, Graph]]:
    """All non-isomorphic cospectral pairs of the given order.

    Graphs are grouped by their exact characteristic polynomial; within a
    group every unordered pair is reported.  Output order is deterministic.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    graphs = nonisomorphic_graphs(order)
    if connected_only:
        graphs = [g for g in graphs if is_connected(g)]
    groups: dict[tuple[int, ...], list[Graph]] = {}
    for g in graphs:
        groups.setdefault(characteristic_polynomial(g), []).append(g)
    pairs = []
    for key in sorted(groups):
        members = groups[key]
        for x, y in itertools.combinations(members, 2):
            pairs.append((x, y))
    labelled = []
    for idx, (x, y) in enumerate(pairs):
        labelled.append((x.relabel(f"ping{order}_{idx}a"), y.relabel(f"ping{order}_{idx}b")))
    return labelled
