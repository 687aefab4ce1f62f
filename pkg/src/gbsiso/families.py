"""Small named graphs and strongly regular families built from their definitions."""

from __future__ import annotations

import itertools

from .graphs import Graph


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, itertools.combinations(range(n), 2), label=f"K{n}")


def empty_graph(n: int) -> Graph:
    return Graph.from_edges(n, [], label=f"E{n}")


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], label=f"C{n}")


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], label=f"P{n}")


def disjoint_union(g: Graph, copies: int, label=None) -> Graph:
    """``copies`` disjoint copies of ``g`` (adjacency ``A + A + ... + A``)."""
    if copies < 1:
        raise ValueError("copies must be >= 1")
    M = g.order
    edges = [(i + t * M, j + t * M) for t in range(copies) for i, j in g.edges()]
    return Graph.from_edges(M * copies, edges, label=label or f"{copies}x{g.label or 'G'}")


def rook_graph(n: int = 4) -> Graph:
    """Line graph of K_{n,n}: cells of an n x n board, adjacent in a shared row or column."""
    cells = [(r, s) for r in range(n) for s in range(n)]
    edges = [
        (i, j)
        for i, j in itertools.combinations(range(len(cells)), 2)
        if cells[i][0] == cells[j][0] or cells[i][1] == cells[j][1]
    ]
    return Graph.from_edges(n * n, edges, label=f"rook{n}x{n}")


def shrikhande_graph() -> Graph:
    """Cayley graph of Z4 x Z4 with connection set {+-(1,0), +-(0,1), +-(1,1)}."""
    cells = [(r, s) for r in range(4) for s in range(4)]
    steps = {(1, 0), (3, 0), (0, 1), (0, 3), (1, 1), (3, 3)}
    edges = [
        (i, j)
        for i, j in itertools.combinations(range(16), 2)
        if ((cells[j][0] - cells[i][0]) % 4, (cells[j][1] - cells[i][1]) % 4) in steps
    ]
    return Graph.from_edges(16, edges, label="shrikhande")


def paley_graph(q: int) -> Graph:
    """Paley graph on Z_q for a prime q = 1 mod 4."""
    if q % 4 != 1 or any(q % d == 0 for d in range(2, int(q**0.5) + 1)):
        raise ValueError(f"paley_graph needs a prime q = 1 mod 4, got {q}")
    squares = {(x * x) % q for x in range(1, q)}
    edges = [(i, j) for i, j in itertools.combinations(range(q), 2) if (j - i) % q in squares]
    return Graph.from_edges(q, edges, label=f"paley{q}")


def pg32_line_graph() -> Graph:
    """Lines of PG(3,2), adjacent when they meet. Strongly regular (35,18,9,9)."""
    points = range(1, 16)
    lines = sorted({frozenset((a, b, a ^ b)) for a in points for b in points if a < b})
    edges = [(i, j) for i, j in itertools.combinations(range(len(lines)), 2) if lines[i] & lines[j]]
    return Graph.from_edges(len(lines), edges, label="pg32-lines")


def ping6() -> tuple[Graph, Graph]:
    """The connected cospectral non-isomorphic pair on six vertices."""
    a = Graph.from_edges(6, [(0, 2), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (4, 5)], label="ping6a")
    b = Graph.from_edges(6, [(0, 2), (0, 4), (1, 3), (1, 4), (2, 4), (3, 4), (4, 5)], label="ping6b")
    return a, b


def ping9() -> tuple[Graph, Graph]:
    """A connected cospectral non-isomorphic pair on nine vertices (nine edges each)."""
    a = Graph.from_edges(9, [(0, 1), (0, 2), (0, 6), (1, 5), (1, 8), (2, 3), (2, 4), (5, 6), (6, 7)], label="ping9a")
    b = Graph.from_edges(9, [(0, 1), (0, 2), (1, 3), (1, 5), (1, 8), (2, 3), (2, 4), (5, 6), (6, 7)], label="ping9b")
    return a, b
