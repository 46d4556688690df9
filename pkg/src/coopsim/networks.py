"""Interaction topologies: complete graph, square lattice, scale-free.

All generators return immutable, connected, simple graphs (no self
loops, no duplicate edges) with sorted per-node adjacency, so a graph
can be shared freely across concurrent simulation runs. The scale-free
generator is fully deterministic for a fixed seed, which allows a fixed
set of pre-generated networks to be reused across replicas.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import SplitMix64


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with per-node sorted adjacency tuples.

    ``rows``/``cols`` are set for lattices only and drive snapshot
    rendering; other kinds leave them as None.
    """

    node_count: int
    adjacency: tuple[tuple[int, ...], ...]
    kind: str = "generic"
    rows: int | None = None
    cols: int | None = None

    def degrees(self) -> list[int]:
        return [len(nbrs) for nbrs in self.adjacency]

    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        """All edges as (i, j) pairs with i < j, sorted."""
        return [
            (i, j)
            for i, nbrs in enumerate(self.adjacency)
            for j in nbrs
            if i < j
        ]

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency in compressed sparse row form for the kernels."""
        degs = self.degrees()
        indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(degs, out=indptr[1:])
        indices = np.fromiter(
            (j for nbrs in self.adjacency for j in nbrs),
            dtype=np.int64,
            count=int(indptr[-1]),
        )
        return indptr, indices


def _freeze(node_count: int, adj: list[list[int]], kind: str,
            rows: int | None = None, cols: int | None = None) -> Graph:
    return Graph(
        node_count=node_count,
        adjacency=tuple(tuple(sorted(nbrs)) for nbrs in adj),
        kind=kind,
        rows=rows,
        cols=cols,
    )


def complete(n: int) -> Graph:
    """Complete graph on n nodes; the well-mixed population."""
    if n < 2:
        raise ValueError("complete graph needs n >= 2")
    adj = [[j for j in range(n) if j != i] for i in range(n)]
    return _freeze(n, adj, "complete")


def square_lattice(rows: int, cols: int, periodic: bool = False) -> Graph:
    """rows x cols grid with von Neumann (4-neighbor) interaction.

    Non-periodic by default: corners have degree 2 and edges degree 3.
    With periodic boundaries all degrees are 4, except that a dimension
    of exactly 2 collapses the doubled wrap-around edge (simple graph).
    """
    if rows < 2 or cols < 2:
        raise ValueError("lattice dimensions must be >= 2")
    n = rows * cols
    adj: list[set[int]] = [set() for _ in range(n)]
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if periodic:
                steps = [((r + 1) % rows, c), ((r - 1) % rows, c),
                         (r, (c + 1) % cols), (r, (c - 1) % cols)]
            else:
                steps = [(rr, cc) for rr, cc in
                         ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1))
                         if 0 <= rr < rows and 0 <= cc < cols]
            for rr, cc in steps:
                j = rr * cols + cc
                if j != i:
                    adj[i].add(j)
                    adj[j].add(i)
    return _freeze(n, [list(s) for s in adj], "lattice", rows=rows, cols=cols)


def barabasi_albert(n: int, m: int, seed: int) -> Graph:
    """Scale-free graph by degree-proportional preferential attachment.

    Growth starts from a complete seed of m + 1 nodes (so every node has
    nonzero degree and degree-proportional sampling is well defined from
    the first arrival). Each arriving node links to m distinct existing
    nodes, sampled with probability proportional to degree via the
    repeated-endpoints list; duplicate targets are rejected and redrawn.
    Deterministic for a fixed seed. Mean degree approaches 2m for large
    n; exactly 2 (m (n - m - 1) + m (m + 1) / 2) / n including the seed
    clique.
    """
    if m < 1:
        raise ValueError("attachment count m must be >= 1")
    if n <= m:
        raise ValueError("need n > m nodes")
    rng = SplitMix64(seed)
    m0 = m + 1
    adj: list[list[int]] = [[] for _ in range(n)]
    endpoints: list[int] = []
    for i in range(m0):
        for j in range(i + 1, m0):
            adj[i].append(j)
            adj[j].append(i)
            endpoints.append(i)
            endpoints.append(j)
    for new in range(m0, n):
        chosen: list[int] = []
        while len(chosen) < m:
            cand = endpoints[rng.randbelow(len(endpoints))]
            if cand not in chosen:
                chosen.append(cand)
        for tgt in chosen:
            adj[new].append(tgt)
            adj[tgt].append(new)
            endpoints.append(new)
            endpoints.append(tgt)
    return _freeze(n, adj, "ba")


@dataclass(frozen=True)
class DegreeStats:
    """Degree diagnostics; the tail exponent is a rough log-log fit."""

    mean_degree: float
    max_degree: int
    histogram: dict[int, int]
    tail_exponent: float | None


def degree_stats(g: Graph) -> DegreeStats:
    """Exact degree summary plus a diagnostic power-law tail estimate.

    The tail exponent is the negated slope of a least-squares line
    through (log degree, log count) over degrees at or above the
    minimum degree; it needs at least three distinct populated degrees,
    otherwise None is reported.
    """
    degs = g.degrees()
    hist: dict[int, int] = {}
    for d in degs:
        hist[d] = hist.get(d, 0) + 1
    hist = dict(sorted(hist.items()))
    mean = 2.0 * g.edge_count() / g.node_count
    d_min = min(hist)
    pts = [(d, c) for d, c in hist.items() if d >= max(d_min, 1) and c > 0]
    tail = None
    if len(pts) >= 3:
        log_d = np.log([d for d, _ in pts])
        log_c = np.log([c for _, c in pts])
        slope = np.polyfit(log_d, log_c, 1)[0]
        tail = float(-slope)
    return DegreeStats(
        mean_degree=mean,
        max_degree=max(degs),
        histogram=hist,
        tail_exponent=tail,
    )


def save_edgelist(g: Graph, path: str | Path) -> None:
    """Write the graph as sorted "i j" lines (i < j), LF-terminated."""
    lines = [f"{i} {j}\n" for i, j in g.edges()]
    Path(path).write_text("".join(lines), encoding="utf-8", newline="\n")


def load_edgelist(path: str | Path, kind: str = "generic") -> Graph:
    """Read an edge-list file produced by :func:`save_edgelist`."""
    adj_map: dict[int, list[int]] = {}
    max_node = -1
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{line_no}: expected 'i j', got {line!r}")
        i, j = int(parts[0]), int(parts[1])
        if i == j:
            raise ValueError(f"{path}:{line_no}: self-loop {i}")
        adj_map.setdefault(i, []).append(j)
        adj_map.setdefault(j, []).append(i)
        max_node = max(max_node, i, j)
    if max_node < 1:
        raise ValueError(f"{path}: no edges found")
    adj = [adj_map.get(i, []) for i in range(max_node + 1)]
    return _freeze(max_node + 1, adj, kind)
