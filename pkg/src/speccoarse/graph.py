"""Weighted undirected graphs, their Laplace operators and scalar functionals."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateSubset,
    DimensionMismatch,
    IsolatedVertex,
    NonpositiveVertexWeight,
    ValidationError,
    ZeroVector,
)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph with positive edge weights and per-vertex weights.

    Edges are stored as parallel arrays ``rows < cols`` sorted
    lexicographically.  ``vertex_weights`` are all one for an original graph
    and hold cluster sizes for a coarse graph.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    vertex_weights: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[float]], vertex_weights=None) -> "Graph":
        n = int(n)
        if n < 0:
            raise ValidationError("vertex count must be nonnegative")
        seen = {}
        for e in edges:
            if len(e) == 2:
                i, j, w = int(e[0]), int(e[1]), 1.0
            else:
                i, j, w = int(e[0]), int(e[1]), float(e[2])
            if i == j:
                raise ValidationError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            if i < 0 or j >= n:
                raise ValidationError(f"edge ({i}, {j}) out of range for n={n}")
            if not w > 0 or not np.isfinite(w):
                raise ValidationError(f"edge ({i}, {j}) has non-positive weight {w}")
            if (i, j) in seen:
                raise ValidationError(f"duplicate edge ({i}, {j})")
            seen[(i, j)] = w
        keys = sorted(seen)
        rows = np.array([k[0] for k in keys], dtype=np.int64)
        cols = np.array([k[1] for k in keys], dtype=np.int64)
        weights = np.array([seen[k] for k in keys], dtype=float)
        return cls._build(n, rows, cols, weights, vertex_weights)

    @classmethod
    def from_adjacency(cls, w: np.ndarray, vertex_weights=None) -> "Graph":
        """Build from a dense symmetric weight matrix; the diagonal is ignored."""
        w = np.asarray(w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatch("adjacency must be square")
        iu, ju = np.triu_indices(w.shape[0], 1)
        vals = w[iu, ju]
        keep = vals > 0
        return cls._build(w.shape[0], iu[keep], ju[keep], vals[keep], vertex_weights)

    @classmethod
    def _build(cls, n, rows, cols, weights, vertex_weights):
        if vertex_weights is None:
            vw = np.ones(n)
        else:
            vw = np.asarray(vertex_weights, dtype=float).copy()
            if vw.shape != (n,):
                raise DimensionMismatch(f"vertex_weights must have length {n}")
            if np.any(~(vw > 0)):
                raise NonpositiveVertexWeight("vertex weights must be positive")
        order = np.lexsort((cols, rows))
        arrays = [np.ascontiguousarray(a[order]) for a in (rows, cols)]
        wts = np.ascontiguousarray(np.asarray(weights, dtype=float)[order])
        for a in (*arrays, wts, vw):
            a.setflags(write=False)
        return cls(n, arrays[0], arrays[1], wts, vw)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(i), int(j), float(w)) for i, j, w in zip(self.rows, self.cols, self.weights)]

    @property
    def num_edges(self) -> int:
        return int(self.rows.size)

    def with_weights(self, weights) -> "Graph":
        """Same topology and vertex weights, new edge weights (zeros dropped)."""
        weights = np.asarray(weights, dtype=float)
        keep = weights > 0
        return Graph._build(self.n, self.rows[keep], self.cols[keep], weights[keep], self.vertex_weights)

    def relabel(self, perm) -> "Graph":
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        a, b = perm[self.rows], perm[self.cols]
        vw = np.empty(self.n)
        vw[perm] = self.vertex_weights
        return Graph._build(self.n, np.minimum(a, b), np.maximum(a, b), self.weights, vw)

    def adjacency(self) -> np.ndarray:
        w = np.zeros((self.n, self.n))
        w[self.rows, self.cols] = self.weights
        w[self.cols, self.rows] = self.weights
        return w

    def neighbors(self) -> list[np.ndarray]:
        nbrs = [[] for _ in range(self.n)]
        for i, j in zip(self.rows.tolist(), self.cols.tolist()):
            nbrs[i].append(j)
            nbrs[j].append(i)
        return [np.array(sorted(x), dtype=np.int64) for x in nbrs]

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


def degree_vector(g: Graph) -> np.ndarray:
    d = np.zeros(g.n)
    np.add.at(d, g.rows, g.weights)
    np.add.at(d, g.cols, g.weights)
    return d


def _symmetrize(m):
    return 0.5 * (m + m.T)


def combinatorial_laplacian(g: Graph) -> np.ndarray:
    lap = -g.adjacency()
    lap[np.diag_indices(g.n)] = degree_vector(g)
    return lap


def normalized_laplacian(g: Graph) -> np.ndarray:
    """``I - D^{-1/2} W D^{-1/2}``; raises :class:`IsolatedVertex` on zero degree."""
    d = degree_vector(g)
    zero = np.flatnonzero(d <= 0)
    if zero.size:
        raise IsolatedVertex(zero[0])
    s = 1.0 / np.sqrt(d)
    lap = -(s[:, None] * g.adjacency() * s[None, :])
    lap[np.diag_indices(g.n)] = 1.0
    return _symmetrize(lap)


def doubly_weighted_laplacian(g: Graph) -> np.ndarray:
    """``Gamma^{-1/2} (D - W) Gamma^{-1/2}`` with ``Gamma = diag(vertex_weights)``."""
    vw = g.vertex_weights
    if np.any(~(vw > 0)):
        raise NonpositiveVertexWeight("vertex weights must be positive")
    s = 1.0 / np.sqrt(vw)
    return _symmetrize(s[:, None] * combinatorial_laplacian(g) * s[None, :])


def quadratic_form(m: np.ndarray, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (m.shape[0],):
        raise DimensionMismatch(f"vector of length {x.size} against {m.shape[0]}x{m.shape[0]} matrix")
    return float(x @ m @ x)


def rayleigh_quotient(m: np.ndarray, x) -> float:
    x = np.asarray(x, dtype=float)
    nrm2 = float(x @ x)
    if nrm2 == 0.0:
        raise ZeroVector("Rayleigh quotient of the zero vector")
    return quadratic_form(m, x) / nrm2


def conductance(g: Graph, s) -> float:
    """Cut weight of ``s`` over the smaller of the two side volumes."""
    mask = np.zeros(g.n, dtype=bool)
    idx = np.asarray(list(s), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= g.n):
        raise DegenerateSubset("subset references vertices outside the graph")
    mask[idx] = True
    k = int(mask.sum())
    if k == 0 or k == g.n:
        raise DegenerateSubset("subset must be nonempty and proper")
    d = degree_vector(g)
    vol_s, vol_c = d[mask].sum(), d[~mask].sum()
    denom = min(vol_s, vol_c)
    if denom <= 0:
        raise DegenerateSubset("one side of the cut has zero volume")
    crossing = mask[g.rows] != mask[g.cols]
    return float(g.weights[crossing].sum() / denom)


# -- edge-list text format ---------------------------------------------------

def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g))


def format_edge_list(g: Graph) -> str:
    lines = [f"# n={g.n}"]
    lines += [f"{i} {j} {w!r}" for i, j, w in g.edges]
    if np.any(g.vertex_weights != 1.0):
        lines += [f"v {i} {float(x)!r}" for i, x in enumerate(g.vertex_weights)]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    n = None
    edges, vweights = [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("n="):
                n = int(body[2:])
            continue
        parts = line.split()
        try:
            if parts[0] == "v":
                vweights[int(parts[1])] = float(parts[2])
            elif len(parts) == 3:
                edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
            else:
                raise ValueError
        except (ValueError, IndexError):
            raise ValidationError(f"line {lineno}: cannot parse {raw!r}") from None
    if n is None:
        ids = [max(e[0], e[1]) for e in edges] + list(vweights)
        n = max(ids) + 1 if ids else 0
    for i, j, _ in edges:
        if not i < j:
            raise ValidationError(f"edge ({i}, {j}) must satisfy i < j")
    vw = None
    if vweights:
        vw = np.ones(n)
        for i, x in vweights.items():
            if not 0 <= i < n:
                raise ValidationError(f"vertex weight index {i} out of range")
            vw[i] = x
    return Graph.from_edges(n, edges, vw)


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())
