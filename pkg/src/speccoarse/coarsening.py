"""Vertex maps, projection/lift matrices, induced coarse graphs and coarsening methods."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .eigen import sym_eig
from .errors import KTooLarge, TargetTooSmall, ValidationError
from .graph import Graph, combinatorial_laplacian, degree_vector


class Method(str, enum.Enum):
    BASELINE = "bl"
    HEAVY_EDGE = "heavy"
    ALGEBRAIC_DISTANCE = "alg"
    AFFINITY = "aff"
    LOCAL_VAR_EDGE = "lve"
    LOCAL_VAR_NEIGH = "lvn"


class LocalVariant(str, enum.Enum):
    EDGE = "edge"
    NEIGHBORHOOD = "neighborhood"


@dataclass(frozen=True, eq=False)
class VertexMap:
    """Surjection from ``N`` original vertices onto ``n_hat`` supernodes."""

    assignments: np.ndarray
    n_hat: int

    @classmethod
    def from_assignments(cls, assignments, canonical: bool = True) -> "VertexMap":
        """Validate ``assignments``; with ``canonical`` relabel supernodes by first appearance."""
        a = np.asarray(assignments, dtype=np.int64)
        if a.ndim != 1:
            raise ValidationError("assignments must be one-dimensional")
        if a.size == 0:
            return cls(a, 0)
        if a.min() < 0:
            raise ValidationError("supernode ids must be nonnegative")
        if canonical:
            _, first, inv = np.unique(a, return_index=True, return_inverse=True)
            rank = np.empty(first.size, dtype=np.int64)
            rank[np.argsort(first, kind="stable")] = np.arange(first.size)
            a = rank[inv]
            n_hat = int(first.size)
        else:
            n_hat = int(a.max()) + 1
            if np.unique(a).size != n_hat:
                raise ValidationError("vertex map is not surjective")
        a = np.ascontiguousarray(a)
        a.setflags(write=False)
        return cls(a, n_hat)

    @classmethod
    def identity(cls, n: int) -> "VertexMap":
        return cls.from_assignments(np.arange(n))

    @property
    def n(self) -> int:
        return int(self.assignments.size)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.n_hat).astype(float)

    def compose(self, outer: "VertexMap") -> "VertexMap":
        """Map ``v -> outer(self(v))``."""
        return VertexMap.from_assignments(outer.assignments[self.assignments])

    def image(self, subset) -> np.ndarray:
        return np.unique(self.assignments[np.asarray(list(subset), dtype=np.int64)])


@dataclass(frozen=True, eq=False)
class CoarseningResult:
    map: VertexMap
    coarse: Graph
    levels: int = 0
    warnings: tuple = field(default_factory=tuple)


def projection_matrix(vmap: VertexMap) -> np.ndarray:
    p = np.zeros((vmap.n_hat, vmap.n))
    p[vmap.assignments, np.arange(vmap.n)] = 1.0 / vmap.sizes[vmap.assignments]
    return p


def lift_matrix(vmap: VertexMap) -> np.ndarray:
    pp = np.zeros((vmap.n, vmap.n_hat))
    pp[np.arange(vmap.n), vmap.assignments] = 1.0
    return pp


def averaging_operator(vmap: VertexMap) -> np.ndarray:
    """``P⁺P``: the block matrix averaging within each cluster."""
    return lift_matrix(vmap) @ projection_matrix(vmap)


def _contract(g: Graph, vmap: VertexMap) -> Graph:
    a = vmap.assignments
    r, s = a[g.rows], a[g.cols]
    cross = r != s
    lo, hi = np.minimum(r[cross], s[cross]), np.maximum(r[cross], s[cross])
    key = lo * max(vmap.n_hat, 1) + hi
    uniq, inv = np.unique(key, return_inverse=True)
    wsum = np.zeros(uniq.size)
    np.add.at(wsum, inv, g.weights[cross])
    vw = np.zeros(vmap.n_hat)
    np.add.at(vw, a, g.vertex_weights)
    return Graph._build(vmap.n_hat, uniq // max(vmap.n_hat, 1), uniq % max(vmap.n_hat, 1), wsum, vw)


def induced_coarse_graph(g: Graph, vmap: VertexMap) -> CoarseningResult:
    """Coarse graph whose weights sum the edges crossing each pair of clusters."""
    if vmap.n != g.n:
        raise ValidationError(f"vertex map covers {vmap.n} vertices, graph has {g.n}")
    return CoarseningResult(vmap, _contract(g, vmap), 0)


# -- scores -------------------------------------------------------------------

def _csr(g: Graph):
    w = csr_matrix((np.concatenate([g.weights, g.weights]),
                    (np.concatenate([g.rows, g.cols]), np.concatenate([g.cols, g.rows]))),
                   shape=(g.n, g.n))
    w.sort_indices()
    return w


def algebraic_test_vectors(g: Graph, rng, num: int = 10, sweeps: int = 20, omega: float = 0.5):
    d = degree_vector(g)
    x = rng.uniform(-0.5, 0.5, size=(g.n, num))
    w = _csr(g)
    inv_d = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
    iso = d == 0
    for _ in range(sweeps):
        avg = inv_d[:, None] * (w @ x)
        avg[iso] = x[iso]
        x = (1.0 - omega) * x + omega * avg
    return x


def affinity_test_vectors(g: Graph, rng, num: int = 10):
    """One in-place Gauss-Seidel sweep on ``Lx = 0`` from random starts."""
    d = degree_vector(g)
    x = rng.uniform(-0.5, 0.5, size=(g.n, num))
    w = _csr(g)
    ptr, idx, val = w.indptr, w.indices, w.data
    for i in range(g.n):
        if d[i] > 0:
            lo, hi = ptr[i], ptr[i + 1]
            x[i] = val[lo:hi] @ x[idx[lo:hi]] / d[i]
    return x


def contraction_scores(g: Graph, method, rng=None, num_vectors: int = 10,
                       sweeps: int = 20, omega: float = 0.5) -> np.ndarray:
    """Per-edge contraction priority aligned with ``g.rows``/``g.cols``; larger first."""
    method = Method(method)
    i, j = g.rows, g.cols
    if method is Method.HEAVY_EDGE:
        d = degree_vector(g)
        return g.weights / np.maximum(d[i], d[j])
    rng = np.random.default_rng(rng)
    if method is Method.ALGEBRAIC_DISTANCE:
        x = algebraic_test_vectors(g, rng, num_vectors, sweeps, omega)
        return -np.sqrt(np.sum((x[i] - x[j]) ** 2, axis=1))
    if method is Method.AFFINITY:
        x = affinity_test_vectors(g, rng, num_vectors)
        return affinity_from_vectors(x, i, j)
    raise ValidationError(f"{method.name} has no edge score")


def affinity_from_vectors(x, i, j):
    num = np.sum(x[i] * x[j], axis=1) ** 2
    den = np.sum(x[i] ** 2, axis=1) * np.sum(x[j] ** 2, axis=1)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def greedy_matching(g: Graph, scores) -> list[tuple[int, int]]:
    """Disjoint pairs in descending score order, ties broken by ``(i, j)``."""
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (g.num_edges,):
        raise ValidationError("need one score per edge")
    order = np.lexsort((g.cols, g.rows, -scores))
    used = np.zeros(g.n, dtype=bool)
    pairs = []
    for e in order:
        a, b = int(g.rows[e]), int(g.cols[e])
        if not used[a] and not used[b]:
            used[a] = used[b] = True
            pairs.append((a, b))
    return pairs


def local_variation_costs(g: Graph, variant, k: int = 10):
    """List of ``(candidate, cost)``; candidates are sorted vertex tuples."""
    variant = LocalVariant(variant)
    if k < 1:
        raise ValidationError("k must be at least 1")
    if k > g.n:
        raise KTooLarge(f"k={k} exceeds n={g.n}")
    lap = combinatorial_laplacian(g)
    basis = sym_eig(lap).vectors[:, :k]
    if variant is LocalVariant.EDGE:
        d = degree_vector(g)
        i, j = g.rows, g.cols
        diff = np.sum((basis[i] - basis[j]) ** 2, axis=1)
        cost = diff / 4.0 * (d[i] + d[j] + 2.0 * g.weights)
        return [((int(a), int(b)), float(c)) for a, b, c in zip(i, j, cost)]
    return [(cand, cost) for _, cand, cost in _neighborhood_costs(g, lap, basis)]


def _neighborhood_costs(g, lap, basis):
    out = []
    for v, nb in enumerate(g.neighbors()):
        if nb.size == 0:
            continue
        c = np.sort(np.append(nb, v))
        out.append((v, tuple(int(x) for x in c), set_variation_cost(lap, basis, c)))
    return out


def set_variation_cost(lap, basis, members) -> float:
    members = np.asarray(members, dtype=np.int64)
    size = members.size
    if size < 2:
        raise ValidationError("candidate set needs at least two vertices")
    b = basis[members]
    y = b - b.mean(axis=0, keepdims=True)
    lc = lap[np.ix_(members, members)]
    return float(np.sum(y * (lc @ y)) / (size - 1))


# -- drivers ------------------------------------------------------------------

def target_size(n: int, ratio: float) -> int:
    if not 0.0 < ratio < 1.0:
        raise ValidationError("ratio must lie in (0, 1)")
    return int(math.ceil((1.0 - ratio) * n - 1e-9))


def _groups_to_map(n, groups):
    label = np.arange(n)
    for grp in groups:
        label[list(grp)] = min(grp)
    return VertexMap.from_assignments(label)


def _level_groups(g: Graph, method: Method, budget: int, rng, k: int):
    if method in (Method.HEAVY_EDGE, Method.ALGEBRAIC_DISTANCE, Method.AFFINITY):
        pairs = greedy_matching(g, contraction_scores(g, method, rng))
        return pairs[:budget]
    if method is Method.LOCAL_VAR_EDGE:
        costs = local_variation_costs(g, LocalVariant.EDGE, min(k, g.n))
        # ascending cost is descending score; greedy_matching handles ties
        pairs = greedy_matching(g, -np.array([c for _, c in costs]))
        return pairs[:budget]
    lap = combinatorial_laplacian(g)
    basis = sym_eig(lap).vectors[:, :min(k, g.n)]
    costs = _neighborhood_costs(g, lap, basis)
    costs.sort(key=lambda t: (t[2], t[0]))
    nbrs = g.neighbors()
    marked = np.zeros(g.n, dtype=bool)
    groups = []
    for center, _, _ in costs:
        if budget <= 0:
            break
        if marked[center]:
            continue
        free = [int(u) for u in nbrs[center] if not marked[u]][:budget]
        if not free:
            continue
        grp = [center] + free
        marked[grp] = True
        groups.append(grp)
        budget -= len(free)
    return groups


def _baseline(g: Graph, target: int, rng) -> CoarseningResult:
    landmarks = np.sort(rng.choice(g.n, size=target, replace=False))
    dist = shortest_path(_csr(g), unweighted=True, directed=False, indices=landmarks)
    assign = np.empty(g.n, dtype=np.int64)
    warnings = []
    for v in range(g.n):
        col = dist[:, v]
        best = col.min()
        if not np.isfinite(best):
            assign[v] = landmarks[rng.integers(target)]
            warnings.append(f"vertex {v} reaches no landmark")
            continue
        ties = np.flatnonzero(col == best)
        assign[v] = landmarks[ties[0] if ties.size == 1 else rng.choice(ties)]
    vmap = VertexMap.from_assignments(assign)
    return CoarseningResult(vmap, _contract(g, vmap), 1, tuple(warnings))


def coarsen(g: Graph, method, ratio: float, rng=None, k: int = 10,
            max_levels: int = 100) -> CoarseningResult:
    """Coarsen ``g`` until at most ``ceil((1 - ratio) N)`` supernodes remain."""
    method = Method(method)
    target = target_size(g.n, ratio)
    if target < 2:
        raise TargetTooSmall(f"target size {target} is below 2")
    rng = np.random.default_rng(rng)
    if target >= g.n:
        return CoarseningResult(VertexMap.identity(g.n), g, 0)
    if method is Method.BASELINE:
        return _baseline(g, target, rng)
    vmap = VertexMap.identity(g.n)
    current = g
    levels = 0
    warnings = []
    while current.n > target and levels < max_levels:
        groups = _level_groups(current, method, current.n - target, rng, k)
        if not groups:
            warnings.append(f"stalled at {current.n} supernodes")
            break
        step = _groups_to_map(current.n, groups)
        current = _contract(current, step)
        vmap = vmap.compose(step)
        levels += 1
    return CoarseningResult(vmap, current, levels, tuple(warnings))


# -- vertex-map text format ---------------------------------------------------

def format_vertex_map(vmap: VertexMap) -> str:
    return "".join(f"{v} {int(s)}\n" for v, s in enumerate(vmap.assignments))


def parse_vertex_map(text: str) -> VertexMap:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except (ValueError, IndexError):
            raise ValidationError(f"line {lineno}: cannot parse {raw!r}") from None
    n = len(pairs)
    assign = np.full(n, -1, dtype=np.int64)
    for v, s in pairs:
        if not 0 <= v < n or assign[v] != -1:
            raise ValidationError(f"vertex {v} missing or repeated in vertex map")
        assign[v] = s
    return VertexMap.from_assignments(assign, canonical=False)


def write_vertex_map(vmap: VertexMap, path) -> None:
    Path(path).write_text(format_vertex_map(vmap))


def read_vertex_map(path) -> VertexMap:
    return parse_vertex_map(Path(path).read_text())
