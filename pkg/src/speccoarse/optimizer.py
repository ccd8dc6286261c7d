"""Majorization-minimization re-weighting of a graph's edges toward a target spectrum.

Weights live in the ``n(n-1)/2`` space of vertex pairs ``(i, j)``, ``i > j``
(1-based), ordered by ``Φ(i, j) = i - j + (j - 1)(2n - j)/2``.  A boolean
mask restricts the free coordinates to the edges of the starting graph.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .coarsening import CoarseningResult
from .eigen import sym_eig
from .errors import DimensionMismatch, NonOrthonormalU, SpecCoarseError, ValidationError
from .graph import Graph

ZERO_WEIGHT = 1e-12


def phi(i: int, j: int, n: int) -> int:
    """1-based coordinate of the pair ``i > j``."""
    if not 1 <= j < i <= n:
        raise ValidationError(f"need 1 <= j < i <= n, got i={i}, j={j}, n={n}")
    return i - j + (j - 1) * (2 * n - j) // 2


def pair_indices(n: int):
    """0-based ``(larger, smaller)`` vertex arrays in coordinate order."""
    small, large = np.triu_indices(n, 1)
    return large, small


@dataclass(frozen=True, eq=False)
class WeightVector:
    n: int
    w: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        m = self.n * (self.n - 1) // 2
        if self.w.shape != (m,) or self.mask.shape != (m,):
            raise DimensionMismatch(f"weight and mask vectors must have length {m}")
        if np.any(self.w < 0):
            raise ValidationError("weights must be nonnegative")
        if np.any(self.w[~self.mask] != 0):
            raise ValidationError("weights outside the mask must be zero")

    @classmethod
    def from_graph(cls, g: Graph) -> "WeightVector":
        m = g.n * (g.n - 1) // 2
        k = _coords(g.rows, g.cols, g.n)
        w = np.zeros(m)
        w[k] = g.weights
        mask = np.zeros(m, dtype=bool)
        mask[k] = True
        return cls(g.n, w, mask)

    @classmethod
    def complete(cls, n: int, w) -> "WeightVector":
        w = np.asarray(w, dtype=float)
        return cls(n, w.copy(), np.ones(w.size, dtype=bool))

    def replace(self, w) -> "WeightVector":
        return WeightVector(self.n, np.asarray(w, dtype=float), self.mask)

    def to_graph(self, template: Graph | None = None, zero_tol: float = ZERO_WEIGHT) -> Graph:
        large, small = pair_indices(self.n)
        keep = self.mask & (self.w >= zero_tol)
        vw = None if template is None else template.vertex_weights
        return Graph._build(self.n, small[keep], large[keep], self.w[keep], vw)


def _coords(rows, cols, n):
    # rows < cols 0-based, so the pair is (i, j) = (cols + 1, rows + 1)
    j = rows + 1
    i = cols + 1
    return (i - j + (j - 1) * (2 * n - j) // 2 - 1).astype(np.int64)


def lap_from_weights(wv: WeightVector) -> np.ndarray:
    n = wv.n
    large, small = pair_indices(n)
    lap = np.zeros((n, n))
    lap[large, small] = -wv.w
    lap[small, large] = -wv.w
    lap[np.diag_indices(n)] = -lap.sum(axis=1)
    return lap


def lap_adjoint(y) -> np.ndarray:
    """``𝔏*Y``, the adjoint under the trace inner product."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[0] != y.shape[1]:
        raise DimensionMismatch("adjoint needs a square matrix")
    large, small = pair_indices(y.shape[0])
    d = np.diag(y)
    return d[large] + d[small] - y[large, small] - y[small, large]


def _check_u(u, n, tol=1e-8):
    u = np.asarray(u, dtype=float)
    if u.shape != (n, n):
        raise DimensionMismatch(f"U must be {n}x{n}")
    if np.abs(u.T @ u - np.eye(n)).max() > tol:
        raise NonOrthonormalU("U is not orthonormal")
    return u


def _target(u, lam):
    return (u * lam[None, :]) @ u.T


def objective(wv: WeightVector, u, lam) -> float:
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (wv.n,):
        raise DimensionMismatch(f"need {wv.n} target eigenvalues")
    u = _check_u(u, wv.n)
    diff = lap_from_weights(wv) - _target(u, lam)
    return float(np.sum(diff * diff))


def gradient(wv: WeightVector, u, lam) -> np.ndarray:
    """Masked ``∇f(w) = 𝔏*(𝔏w - U Diag(λ) Uᵀ)``."""
    g = lap_adjoint(lap_from_weights(wv) - _target(u, np.asarray(lam, dtype=float)))
    return np.where(wv.mask, g, 0.0)


def lipschitz(n: int) -> float:
    return 2.0 * n


def update_w(wv: WeightVector, u, lam) -> WeightVector:
    step = wv.w - gradient(wv, u, lam) / lipschitz(wv.n)
    return wv.replace(np.where(wv.mask, np.maximum(step, 0.0), 0.0))


def update_u(wv: WeightVector, lam=None, method: str = "auto") -> np.ndarray:
    """Eigenvectors of ``𝔏w`` in ascending eigenvalue order (paired with ascending ``λ``)."""
    return sym_eig(lap_from_weights(wv), method=method).vectors


def fixed_point_residual(wv: WeightVector, u, lam) -> float:
    return float(np.linalg.norm(wv.w - update_w(wv, u, lam).w))


def random_orthogonal(n: int, rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)[None, :]


@dataclass
class OptimizerTrace:
    objectives: list = field(default_factory=list)
    residual: float = float("nan")
    iterations: int = 0
    converged: bool = False
    max_iter_exceeded: bool = False
    dropped_edges: int = 0
    initial_objective: float = float("nan")


class MonotonicityError(SpecCoarseError, RuntimeError):
    pass


def _sorted_target(lam_target, n):
    lam = np.asarray(lam_target, dtype=float)
    if lam.shape != (n,):
        raise DimensionMismatch(f"need {n} target eigenvalues, got {lam.size}")
    lam = np.sort(lam)
    if abs(lam[0]) > 1e-9 * max(1.0, abs(lam[-1])):
        warnings.warn("smallest target eigenvalue is not zero", stacklevel=3)
    return lam


def align_spectrum(cr, lambda_target, tol: float = 1e-9, max_iter: int = 5000, rng=None,
                   callback=None, eig_method: str = "lapack"):
    """Re-weight the edges of ``cr`` (a coarse result or a graph) toward ``lambda_target``.

    Each iteration refreshes ``U`` from ``𝔏w``, records the objective, tests
    convergence, then takes one projected-gradient step on ``w``.  Converged
    means the relative objective change is below ``tol`` and the
    projected-gradient fixed-point residual is at most ``tol``.
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    g = cr.coarse if isinstance(cr, CoarseningResult) else cr
    rng = np.random.default_rng(rng)
    lam = _sorted_target(lambda_target, g.n)
    wv = WeightVector.from_graph(g)
    trace = OptimizerTrace()
    u = random_orthogonal(g.n, rng)
    trace.initial_objective = objective(wv, u, lam)
    prev = None
    for t in range(max_iter):
        u = update_u(wv, lam, eig_method)
        f = objective(wv, u, lam)
        if prev is not None and f > prev + 1e-12 * max(1.0, prev):
            raise MonotonicityError(f"objective rose from {prev!r} to {f!r} at iteration {t}")
        trace.objectives.append(f)
        nxt = update_w(wv, u, lam)
        residual = float(np.linalg.norm(wv.w - nxt.w))
        small_change = prev is None or abs(prev - f) / (1.0 + prev) < tol
        if callback is not None:
            callback(t, wv, u, f)
        if small_change and residual <= tol:
            trace.converged = True
            trace.residual = residual
            break
        wv, prev = nxt, f
    else:
        trace.max_iter_exceeded = True
        u = update_u(wv, lam, eig_method)
        trace.residual = fixed_point_residual(wv, u, lam)
    trace.iterations = len(trace.objectives)
    out = wv.to_graph(g)
    trace.dropped_edges = int(g.num_edges - out.num_edges)
    return out, trace
