"""Losses comparing a coarse graph with its original, and the eigenvalue error metric."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .coarsening import CoarseningResult, projection_matrix
from .eigen import sym_eig
from .errors import (
    DegenerateSubset,
    KTooLarge,
    NonpositiveBaseline,
    ResampleExhausted,
    ValidationError,
)
from .graph import (
    Graph,
    combinatorial_laplacian,
    conductance,
    doubly_weighted_laplacian,
    normalized_laplacian,
)
from .operators import OperatorChoice, project_matrix

DEFAULT_K = 40
MAX_RESAMPLE = 100


class LossName(str, enum.Enum):
    QUADRATIC = "quad"
    NORMALIZED = "nquad"
    RAYLEIGH = "ray"
    EIGENERROR = "eig"
    CONDUCTANCE = "cond"


@dataclass(frozen=True)
class LossReport:
    loss_name: str
    value: float
    k: int
    seed: int | None = None
    evaluated: int = 0
    skipped: int = 0


def _check_k(k, limit, what="N"):
    if k < 1:
        raise ValidationError("k must be at least 1")
    if k > limit:
        raise KTooLarge(f"k={k} exceeds {what}={limit}")


def _quadratic_gap(m, m_hat, proj, vecs):
    y = proj @ vecs
    orig = np.einsum("ik,ik->k", vecs, m @ vecs)
    coarse = np.einsum("ik,ik->k", y, m_hat @ y)
    return np.abs(orig - coarse)


def quadratic_loss_report(g: Graph, cr: CoarseningResult, k: int) -> LossReport:
    _check_k(k, g.n)
    lap = combinatorial_laplacian(g)
    f = sym_eig(lap).vectors[:, :k]
    gaps = _quadratic_gap(lap, combinatorial_laplacian(cr.coarse), projection_matrix(cr.map), f)
    return LossReport(LossName.QUADRATIC.value, float(gaps.mean()), k, evaluated=k)


def normalized_quadratic_loss_report(g: Graph, cr: CoarseningResult, k: int) -> LossReport:
    _check_k(k, g.n)
    lap = normalized_laplacian(g)
    lap_hat = normalized_laplacian(cr.coarse)
    proj = project_matrix(OperatorChoice.NORMALIZED_QUADRATIC, g, cr)
    f = sym_eig(lap).vectors[:, :k]
    gaps = _quadratic_gap(lap, lap_hat, proj, f)
    return LossReport(LossName.NORMALIZED.value, float(gaps.mean()), k, evaluated=k)


def rayleigh_loss_report(g: Graph, cr: CoarseningResult, k: int, zero_tol: float = 1e-12) -> LossReport:
    """Terms whose projection vanishes are skipped and counted in ``skipped``."""
    _check_k(k, g.n)
    lap = combinatorial_laplacian(g)
    dw = doubly_weighted_laplacian(cr.coarse)
    proj = project_matrix(OperatorChoice.DOUBLY_WEIGHTED_RAYLEIGH, g, cr)
    f = sym_eig(lap).vectors[:, :k]
    y = proj @ f
    ny = np.einsum("ik,ik->k", y, y)
    keep = ny > zero_tol ** 2
    r_orig = np.einsum("ik,ik->k", f, lap @ f) / np.einsum("ik,ik->k", f, f)
    r_coarse = np.einsum("ik,ik->k", y, dw @ y)[keep] / ny[keep]
    gaps = np.abs(r_orig[keep] - r_coarse)
    value = float(gaps.mean()) if gaps.size else 0.0
    return LossReport(LossName.RAYLEIGH.value, value, k, evaluated=int(keep.sum()),
                      skipped=int((~keep).sum()))


def eigenerror_report(g: Graph, cr: CoarseningResult, k: int, zero_tol: float = 1e-9) -> LossReport:
    """Mean relative eigenvalue gap over terms with ``λ_i > 0``; the first term is always skipped."""
    _check_k(k, cr.coarse.n, "coarse n")
    lam = sym_eig(combinatorial_laplacian(g)).values[:k]
    lam_hat = sym_eig(doubly_weighted_laplacian(cr.coarse)).values[:k]
    scale = max(1.0, float(np.abs(lam).max(initial=0.0)))
    idx = np.arange(k)
    keep = (idx > 0) & (lam > zero_tol * scale)
    terms = np.abs(lam_hat[keep] - lam[keep]) / lam[keep]
    value = float(terms.mean()) if terms.size else 0.0
    return LossReport(LossName.EIGENERROR.value, value, k, evaluated=int(keep.sum()),
                      skipped=int(k - keep.sum()))


def subset_size_bounds(n: int):
    return math.ceil(n / 4), n // 2


def sample_subsets(g: Graph, cr: CoarseningResult, k: int, rng):
    """Draw ``k`` subsets valid on both graphs; each draw is retried up to ``MAX_RESAMPLE`` times."""
    lo, hi = subset_size_bounds(g.n)
    out = []
    for _ in range(k):
        for _attempt in range(MAX_RESAMPLE):
            size = int(rng.integers(lo, hi + 1))
            s = np.sort(rng.choice(g.n, size=size, replace=False))
            try:
                pair = (conductance(g, s), conductance(cr.coarse, cr.map.image(s)))
            except DegenerateSubset:
                continue
            out.append((s, pair))
            break
        else:
            raise ResampleExhausted(f"no valid subset after {MAX_RESAMPLE} draws")
    return out


def conductance_loss_report(g: Graph, cr: CoarseningResult, k: int, rng=None) -> LossReport:
    if k < 1:
        raise ValidationError("k must be at least 1")
    if g.n < 4:
        raise ValidationError("conductance loss needs at least 4 vertices")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    pairs = sample_subsets(g, cr, k, rng)
    value = float(np.mean([abs(a - b) for _, (a, b) in pairs]))
    return LossReport(LossName.CONDUCTANCE.value, value, k, seed=seed, evaluated=k)


def quadratic_loss(g, cr, k=DEFAULT_K) -> float:
    return quadratic_loss_report(g, cr, k).value


def normalized_quadratic_loss(g, cr, k=DEFAULT_K) -> float:
    return normalized_quadratic_loss_report(g, cr, k).value


def rayleigh_loss(g, cr, k=DEFAULT_K) -> float:
    return rayleigh_loss_report(g, cr, k).value


def eigenerror(g, cr, k=DEFAULT_K) -> float:
    return eigenerror_report(g, cr, k).value


def conductance_loss(g, cr, k=DEFAULT_K, rng=None) -> float:
    return conductance_loss_report(g, cr, k, rng).value


def improvement(l1: float, l2: float) -> float:
    if not l1 > 0:
        raise NonpositiveBaseline("baseline loss must be positive")
    return (l1 - l2) / l1


def compute_loss(name, g: Graph, cr: CoarseningResult, k: int = DEFAULT_K, seed=None) -> LossReport:
    name = LossName(name)
    if name is LossName.QUADRATIC:
        return quadratic_loss_report(g, cr, k)
    if name is LossName.NORMALIZED:
        return normalized_quadratic_loss_report(g, cr, k)
    if name is LossName.RAYLEIGH:
        return rayleigh_loss_report(g, cr, k)
    if name is LossName.EIGENERROR:
        return eigenerror_report(g, cr, k)
    return conductance_loss_report(g, cr, k, seed)
