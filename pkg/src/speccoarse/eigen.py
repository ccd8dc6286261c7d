"""Dense symmetric eigendecomposition with a fixed sign convention.

The default solver is cyclic Jacobi using a round-robin (tournament) ordering
so that the n/2 disjoint rotations of each round are applied as a single
vectorized update.  Large matrices fall back to LAPACK; both paths share the
same ordering and sign normalization.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NoConvergence

JACOBI_MAX_N = 128
OFF_TOL = 1e-11
ROUNDOFF_FLOOR = 1e-15
MAX_SWEEPS = 100


class EigenDecomposition(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def _round_robin(m):
    """Pairings for the m-1 rounds of a sweep (m even); each index appears once per round."""
    idx = np.arange(m)
    rounds = []
    for _ in range(m - 1):
        top, bot = idx[: m // 2], idx[m // 2:][::-1]
        rounds.append((np.minimum(top, bot), np.maximum(top, bot)))
        idx = np.concatenate(([idx[0]], np.roll(idx[1:], 1)))
    return rounds


def jacobi_eig(m: np.ndarray, tol: float = OFF_TOL, max_sweeps: int = MAX_SWEEPS):
    """Unsorted eigenpairs of symmetric ``m`` by parallel cyclic Jacobi."""
    n = m.shape[0]
    scale = np.linalg.norm(m)
    if n <= 1 or scale == 0.0:
        return np.diag(m).astype(float).copy(), np.eye(n)
    size = n + (n % 2)
    a = np.zeros((size, size))
    a[:n, :n] = 0.5 * (m + m.T)
    v = np.eye(size)
    rounds = _round_robin(size)
    # absolute tolerance, floored where rounding in large matrices sets in
    thresh = max(tol, ROUNDOFF_FLOOR * scale)
    offmask = ~np.eye(size, dtype=bool)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[offmask])
        if off <= thresh:
            return np.diag(a)[:n].copy(), v[:n, :n].copy()
        for p, q in rounds:
            apq = a[p, q]
            active = np.abs(apq) > 1e-300
            if not active.any():
                continue
            app, aqq = a[p, p], a[q, q]
            safe = np.where(active, apq, 1.0)
            tau = (aqq - app) / (2.0 * safe)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            ap, aq = a[p], a[q]
            a[p], a[q] = c[:, None] * ap - s[:, None] * aq, s[:, None] * ap + c[:, None] * aq
            ap, aq = a[:, p], a[:, q]
            a[:, p], a[:, q] = ap * c - aq * s, ap * s + aq * c
            vp, vq = v[:, p], v[:, q]
            v[:, p], v[:, q] = vp * c - vq * s, vp * s + vq * c
    raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")


def fix_signs(vectors: np.ndarray, tie_tol: float = 1e-12) -> np.ndarray:
    """Flip columns so the largest-magnitude entry (lowest index on ties) is positive."""
    if vectors.size == 0:
        return vectors
    mag = np.abs(vectors)
    near = mag >= mag.max(axis=0, keepdims=True) - tie_tol
    lead = np.argmax(near, axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig(m, method: str = "auto") -> EigenDecomposition:
    """Eigenvalues ascending with sign-normalized orthonormal eigenvectors.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    ``JACOBI_MAX_N``).
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch("matrix must be square")
    n = m.shape[0]
    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX_N else "lapack"
    if not np.any(m):
        return EigenDecomposition(np.zeros(n), np.eye(n))
    if method == "jacobi":
        vals, vecs = jacobi_eig(m)
    elif method == "lapack":
        vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(vals, kind="stable")
    return EigenDecomposition(vals[order], fix_signs(vecs[:, order]))


def eigvalsh(m) -> np.ndarray:
    return sym_eig(m).values
