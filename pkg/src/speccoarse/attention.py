"""Softmax and kernelized attention, and their message passing with a virtual node.

The virtual node collects ``S1 = Σ_j φ(k_j)`` and ``S2 = Σ_j φ(k_j) v_jᵀ``
from all graph nodes; each node then combines its own feature-mapped query
with the broadcast state.  This evaluates kernelized attention exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from .errors import ShapeMismatch, ValidationError


@dataclass(frozen=True, eq=False)
class AttentionParams:
    w_q: np.ndarray  # d x d'
    w_k: np.ndarray  # d x d'
    w_v: np.ndarray  # d x d

    def __post_init__(self):
        d = self.w_v.shape[0]
        if self.w_v.shape != (d, d):
            raise ShapeMismatch("W_V must be square")
        if self.w_q.shape != self.w_k.shape or self.w_q.ndim != 2 or self.w_q.shape[0] != d:
            raise ShapeMismatch("W_Q and W_K must both be d x d'")
        for m in (self.w_q, self.w_k, self.w_v):
            if not np.all(np.isfinite(m)):
                raise ValidationError("attention parameters must be finite")

    @property
    def d(self) -> int:
        return self.w_v.shape[0]

    @property
    def d_key(self) -> int:
        return self.w_q.shape[1]

    @classmethod
    def random(cls, d: int, d_key: int, rng=None, scale: float | None = None) -> "AttentionParams":
        rng = np.random.default_rng(rng)
        s = 1.0 / np.sqrt(d) if scale is None else scale
        return cls(rng.normal(0, s, (d, d_key)), rng.normal(0, s, (d, d_key)), rng.normal(0, s, (d, d)))


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """``performer`` with frozen Gaussian directions (rows of ``w``) or ``linear`` (elu + 1)."""

    kind: str
    w: np.ndarray | None = None

    @classmethod
    def performer(cls, m: int, d_key: int, rng=None) -> "FeatureMap":
        if m < 1:
            raise ValidationError("m must be at least 1")
        w = np.random.default_rng(rng).standard_normal((m, d_key))
        w.setflags(write=False)
        return cls("performer", w)

    @classmethod
    def linear_transformer(cls) -> "FeatureMap":
        return cls("linear")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "performer":
            if x.shape[-1] != self.w.shape[1]:
                raise ShapeMismatch("feature map input width does not match its directions")
            m = self.w.shape[0]
            sq = 0.5 * np.sum(x * x, axis=-1, keepdims=True)
            return np.exp(x @ self.w.T - sq) / np.sqrt(m)
        if self.kind == "linear":
            return np.where(x >= 0, x + 1.0, np.exp(np.minimum(x, 0.0)))
        raise ValidationError(f"unknown feature map {self.kind!r}")


def _check_x(x, p: AttentionParams):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != p.d:
        raise ShapeMismatch(f"x must be n x {p.d}")
    return x


def full_attention(x, p: AttentionParams) -> np.ndarray:
    x = _check_x(x, p)
    scores = (x @ p.w_q) @ (x @ p.w_k).T
    return softmax(scores, axis=1) @ (x @ p.w_v)


def linear_attention(x, p: AttentionParams, phi: FeatureMap) -> np.ndarray:
    x = _check_x(x, p)
    fq, fk = phi(x @ p.w_q), phi(x @ p.w_k)
    v = x @ p.w_v
    num = fq @ (fk.T @ v)
    den = fq @ fk.sum(axis=0)
    return num / den[:, None]


def vn_aggregate(x, p: AttentionParams, phi: FeatureMap):
    """Virtual-node state ``(S1, S2)`` summed over the messages of every node."""
    x = _check_x(x, p)
    s1 = None
    s2 = None
    for xj in x:
        fk = phi(xj @ p.w_k)
        vj = xj @ p.w_v
        msg1, msg2 = fk, np.outer(fk, vj)
        s1 = msg1 if s1 is None else s1 + msg1
        s2 = msg2 if s2 is None else s2 + msg2
    return s1, s2


def gn_update(x_i, vn_state, p: AttentionParams, phi: FeatureMap) -> np.ndarray:
    s1, s2 = vn_state
    fq = phi(np.asarray(x_i, dtype=float) @ p.w_q)
    return (fq @ s2) / (fq @ s1)


def mpnn_vn_attention(x, p: AttentionParams, phi: FeatureMap) -> np.ndarray:
    """Aggregate into the virtual node, then update every graph node from its state."""
    x = _check_x(x, p)
    state = vn_aggregate(x, p, phi)
    return np.stack([gn_update(xi, state, p, phi) for xi in x]) if len(x) else np.zeros((0, p.d))


def _check_deepsets(x, a, b, c):
    x, a, b, c = (np.asarray(t, dtype=float) for t in (x, a, b, c))
    if x.ndim != 2 or a.ndim != 2 or a.shape != b.shape or a.shape[0] != x.shape[1] or c.shape != (a.shape[1],):
        raise ShapeMismatch("need x: n x d_in, A and B: d_in x d_out, c: d_out")
    return x, a, b, c


def deepsets_layer(x, a, b, c) -> np.ndarray:
    x, a, b, c = _check_deepsets(x, a, b, c)
    n = x.shape[0]
    if n == 0:
        return np.zeros((0, a.shape[1]))
    # (1/n) 1 1ᵀ X B is the column mean of X times B, repeated on every row
    return x @ a + np.ones((n, 1)) * (x.mean(axis=0) @ b) + c


def mpnn_vn_deepsets(x, a, b, c) -> np.ndarray:
    """Two rounds of message passing with a virtual node that reproduce ``deepsets_layer``.

    Round 1: each node keeps ``x_i A`` while the virtual node averages the
    incoming ``x_i``.  Round 2: the virtual node broadcasts its mean and each
    node adds ``mean B + c``.
    """
    x, a, b, c = _check_deepsets(x, a, b, c)
    if x.shape[0] == 0:
        return np.zeros((0, a.shape[1]))
    # round 1: nodes apply A in parallel, the virtual node takes column means
    node = x @ a
    vn = x.mean(axis=0)
    # round 2: broadcast mean B to every node
    msg = vn @ b
    return np.stack([h + msg + c for h in node])
