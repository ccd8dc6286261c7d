"""Second-order invariant graph networks built from the normalized equivariant basis.

Basis operators are indexed 1..15 (matrix to matrix), 1..5 (vector to
matrix) and 1..5 (matrix to vector).  Averages are normalized by ``1/n`` or
``1/n²`` so that outputs stay comparable across graph sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ChannelMismatch, DimensionMismatch, IndexOutOfRange, KTooLarge

MAX_PARTITION_K = 10

# Partition labels of each basis element: indices 1,2 are output axes, 3,4 input axes.
PARTITIONS_2TO2 = (
    "{{1,3},{2,4}}", "{{1,4},{2,3}}", "{{1,2,3,4}}",
    "{{1,4},{2},{3}}", "{{1,3},{2},{4}}", "{{1,3,4},{2}}",
    "{{1},{2,4},{3}}", "{{1},{2,3},{4}}", "{{1},{2,3,4}}",
    "{{1},{2},{3},{4}}", "{{1},{2},{3,4}}",
    "{{1,2},{3},{4}}", "{{1,2},{3,4}}",
    "{{1,2,4},{3}}", "{{1,2,3},{4}}",
)
PARTITIONS_1TO2 = ("{{1,2,3}}", "{{1,3},{2}}", "{{1,2},{3}}", "{{1},{2,3}}", "{{1},{2},{3}}")
PARTITIONS_2TO1 = ("{{1,2,3}}", "{{1,2},{3}}", "{{1,3},{2}}", "{{1},{2},{3}}", "{{1,2},{3}}")


# -- partitions ---------------------------------------------------------------

def bell(k: int) -> int:
    if not 0 <= k <= MAX_PARTITION_K:
        raise KTooLarge(f"k must lie in [0, {MAX_PARTITION_K}]")
    row = [1]
    for _ in range(k):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def enumerate_partitions(k: int) -> list[tuple[tuple[int, ...], ...]]:
    """All set partitions of ``{1..k}``, blocks ordered by their minimum element."""
    if not 0 <= k <= MAX_PARTITION_K:
        raise KTooLarge(f"k must lie in [0, {MAX_PARTITION_K}]")
    if k == 0:
        return [()]
    out = []

    def grow(code, top):
        if len(code) == k:
            blocks = [[] for _ in range(top + 1)]
            for elem, b in enumerate(code, 1):
                blocks[b].append(elem)
            out.append(tuple(tuple(b) for b in blocks))
            return
        for b in range(top + 2):
            grow(code + [b], max(top, b))

    grow([0], 0)
    return out


# -- partition norm -----------------------------------------------------------

class PartitionNorm2(NamedTuple):
    diag_part: float
    matrix_part: float

    def le(self, other: "PartitionNorm2", slack: float = 0.0) -> bool:
        return self.diag_part <= other.diag_part + slack and self.matrix_part <= other.matrix_part + slack

    def max(self) -> float:
        return max(self.diag_part, self.matrix_part)


def partition_norm_2(a) -> PartitionNorm2:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch("partition norm needs a square matrix")
    n = a.shape[0]
    if n == 0:
        return PartitionNorm2(0.0, 0.0)
    return PartitionNorm2(float(np.linalg.norm(np.diag(a)) / np.sqrt(n)), float(np.linalg.norm(a) / n))


def vector_norm(x) -> float:
    """``‖x‖/√n``, the normalized norm for order-one tensors."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x) / np.sqrt(x.size)) if x.size else 0.0


# -- basis operators ------------------------------------------------------------

def _square(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch("operator input must be square")
    return a


def le_op_2to2(index: int, a) -> np.ndarray:
    a = _square(a)
    n = a.shape[0]
    ones = np.ones((n, n))
    dg = np.diag(a)
    if index == 1:
        return a.copy()
    if index == 2:
        return a.T.copy()
    if index == 3:
        return np.diag(dg)
    if index in (4, 5, 6):
        r = a.mean(axis=1)
        return (r[:, None] * ones, r[None, :] * ones, np.diag(r))[index - 4]
    if index in (7, 8, 9):
        c = a.mean(axis=0)
        return (c[:, None] * ones, c[None, :] * ones, np.diag(c))[index - 7]
    if index in (10, 11):
        m = a.sum() / n**2
        return m * ones if index == 10 else m * np.eye(n)
    if index in (12, 13):
        m = dg.sum() / n
        return m * ones if index == 12 else m * np.eye(n)
    if index == 14:
        return dg[:, None] * ones
    if index == 15:
        return dg[None, :] * ones
    raise IndexOutOfRange(f"2->2 basis index {index} not in 1..15")


def le_op_1to2(index: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("operator input must be a vector")
    n = x.size
    ones = np.ones((n, n))
    if index == 1:
        return np.diag(x)
    if index == 2:
        return x[:, None] * ones
    if index == 3:
        return x[None, :] * ones
    if index == 4:
        return x.mean() * np.eye(n) if n else np.zeros((0, 0))
    if index == 5:
        return x.mean() * ones if n else np.zeros((0, 0))
    raise IndexOutOfRange(f"1->2 basis index {index} not in 1..5")


def le_op_2to1(index: int, a) -> np.ndarray:
    a = _square(a)
    n = a.shape[0]
    if index == 1:
        return np.diag(a).copy()
    if index == 2:
        return a.mean(axis=1)
    if index == 3:
        return a.mean(axis=0)
    if index == 4:
        return np.full(n, a.sum() / n**2)
    if index == 5:
        return np.full(n, np.trace(a) / n)
    raise IndexOutOfRange(f"2->1 basis index {index} not in 1..5")


# -- network ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IGNLayer:
    coef: np.ndarray       # (15, d_in, d_out)
    bias_all: np.ndarray   # (d_out,) spans the all-ones pattern
    bias_diag: np.ndarray  # (d_out,) spans the identity pattern

    @property
    def d_in(self) -> int:
        return self.coef.shape[1]

    @property
    def d_out(self) -> int:
        return self.coef.shape[2]


@dataclass(frozen=True, eq=False)
class IGNModel:
    layers: tuple
    head: np.ndarray  # (2 * d_T, d_out): rows [global means; diagonal means]

    @property
    def widths(self) -> tuple:
        return (self.layers[0].d_in,) + tuple(l.d_out for l in self.layers)

    @property
    def d_out(self) -> int:
        return self.head.shape[1]

    @classmethod
    def random(cls, depth: int = 5, width: int = 16, d_in: int = 1, d_out: int = 8, rng=None) -> "IGNModel":
        rng = np.random.default_rng(rng)
        widths = [d_in] + [width] * depth
        layers = []
        for a, b in zip(widths[:-1], widths[1:]):
            coef = rng.normal(0.0, np.sqrt(1.0 / (15 * a)), size=(15, a, b))
            layers.append(IGNLayer(coef, np.zeros(b), np.zeros(b)))
        head = rng.normal(0.0, np.sqrt(1.0 / (2 * widths[-1])), size=(2 * widths[-1], d_out))
        return cls(tuple(layers), head)


def apply_layer(layer: IGNLayer, x: np.ndarray) -> np.ndarray:
    """Equivariant linear map on an ``n x n x d_in`` tensor."""
    n = x.shape[0]
    c = layer.coef
    dg = np.einsum("iic->ic", x)
    r = x.mean(axis=1)
    cm = x.mean(axis=0)
    tot = x.mean(axis=(0, 1))
    dmean = dg.mean(axis=0)
    y = x @ c[0] + x.transpose(1, 0, 2) @ c[1]
    rows = r @ c[3] + cm @ c[6] + dg @ c[13]
    cols = r @ c[4] + cm @ c[7] + dg @ c[14]
    const = tot @ c[9] + dmean @ c[11] + layer.bias_all
    diag = dg @ c[2] + r @ c[5] + cm @ c[8] + (tot @ c[10] + dmean @ c[12] + layer.bias_diag)[None, :]
    y += rows[:, None, :] + cols[None, :, :] + const[None, None, :]
    idx = np.arange(n)
    y[idx, idx] += diag
    return y


def invariant_features(x: np.ndarray) -> np.ndarray:
    return np.concatenate([x.mean(axis=(0, 1)), np.einsum("iic->ic", x).mean(axis=0)])


def ign_forward(model: IGNModel, inp) -> np.ndarray:
    """Graph-level output; a rectifier follows every layer except the last."""
    x = np.asarray(inp, dtype=float)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.ndim != 3 or x.shape[0] != x.shape[1]:
        raise DimensionMismatch("input must be n x n or n x n x d")
    if x.shape[2] != model.widths[0]:
        raise ChannelMismatch(f"input has {x.shape[2]} channels, model expects {model.widths[0]}")
    last = len(model.layers) - 1
    for t, layer in enumerate(model.layers):
        x = apply_layer(layer, x)
        if t < last:
            x = np.maximum(x, 0.0)
    return invariant_features(x) @ model.head
