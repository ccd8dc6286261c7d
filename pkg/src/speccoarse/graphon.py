"""Graphon models, sampling on fixed and random grids, and edge-probability smoothing."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomain, SchemeMismatch, TooSmall, ValidationError
from .ign import IGNModel, ign_forward

N_REF = 1024


class Grid(str, enum.Enum):
    FIXED = "fixed"
    RANDOM = "random"


class Observation(str, enum.Enum):
    EDGE_WEIGHT = "ew"
    BERNOULLI = "ber"


@dataclass(frozen=True)
class SampleScheme:
    grid: Grid
    observation: Observation

    def __post_init__(self):
        object.__setattr__(self, "grid", Grid(self.grid))
        object.__setattr__(self, "observation", Observation(self.observation))


class Mode(str, enum.Enum):
    EW_FIXED = "ew-fixed"
    EW_RANDOM = "ew-random"
    EP_RAW = "ep-raw"
    EP_SMOOTH = "ep-smooth"


@dataclass(frozen=True, eq=False)
class Graphon:
    """Symmetric kernel on the unit square selected by ``kind``.

    ``constant`` takes ``p``; ``sbm`` takes ascending ``boundaries`` from 0 to
    1 and a symmetric block ``probs`` matrix; ``lipschitz`` and
    ``piecewise_lipschitz`` have no parameters.
    """

    kind: str
    p: float = 0.0
    boundaries: tuple = ()
    probs: tuple = ()

    @classmethod
    def constant(cls, p: float) -> "Graphon":
        if not 0.0 <= p <= 1.0:
            raise ValidationError("p must lie in [0, 1]")
        return cls("constant", p=float(p))

    @classmethod
    def sbm(cls, boundaries=(0.0, 0.5, 1.0), probs=((0.1, 0.25), (0.25, 0.4))) -> "Graphon":
        b = np.asarray(boundaries, dtype=float)
        q = np.asarray(probs, dtype=float)
        k = b.size - 1
        if k < 1 or b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise ValidationError("boundaries must increase strictly from 0 to 1")
        if q.shape != (k, k) or not np.array_equal(q, q.T) or q.min() < 0 or q.max() > 1:
            raise ValidationError("probs must be a symmetric matrix in [0, 1] matching the blocks")
        return cls("sbm", boundaries=tuple(b), probs=tuple(map(tuple, q)))

    @classmethod
    def lipschitz(cls) -> "Graphon":
        return cls("lipschitz")

    @classmethod
    def piecewise_lipschitz(cls) -> "Graphon":
        return cls("piecewise_lipschitz")

    @classmethod
    def named(cls, name: str) -> "Graphon":
        """Models used in experiments: ``er``, ``sbm``, ``lip``, ``plip``."""
        table = {"er": lambda: cls.constant(0.1), "sbm": cls.sbm,
                 "lip": cls.lipschitz, "plip": cls.piecewise_lipschitz}
        if name not in table:
            raise ValidationError(f"unknown graphon model {name!r}")
        return table[name]()

    def __call__(self, u, v):
        return evaluate(self, u, v)


def _block(b, u):
    return np.clip(np.searchsorted(b, u, side="right") - 1, 0, b.size - 2)


def evaluate(wg: Graphon, u, v):
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if np.any((u < 0) | (u > 1) | (v < 0) | (v > 1)) or np.any(np.isnan(u) | np.isnan(v)):
        raise OutOfDomain("graphon arguments must lie in [0, 1]")
    if wg.kind == "constant":
        out = np.full(np.broadcast(u, v).shape, wg.p)
    elif wg.kind == "sbm":
        b = np.asarray(wg.boundaries)
        out = np.asarray(wg.probs)[_block(b, u), _block(b, v)]
    elif wg.kind == "lipschitz":
        out = (u + v + 1.0) / 4.0
    elif wg.kind == "piecewise_lipschitz":
        third = 1.0 / 3.0
        out = (np.mod(u, third) + np.mod(v, third) + 1.0) / 4.0
    else:
        raise ValidationError(f"unknown graphon kind {wg.kind!r}")
    return out[()] if np.ndim(out) == 0 else out


def sample_grid(n: int, grid, rng=None) -> np.ndarray:
    if n < 1:
        raise ValidationError("n must be at least 1")
    if Grid(grid) is Grid.FIXED:
        return np.arange(n) / n
    return np.sort(np.random.default_rng(rng).uniform(0.0, 1.0, size=n))


def _matrix_on(wg, u):
    m = evaluate(wg, u[:, None], u[None, :])
    return 0.5 * (m + m.T)


def sample_weight_matrix(wg: Graphon, n: int, scheme: SampleScheme, rng=None) -> np.ndarray:
    if scheme.observation is not Observation.EDGE_WEIGHT:
        raise SchemeMismatch("weight matrices need the edge-weight observation scheme")
    return _matrix_on(wg, sample_grid(n, scheme.grid, rng))


def sample_adjacency(wg: Graphon, n: int, scheme: SampleScheme, rng=None) -> np.ndarray:
    if scheme.observation is not Observation.BERNOULLI:
        raise SchemeMismatch("adjacency sampling needs the Bernoulli observation scheme")
    rng = np.random.default_rng(rng)
    p = _matrix_on(wg, sample_grid(n, scheme.grid, rng))
    draws = rng.uniform(size=(n, n)) < p
    a = np.tril(draws, -1).astype(float)
    return a + a.T


def discretize_graphon(wg: Graphon, n_ref: int = N_REF) -> np.ndarray:
    if n_ref < 2:
        raise ValidationError("reference resolution must be at least 2")
    return _matrix_on(wg, sample_grid(n_ref, Grid.FIXED))


# -- estimation -----------------------------------------------------------------

def neighborhood_distances(a: np.ndarray) -> np.ndarray:
    """``max_{k != i,j} |⟨A_i - A_j, A_k⟩| / n`` for every pair; diagonal set to 0."""
    n = a.shape[0]
    g = a @ a / n
    dist = np.zeros((n, n))
    idx = np.arange(n)
    for i in range(n):
        diff = np.abs(g[i][None, :] - g)
        diff[:, i] = 0.0
        diff[idx, idx] = 0.0
        dist[i] = diff.max(axis=1)
    dist[idx, idx] = 0.0
    return dist


def estimate_probabilities(a, h: float | None = None) -> np.ndarray:
    """Neighborhood-smoothing estimate of the edge probabilities behind ``a``.

    Vertex ``i`` borrows from the rows whose distance to row ``i`` is within
    the ``h``-quantile, ``h = sqrt(log n / n)``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("adjacency must be square")
    n = a.shape[0]
    if n < 4:
        raise TooSmall("estimation needs at least 4 vertices")
    if not np.array_equal(a, a.T) or np.any((a != 0) & (a != 1)):
        raise ValidationError("adjacency must be symmetric with 0-1 entries")
    if h is None:
        h = np.sqrt(np.log(n) / n)
    dist = neighborhood_distances(a)
    off = ~np.eye(n, dtype=bool)
    others = dist[off].reshape(n, n - 1)
    q = np.quantile(others, h, axis=1)
    nbr = (dist <= q[:, None]) & off
    m = nbr / nbr.sum(axis=1, keepdims=True)
    p = 0.5 * (a @ m.T + m @ a)
    p = 0.5 * (p + p.T)
    return np.clip(p, 0.0, 1.0)


def d2inf(p, q) -> float:
    """``max_i n^{-1/2} ‖P_i - Q_i‖``."""
    diff = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    return float(np.max(np.linalg.norm(diff, axis=1)) / np.sqrt(diff.shape[0]))


# -- experiment -----------------------------------------------------------------

def mode_input(wg: Graphon, n: int, mode, rng) -> np.ndarray:
    mode = Mode(mode)
    if mode is Mode.EW_FIXED:
        return sample_weight_matrix(wg, n, SampleScheme(Grid.FIXED, Observation.EDGE_WEIGHT))
    if mode is Mode.EW_RANDOM:
        return sample_weight_matrix(wg, n, SampleScheme(Grid.RANDOM, Observation.EDGE_WEIGHT), rng)
    a = sample_adjacency(wg, n, SampleScheme(Grid.RANDOM, Observation.BERNOULLI), rng)
    return a if mode is Mode.EP_RAW else estimate_probabilities(a)


def _run_rng(seed: int, n: int, mode: Mode):
    return np.random.default_rng([int(seed), int(n), list(Mode).index(mode)])


def convergence_experiment(wg: Graphon, model: IGNModel, n_list, mode, seeds,
                           n_ref: int = N_REF) -> list[tuple[int, int, float]]:
    """``(n, seed, ‖Φ(input_n) − Φ(reference)‖₂)`` for every size and seed."""
    mode = Mode(mode)
    n_list = list(n_list)
    if n_list != sorted(n_list):
        raise ValidationError("sizes must be ascending")
    ref = ign_forward(model, discretize_graphon(wg, n_ref))
    rows = []
    for n in n_list:
        for seed in seeds:
            x = mode_input(wg, n, mode, _run_rng(seed, n, mode))
            rows.append((int(n), int(seed), float(np.linalg.norm(ign_forward(model, x) - ref))))
    return rows


def median_errors(rows) -> dict:
    by_n = {}
    for n, _, err in rows:
        by_n.setdefault(n, []).append(err)
    return {n: float(np.median(v)) for n, v in by_n.items()}
