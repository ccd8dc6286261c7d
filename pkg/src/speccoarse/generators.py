"""Synthetic graph families with unit weights, restricted to their largest component."""

from __future__ import annotations

import enum
import math

import networkx as nx
import numpy as np

from .errors import GenerationFailed, ValidationError
from .graph import Graph

MIN_N = 8


class Kind(str, enum.Enum):
    ER = "er"
    BA = "ba"
    WS = "ws"
    GEO = "geo"


def er_probability(n: int) -> float:
    return 0.1 * 512 / n


def geo_radius(n: int) -> float:
    return 5.12 / math.sqrt(n)


def _nx_graph(kind: Kind, n: int, seed: int):
    if kind is Kind.ER:
        return nx.fast_gnp_random_graph(n, min(1.0, er_probability(n)), seed=seed)
    if kind is Kind.BA:
        return nx.barabasi_albert_graph(n, 4, seed=seed, initial_graph=nx.complete_graph(5))
    if kind is Kind.WS:
        return nx.watts_strogatz_graph(n, 10, 0.1, seed=seed)
    return nx.random_geometric_graph(n, geo_radius(n), dim=2, seed=seed)


def from_networkx(h) -> Graph:
    """Relabel nodes ``0..n-1`` in sorted order; edge weights default to 1."""
    nodes = sorted(h.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    edges = [(index[a], index[b], float(d.get("weight", 1.0))) for a, b, d in h.edges(data=True)]
    return Graph.from_edges(len(nodes), edges)


def generate_graph(kind, n: int, rng=None) -> Graph:
    kind = Kind(kind)
    if n < MIN_N:
        raise ValidationError(f"n must be at least {MIN_N}")
    seed = int(np.random.default_rng(rng).integers(2**31 - 1))
    h = _nx_graph(kind, n, seed)
    giant = max(nx.connected_components(h), key=lambda c: (len(c), -min(c)))
    if len(giant) < MIN_N:
        raise GenerationFailed(f"largest component has only {len(giant)} vertices")
    return from_networkx(h.subgraph(giant))
