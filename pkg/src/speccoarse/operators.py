"""Projection, lift and coarse operator for each of the three operator choices.

=======================  ======================  =======================  ============
choice                   project                 lift                     functional
=======================  ======================  =======================  ============
CombQuadratic            P                       P⁺                       xᵀLx
DoublyWeightedRayleigh   Γ^{-1/2} P⁺ᵀ            P⁺ Γ^{-1/2}              xᵀLx / xᵀx
NormalizedQuadratic      D̂^{1/2} P D^{-1/2}      D^{1/2} P⁺ D̂^{-1/2}      xᵀ𝓛x
=======================  ======================  =======================  ============
"""

from __future__ import annotations

import enum

import numpy as np

from .coarsening import CoarseningResult, lift_matrix, projection_matrix
from .errors import DimensionMismatch, IsolatedVertex
from .graph import (
    Graph,
    combinatorial_laplacian,
    degree_vector,
    doubly_weighted_laplacian,
    normalized_laplacian,
    quadratic_form,
    rayleigh_quotient,
)


class OperatorChoice(str, enum.Enum):
    COMB_QUADRATIC = "comb"
    DOUBLY_WEIGHTED_RAYLEIGH = "dw"
    NORMALIZED_QUADRATIC = "norm"


def _positive_degrees(g: Graph) -> np.ndarray:
    d = degree_vector(g)
    zero = np.flatnonzero(d <= 0)
    if zero.size:
        raise IsolatedVertex(zero[0])
    return d


def coarse_operator(choice, g: Graph, cr: CoarseningResult) -> np.ndarray:
    choice = OperatorChoice(choice)
    if choice is OperatorChoice.COMB_QUADRATIC:
        return combinatorial_laplacian(cr.coarse)
    if choice is OperatorChoice.DOUBLY_WEIGHTED_RAYLEIGH:
        return doubly_weighted_laplacian(cr.coarse)
    _positive_degrees(g)
    return normalized_laplacian(cr.coarse)


def original_operator(choice, g: Graph) -> np.ndarray:
    choice = OperatorChoice(choice)
    if choice is OperatorChoice.NORMALIZED_QUADRATIC:
        return normalized_laplacian(g)
    return combinatorial_laplacian(g)


def project_matrix(choice, g: Graph, cr: CoarseningResult) -> np.ndarray:
    choice = OperatorChoice(choice)
    if choice is OperatorChoice.COMB_QUADRATIC:
        return projection_matrix(cr.map)
    if choice is OperatorChoice.DOUBLY_WEIGHTED_RAYLEIGH:
        gamma = cr.map.sizes
        return lift_matrix(cr.map).T / np.sqrt(gamma)[:, None]
    d, dh = _positive_degrees(g), _positive_degrees(cr.coarse)
    return np.sqrt(dh)[:, None] * projection_matrix(cr.map) / np.sqrt(d)[None, :]


def lift_operator_matrix(choice, g: Graph, cr: CoarseningResult) -> np.ndarray:
    choice = OperatorChoice(choice)
    if choice is OperatorChoice.COMB_QUADRATIC:
        return lift_matrix(cr.map)
    if choice is OperatorChoice.DOUBLY_WEIGHTED_RAYLEIGH:
        return lift_matrix(cr.map) / np.sqrt(cr.map.sizes)[None, :]
    d, dh = _positive_degrees(g), _positive_degrees(cr.coarse)
    return np.sqrt(d)[:, None] * lift_matrix(cr.map) / np.sqrt(dh)[None, :]


def _check(x, n, what):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DimensionMismatch(f"{what} vector must have length {n}, got shape {x.shape}")
    return x


def lift(choice, g: Graph, cr: CoarseningResult, x_hat) -> np.ndarray:
    x_hat = _check(x_hat, cr.map.n_hat, "coarse")
    return lift_operator_matrix(choice, g, cr) @ x_hat


def project(choice, g: Graph, cr: CoarseningResult, x) -> np.ndarray:
    x = _check(x, g.n, "original")
    return project_matrix(choice, g, cr) @ x


def functional(choice, m: np.ndarray, x) -> float:
    """``F`` of the table row: Rayleigh quotient for the doubly-weighted row, else quadratic form."""
    if OperatorChoice(choice) is OperatorChoice.DOUBLY_WEIGHTED_RAYLEIGH:
        return rayleigh_quotient(m, x)
    return quadratic_form(m, x)
