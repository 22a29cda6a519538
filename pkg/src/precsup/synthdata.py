"""Synthetic sparse-precision graph models and distributional samplers.

Three graph families share the same recipe: unit diagonal, a fixed value
(default 1/3) on the edges of the graph, zero elsewhere. Samplers draw
mean-zero rows with covariance equal to the model's inverse, either
Gaussian or elliptical Laplace (a Gaussian scale mixture with standard
exponential mixing, which keeps the covariance exact).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelConstructionError, NotPositiveDefiniteError
from .matcore import spd_cholesky, spd_inverse

DEFAULT_OFF_VALUE = 1.0 / 3.0


@dataclass
class GraphModel:
    """A sparse precision matrix with known support.

    `kind` is one of tridiagonal / binary_tree / block_diagonal, `params`
    echoes the constructor arguments, `matrix` is the precision matrix and
    `kappa` the max nonzero count over rows (diagonal included).
    """

    kind: str
    params: dict = field(repr=True, default_factory=dict)
    off_value: float = DEFAULT_OFF_VALUE
    matrix: np.ndarray = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def kappa(self) -> int:
        return int(np.max(np.sum(self.matrix != 0, axis=1)))

    def support(self) -> np.ndarray:
        """Boolean symmetric support pattern (diagonal True)."""
        return self.matrix != 0


def _from_adjacency(kind: str, params: dict, adjacency: np.ndarray,
                    off_value: float) -> GraphModel:
    omega = np.eye(adjacency.shape[0]) + off_value * adjacency
    return GraphModel(kind=kind, params=params, off_value=off_value, matrix=omega)


def make_tridiagonal(p: int, off_value: float = DEFAULT_OFF_VALUE) -> GraphModel:
    """Chain graph on p nodes: ones on the diagonal, `off_value` on the
    first off-diagonals. Positive definite for |off_value| < 1/2 by the
    eigenvalue formula 1 + 2*off_value*cos(k*pi/(p+1))."""
    if p < 2:
        raise ValueError(f"tridiagonal model needs p >= 2, got {p}")
    adj = np.zeros((p, p))
    idx = np.arange(p - 1)
    adj[idx, idx + 1] = 1.0
    adj[idx + 1, idx] = 1.0
    return _from_adjacency("tridiagonal", {"p": p}, adj, off_value)


def make_binary_tree(depth: int, off_value: float = DEFAULT_OFF_VALUE) -> GraphModel:
    """Binary tree with depth(depth+1)/2 nodes, heap-indexed: node i links
    to children 2i and 2i+1 (1-based) where those exist, so the graph has
    p-1 edges and row degree at most 3.

    The matrix is rejected if it fails a positive-definiteness check;
    off_value 1/3 always passes (tree adjacency spectral radius < 3).
    """
    if depth < 2:
        raise ValueError(f"binary tree model needs depth >= 2, got {depth}")
    p = depth * (depth + 1) // 2
    adj = np.zeros((p, p))
    for node in range(1, p + 1):
        for child in (2 * node, 2 * node + 1):
            if child <= p:
                adj[node - 1, child - 1] = 1.0
                adj[child - 1, node - 1] = 1.0
    model = _from_adjacency("binary_tree", {"depth": depth, "p": p}, adj, off_value)
    try:
        spd_cholesky(model.matrix)
    except NotPositiveDefiniteError as exc:
        raise ModelConstructionError(
            f"binary tree precision (depth={depth}, off_value={off_value}) "
            f"is not positive definite") from exc
    return model


def make_block_diagonal(blocks: int, block_size: int,
                        off_value: float = DEFAULT_OFF_VALUE) -> GraphModel:
    """Disjoint complete graphs: `blocks` diagonal blocks of size
    `block_size`, each block off_value everywhere plus (1-off_value) on
    the diagonal. Block eigenvalues are 1-off_value (multiplicity
    block_size-1) and 1+(block_size-1)*off_value."""
    if blocks < 1:
        raise ValueError(f"block model needs blocks >= 1, got {blocks}")
    if block_size < 2:
        raise ValueError(f"block model needs block_size >= 2, got {block_size}")
    p = blocks * block_size
    adj = np.zeros((p, p))
    ones = np.ones((block_size, block_size)) - np.eye(block_size)
    for b in range(blocks):
        lo = b * block_size
        adj[lo:lo + block_size, lo:lo + block_size] = ones
    return _from_adjacency(
        "block_diagonal", {"blocks": blocks, "block_size": block_size, "p": p},
        adj, off_value)


MODEL_BUILDERS = {
    "tridiagonal": make_tridiagonal,
    "binary_tree": make_binary_tree,
    "block_diagonal": make_block_diagonal,
}


@dataclass
class SampleSet:
    """n i.i.d. rows drawn from a graph model's implied distribution."""

    X: np.ndarray
    model: GraphModel
    distribution: str
    seed: int

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def _covariance_factor(model: GraphModel) -> np.ndarray:
    sigma = spd_inverse(model.matrix)
    return spd_cholesky(sigma)


def sample_gaussian(model: GraphModel, n: int, seed: int) -> SampleSet:
    """Mean-zero Gaussian rows with covariance inverse equal to the model."""
    if n < 1:
        raise ValueError(f"need n >= 1 rows, got {n}")
    chol = _covariance_factor(model)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, model.dim))
    return SampleSet(X=z @ chol.T, model=model, distribution="gaussian", seed=seed)


def sample_laplace(model: GraphModel, n: int, seed: int) -> SampleSet:
    """Elliptical multivariate Laplace rows: sqrt(W) * (Gaussian row) with
    W standard exponential. E[W] = 1 keeps the covariance exactly the
    model's inverse; margins have kurtosis 6 (excess 3)."""
    if n < 1:
        raise ValueError(f"need n >= 1 rows, got {n}")
    chol = _covariance_factor(model)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, model.dim))
    w = rng.standard_exponential(n)
    x = np.sqrt(w)[:, None] * (z @ chol.T)
    return SampleSet(X=x, model=model, distribution="laplace", seed=seed)


SAMPLERS = {"gaussian": sample_gaussian, "laplace": sample_laplace}
