"""Directed-network data types and the structural metrics built on them.

Dense binary adjacency with optional nonnegative weights, no self-loops,
hard-capped at MAX_NODES nodes so the downstream dense eigensolver stays
within reach.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidNetworkError, UndefinedReciprocityError

MAX_NODES = 4096


@dataclass
class DirectedNetwork:
    """Binary (optionally weighted) directed network on nodes 0..n-1.

    Parameters
    ----------
    adjacency : (n, n) array of {0, 1}, zero diagonal.
    weights : optional (n, n) array of nonnegative reals; positive exactly
        where adjacency is 1.
    labels : optional external node identifiers, one per index.
    """

    adjacency: np.ndarray
    weights: np.ndarray | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        a = np.asarray(self.adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidNetworkError(f"adjacency must be square, got shape {a.shape}")
        n = a.shape[0]
        if n > MAX_NODES:
            raise InvalidNetworkError(f"n={n} exceeds the dense-storage cap of {MAX_NODES}")
        if not np.isin(a, (0, 1)).all():
            raise InvalidNetworkError("adjacency entries must be 0 or 1")
        if np.diagonal(a).any():
            raise InvalidNetworkError("self-loops are not admitted (nonzero diagonal)")
        self.adjacency = a.astype(np.int8, copy=False)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != a.shape:
                raise InvalidNetworkError("weights shape differs from adjacency shape")
            if (w < 0).any():
                raise InvalidNetworkError("weights must be nonnegative")
            if np.diagonal(w).any():
                raise InvalidNetworkError("self-loops are not admitted (nonzero weight diagonal)")
            if ((w > 0) != (a == 1)).any():
                raise InvalidNetworkError("weights must be positive exactly on links")
            self.weights = w
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != n:
                raise InvalidNetworkError("labels length differs from node count")
            if len(set(labels)) != n:
                raise InvalidNetworkError("labels must be distinct")
            self.labels = labels

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @classmethod
    def from_links(cls, n, links, weights=None, labels=None) -> "DirectedNetwork":
        """Build from an iterable of (i, j) index pairs; optional parallel weights."""
        a = np.zeros((n, n), dtype=np.int8)
        w = np.zeros((n, n), dtype=float) if weights is not None else None
        for k, (i, j) in enumerate(links):
            a[i, j] = 1
            if w is not None:
                w[i, j] += weights[k]
        return cls(a, weights=w, labels=labels)

    @classmethod
    def from_weight_matrix(cls, w, labels=None) -> "DirectedNetwork":
        """Binary adjacency is w > 0; keeps w as the weight matrix."""
        w = np.asarray(w, dtype=float)
        return cls((w > 0).astype(np.int8), weights=w, labels=labels)


@dataclass
class StructuralMetrics:
    """First-order structure of one network snapshot.

    ``r`` is None when the network has no links (reciprocity undefined).
    """

    n: int
    link_count: int
    recip_count: int  # ordered reciprocated links, always even
    d: float
    r: float | None
    k_in: np.ndarray = field(repr=False)
    k_out: np.ndarray = field(repr=False)
    s_in: np.ndarray = field(repr=False)
    s_out: np.ndarray = field(repr=False)


def density(net: DirectedNetwork) -> float:
    """Fraction of realized ordered pairs among the n(n-1) possible links."""
    n = net.n
    if n < 2:
        raise InvalidNetworkError(f"density needs at least 2 nodes, got {n}")
    return float(net.adjacency.sum()) / (n * (n - 1))


def reciprocity(net: DirectedNetwork) -> float:
    """Fraction of links whose reverse link also exists.

    Raises UndefinedReciprocityError on an empty network rather than
    returning 0: a silent zero would corrupt downstream scans.
    """
    a = net.adjacency
    links = int(a.sum())
    if links == 0:
        raise UndefinedReciprocityError("reciprocity is undefined: network has no links")
    recip = int((a * a.T).sum())
    return recip / links


def degrees_strengths(net: DirectedNetwork) -> StructuralMetrics:
    """Row/column sums of the adjacency and weight matrices, plus d and r."""
    a = net.adjacency
    n = net.n
    k_out = a.sum(axis=1).astype(int)
    k_in = a.sum(axis=0).astype(int)
    if net.weights is not None:
        s_out = net.weights.sum(axis=1)
        s_in = net.weights.sum(axis=0)
    else:
        s_out = k_out.astype(float)
        s_in = k_in.astype(float)
    links = int(k_out.sum())
    recip = int((a * a.T).sum())
    d = links / (n * (n - 1)) if n >= 2 else 0.0
    r = recip / links if links > 0 else None
    return StructuralMetrics(
        n=n, link_count=links, recip_count=recip, d=d, r=r,
        k_in=k_in, k_out=k_out, s_in=s_in, s_out=s_out,
    )


def dyad_census(net: DirectedNetwork) -> tuple[int, int, int]:
    """Counts of (empty, single-direction, reciprocated) unordered pairs."""
    n = net.n
    if n < 2:
        raise InvalidNetworkError(f"dyad census needs at least 2 nodes, got {n}")
    a = net.adjacency
    both = int(np.triu(a * a.T, k=1).sum())
    either = int(np.triu((a | a.T), k=1).sum())
    single = either - both
    empty = n * (n - 1) // 2 - either
    return empty, single, both
