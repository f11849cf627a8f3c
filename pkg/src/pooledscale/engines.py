"""Multivariate clustering engines used to compare scalers.

* k-means: multi-start Lloyd iterations.
* Agglomerative hierarchical clustering with single, average, complete or
  Ward linkage via Lance-Williams updates.
* Partitioning around medoids (BUILD + SWAP), Manhattan distance by default.

Ties are always broken toward the lowest index so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import InvalidArgumentError, InvalidDataError
from .rng import substream

LINKAGES = ("single", "average", "complete", "ward")
METRICS = ("euclidean", "manhattan")


@dataclass(frozen=True)
class Partition:
    """Cluster ids 1..k for n observations.

    ``cost`` is the engine's objective when it has one (WCSS for k-means,
    total distance to medoids for PAM).
    """

    labels: np.ndarray
    k: int
    cost: float | None = None

    @classmethod
    def from_labels(cls, labels, cost=None) -> "Partition":
        """Compact arbitrary labels to 1..k in order of first appearance."""
        labels = np.asarray(labels)
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first, kind="mergesort")] = np.arange(1, first.size + 1)
        return cls(labels=rank[inverse.reshape(-1)], k=int(first.size), cost=cost)

    @property
    def n(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class DistMatrix:
    """Pairwise distances; stored square, symmetric, zero diagonal."""

    square: np.ndarray
    metric: str

    @property
    def n(self) -> int:
        return self.square.shape[0]

    def condensed(self) -> np.ndarray:
        """Upper triangle row by row (the layout scipy calls condensed)."""
        return self.square[np.triu_indices(self.n, k=1)]


@dataclass(frozen=True)
class Dendrogram:
    """n-1 merges; node ids < n are leaves, node n + t is created by merge t."""

    left: np.ndarray
    right: np.ndarray
    height: np.ndarray
    size: np.ndarray
    leaf_count: int
    linkage: str

    def merges(self) -> list:
        return [(int(a), int(b), float(h)) for a, b, h in zip(self.left, self.right, self.height)]


def _matrix(data) -> np.ndarray:
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InvalidDataError("data must be an n x p matrix")
    if not np.all(np.isfinite(X)):
        raise InvalidDataError("data contain NaN or infinite values")
    return X


def pairwise_distances(data, metric: str = "euclidean") -> DistMatrix:
    X = _matrix(data)
    if metric not in METRICS:
        raise InvalidArgumentError(f"metric must be one of {METRICS}")
    diff = X[:, None, :] - X[None, :, :]
    if metric == "euclidean":
        D = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    else:
        D = np.abs(diff).sum(axis=2)
    # exact symmetry regardless of summation order
    D = np.triu(D, 1)
    D = D + D.T
    return DistMatrix(square=D, metric=metric)


# ---------------------------------------------------------------- k-means

@nb.njit(cache=True)
def _assign(X, C, labels):
    n, p = X.shape
    k = C.shape[0]
    changed = False
    for i in range(n):
        best = np.inf
        bj = 0
        for j in range(k):
            d = 0.0
            for t in range(p):
                e = X[i, t] - C[j, t]
                d += e * e
            if d < best:
                best = d
                bj = j
        if labels[i] != bj:
            labels[i] = bj
            changed = True
    return changed


@nb.njit(cache=True)
def _update(X, C, labels):
    n, p = X.shape
    k = C.shape[0]
    counts = np.zeros(k, dtype=np.int64)
    C[:, :] = 0.0
    for i in range(n):
        counts[labels[i]] += 1
        for t in range(p):
            C[labels[i], t] += X[i, t]
    for j in range(k):
        if counts[j] > 0:
            for t in range(p):
                C[j, t] /= counts[j]
    return counts


@nb.njit(cache=True)
def _point_cost(X, C, labels, i):
    d = 0.0
    for t in range(X.shape[1]):
        e = X[i, t] - C[labels[i], t]
        d += e * e
    return d


@nb.njit(cache=True)
def _repair_empty(X, C, labels, counts):
    # move the point farthest from its own center into each empty cluster
    n, p = X.shape
    for j in range(C.shape[0]):
        if counts[j] > 0:
            continue
        far = -1.0
        fi = -1
        for i in range(n):
            if counts[labels[i]] < 2:
                continue
            d = _point_cost(X, C, labels, i)
            if d > far:
                far = d
                fi = i
        if fi < 0:
            continue
        old = labels[fi]
        labels[fi] = j
        counts[old] -= 1
        counts[j] = 1
        _update(X, C, labels)


@nb.njit(cache=True)
def _wcss(X, C, labels):
    total = 0.0
    for i in range(X.shape[0]):
        total += _point_cost(X, C, labels, i)
    return total


@nb.njit(cache=True)
def _lloyd(X, C0, max_iters, trace):
    n = X.shape[0]
    C = C0.copy()
    labels = np.full(n, -1, dtype=np.int64)
    history = np.empty(max_iters if trace else 0)
    it = 0
    while it < max_iters:
        changed = _assign(X, C, labels)
        if not changed and it > 0:
            break
        counts = _update(X, C, labels)
        _repair_empty(X, C, labels, counts)
        if trace:
            history[it] = _wcss(X, C, labels)
        it += 1
    return labels, C, _wcss(X, C, labels), history[:it], it


@nb.njit(cache=True)
def _multi_lloyd(X, inits, k, max_iters):
    starts = inits.shape[0]
    best = np.inf
    best_labels = np.zeros(X.shape[0], dtype=np.int64)
    for s in range(starts):
        C0 = np.empty((k, X.shape[1]))
        for j in range(k):
            C0[j] = X[inits[s, j]]
        labels, C, w, _, _ = _lloyd(X, C0, max_iters, False)
        # strict '<' keeps the earliest start among equal optima
        if w < best:
            best = w
            best_labels[:] = labels
    return best_labels, best


def lloyd(data, centers, max_iters: int = 100):
    """One Lloyd run from ``centers``; returns labels (0-based), centers, WCSS and
    the WCSS recorded after every iteration."""
    X = _matrix(data)
    C0 = np.array(centers, dtype=float).reshape(-1, X.shape[1])
    labels, C, w, history, _ = _lloyd(X, C0, int(max_iters), True)
    return labels, C, w, history


def kmeans_init(n: int, k: int, starts: int, seed) -> np.ndarray:
    """k distinct row indices per start, each start drawn from its own stream."""
    return np.array([substream(seed, "kmeans", k, s).choice(n, size=k, replace=False)
                     for s in range(starts)], dtype=np.int64)


def kmeans_multi(data, k: int, starts: int = 100, max_iters: int = 100, seed=0) -> Partition:
    """Best-of-``starts`` Lloyd k-means (lowest within-cluster sum of squares)."""
    X = _matrix(data)
    n = X.shape[0]
    k = int(k)
    if k < 1 or k > n:
        raise InvalidArgumentError(f"k must be in 1..n={n}, got {k}")
    if starts < 1 or max_iters < 1:
        raise InvalidArgumentError("starts and max_iters must be positive")
    labels, w = _multi_lloyd(X, kmeans_init(n, k, int(starts), seed), k, int(max_iters))
    return Partition.from_labels(labels, cost=float(w))


# ----------------------------------------------------------- hierarchical

_LINK_CODE = {"single": 0, "complete": 1, "average": 2, "ward": 3}


@nb.njit(cache=True)
def _lance_williams(D, method):
    n = D.shape[0]
    D = D.copy()
    active = np.ones(n, dtype=np.bool_)
    size = np.ones(n, dtype=np.int64)
    node = np.arange(n)
    left = np.empty(n - 1, dtype=np.int64)
    right = np.empty(n - 1, dtype=np.int64)
    height = np.empty(n - 1)
    csize = np.empty(n - 1, dtype=np.int64)
    for step in range(n - 1):
        best = np.inf
        bi = -1
        bj = -1
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if active[j] and D[i, j] < best:
                    best = D[i, j]
                    bi = i
                    bj = j
        a = node[bi]
        b = node[bj]
        left[step] = min(a, b)
        right[step] = max(a, b)
        height[step] = best / 2.0 if method == 3 else best
        ni = size[bi]
        nj = size[bj]
        for m in range(n):
            if not active[m] or m == bi or m == bj:
                continue
            dim = D[bi, m]
            djm = D[bj, m]
            if method == 0:
                v = min(dim, djm)
            elif method == 1:
                v = max(dim, djm)
            elif method == 2:
                v = (ni * dim + nj * djm) / (ni + nj)
            else:
                nm = size[m]
                v = ((ni + nm) * dim + (nj + nm) * djm - nm * best) / (ni + nj + nm)
            D[bi, m] = v
            D[m, bi] = v
        active[bj] = False
        size[bi] = ni + nj
        csize[step] = ni + nj
        node[bi] = n + step
    return left, right, height, csize


def hclust(dist: DistMatrix, linkage: str = "average") -> Dendrogram:
    """Agglomerative clustering of a distance matrix.

    Ward works on squared Euclidean distances and reports each merge height
    as the increase in within-cluster sum of squares.
    """
    if linkage not in LINKAGES:
        raise InvalidArgumentError(f"linkage must be one of {LINKAGES}")
    if linkage == "ward" and dist.metric != "euclidean":
        raise InvalidArgumentError("ward linkage requires euclidean distances")
    n = dist.n
    if n < 1:
        raise InvalidDataError("empty distance matrix")
    D = dist.square.astype(float)
    if linkage == "ward":
        D = D * D
    if n == 1:
        empty = np.empty(0, dtype=np.int64)
        return Dendrogram(empty, empty, np.empty(0), empty, 1, linkage)
    left, right, height, csize = _lance_williams(D, _LINK_CODE[linkage])
    return Dendrogram(left, right, height, csize, n, linkage)


def cut_dendrogram(dendrogram: Dendrogram, k: int) -> Partition:
    """Partition left after undoing the last k-1 merges."""
    n = dendrogram.leaf_count
    k = int(k)
    if k < 1 or k > n:
        raise InvalidArgumentError(f"k must be in 1..n={n}, got {k}")
    parent = np.arange(2 * n - 1)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for t in range(n - k):
        parent[find(dendrogram.left[t])] = n + t
        parent[find(dendrogram.right[t])] = n + t
    roots = np.array([find(i) for i in range(n)])
    return Partition.from_labels(roots)


# -------------------------------------------------------------------- PAM

@nb.njit(cache=True)
def _pam(D, k):
    n = D.shape[0]
    medoids = np.empty(k, dtype=np.int64)
    is_med = np.zeros(n, dtype=np.bool_)
    nearest = np.full(n, np.inf)
    # BUILD
    for t in range(k):
        best = np.inf
        bc = -1
        for c in range(n):
            if is_med[c]:
                continue
            total = 0.0
            for i in range(n):
                total += min(nearest[i], D[i, c])
            if total < best:
                best = total
                bc = c
        medoids[t] = bc
        is_med[bc] = True
        for i in range(n):
            if D[i, bc] < nearest[i]:
                nearest[i] = D[i, bc]
    current = 0.0
    for i in range(n):
        current += nearest[i]
    # SWAP: apply the best improving (medoid, non-medoid) exchange until none improves
    swaps = 0
    while True:
        best = current
        bm = -1
        bh = -1
        for mi in range(k):
            for h in range(n):
                if is_med[h]:
                    continue
                total = 0.0
                for i in range(n):
                    d = D[i, h]
                    for mj in range(k):
                        if mj != mi and D[i, medoids[mj]] < d:
                            d = D[i, medoids[mj]]
                    total += d
                if total < best:
                    best = total
                    bm = mi
                    bh = h
        if bm < 0 or not best < current:
            break
        is_med[medoids[bm]] = False
        medoids[bm] = bh
        is_med[bh] = True
        current = best
        swaps += 1
    labels = np.empty(n, dtype=np.int64)
    cost = 0.0
    for i in range(n):
        bd = np.inf
        for mj in range(k):
            if D[i, medoids[mj]] < bd:
                bd = D[i, medoids[mj]]
                labels[i] = mj
        cost += bd
    return medoids, labels, cost


def pam_medoids(data, k: int, metric: str = "manhattan"):
    """PAM on raw data; returns (medoid row indices, 0-based labels, total cost)."""
    X = _matrix(data)
    n = X.shape[0]
    k = int(k)
    if k < 1 or k > n:
        raise InvalidArgumentError(f"k must be in 1..n={n}, got {k}")
    return _pam(pairwise_distances(X, metric).square, k)


def pam(data, k: int, metric: str = "manhattan", seed=None) -> Partition:
    """Partitioning around medoids.  BUILD is deterministic, so ``seed`` is unused."""
    _, labels, cost = pam_medoids(data, k, metric)
    return Partition.from_labels(labels, cost=float(cost))
