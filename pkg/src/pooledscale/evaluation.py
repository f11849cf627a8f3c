"""Adjusted Rand index and the best-ARI-over-k evaluation protocol."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .engines import Partition, cut_dendrogram, hclust, kmeans_multi, pairwise_distances, pam
from .errors import InvalidArgumentError

ENGINES = ("kmeans", "pam", "hc-single", "hc-average", "hc-complete", "hc-ward")


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def _labels(p) -> np.ndarray:
    return p.labels if isinstance(p, Partition) else np.asarray(p)


def contingency_table(p1, p2) -> ContingencyTable:
    a, b = _labels(p1), _labels(p2)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"partitions differ in length: {a.size} vs {b.size}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    ia, ib = ia.reshape(-1), ib.reshape(-1)
    counts = np.zeros((ia.max(initial=-1) + 1, ib.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(counts, (ia, ib), 1)
    return ContingencyTable(counts)


def _pairs(v) -> int:
    v = np.asarray(v, dtype=object)
    return int(sum(int(x) * (int(x) - 1) // 2 for x in v.ravel()))


def adjusted_rand_index(p1, p2) -> float:
    """Hubert-Arabie adjusted Rand index.

    When the chance-corrected denominator vanishes (both partitions trivial
    in the same way, e.g. one cluster each) the partitions are identical and
    the index is defined as 1.
    """
    table = contingency_table(p1, p2)
    index = _pairs(table.counts)
    sum_a = _pairs(table.row_sums)
    sum_b = _pairs(table.col_sums)
    total = _pairs([table.n])
    if total == 0:
        return 1.0
    # integer numerators: exact until the final division
    num = index * total - sum_a * sum_b
    den = (sum_a + sum_b) * total - 2 * sum_a * sum_b
    if den == 0:
        return 1.0
    return 2 * num / den


def cluster_once(data, k: int, engine: str, seed=0, *, starts: int = 100, max_iters: int = 100,
                 dendrogram=None) -> Partition:
    if engine == "kmeans":
        return kmeans_multi(data, k, starts=starts, max_iters=max_iters, seed=seed)
    if engine == "pam":
        return pam(data, k)
    if engine.startswith("hc-"):
        if dendrogram is None:
            dendrogram = hclust(pairwise_distances(data, "euclidean"), engine[3:])
        return cut_dendrogram(dendrogram, k)
    raise InvalidArgumentError(f"engine must be one of {ENGINES}, got {engine!r}")


def best_ari_over_k(data, truth, engine: str, seed=0, *, starts: int = 100,
                    max_iters: int = 100, k_values=None):
    """Best ARI against ``truth`` over k = 1..3T (T = number of true clusters).

    Returns ``(best_ari, best_k)``; ties resolve to the smallest k.
    """
    if engine not in ENGINES:
        raise InvalidArgumentError(f"engine must be one of {ENGINES}, got {engine!r}")
    X = np.asarray(data, dtype=float)
    truth = truth if isinstance(truth, Partition) else Partition.from_labels(truth)
    n = X.shape[0]
    if truth.n != n:
        raise InvalidArgumentError("truth and data differ in length")
    if k_values is None:
        kmax = 3 * truth.k
        if kmax > n:
            warnings.warn(f"k sweep 1..{kmax} capped at n={n}", stacklevel=2)
            kmax = n
        k_values = range(1, kmax + 1)
    dendrogram = None
    if engine.startswith("hc-"):
        dendrogram = hclust(pairwise_distances(X, "euclidean"), engine[3:])
    best, best_k = -np.inf, None
    for k in k_values:
        part = cluster_once(X, k, engine, seed, starts=starts, max_iters=max_iters,
                            dendrogram=dendrogram)
        ari = adjusted_rand_index(part, truth)
        if ari > best:
            best, best_k = ari, k
    return float(best), best_k
