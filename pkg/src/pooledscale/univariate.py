"""Exact univariate k-means and k-medians by dynamic programming.

On the real line an optimal k-partition under squared or absolute loss
consists of contiguous runs of the sorted sample, so the problem reduces to
choosing k-1 split points.  The table ``cost[c, i]`` holds the best cost of
splitting ``x[0..i]`` into ``c + 1`` clusters and is filled row by row in
O(k n^2) time; interval costs come from prefix sums in O(1).

The objective values are reported in the same units as the data:

* squared loss:  S_k = sqrt( (1/n) * sum_i min_j (x_i - mu_j)^2 )
* absolute loss: M_k = (1/n) * sum_i min_j |x_i - med_j|
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import InvalidArgumentError, InvalidDataError

CRITERIA = ("squared", "absolute")


@dataclass(frozen=True)
class UnivariateSolution:
    """Optimal contiguous partition of a sorted sample for one k.

    ``boundaries`` are indices into the *sorted* sample where clusters
    2..k start; ``order`` maps sorted position to input position
    (``values[order]`` is sorted).
    """

    k: int
    boundaries: tuple
    centers: np.ndarray
    objective: float
    criterion: str
    n: int
    order: np.ndarray

    @property
    def starts(self) -> np.ndarray:
        return np.array((0,) + tuple(self.boundaries), dtype=np.int64)

    @property
    def sizes(self) -> np.ndarray:
        edges = np.array((0,) + tuple(self.boundaries) + (self.n,))
        return np.diff(edges)

    @property
    def within(self) -> float:
        """Pooled within-cluster dispersion W_k (n*S_k^2 or n*M_k)."""
        if self.criterion == "squared":
            return self.n * self.objective**2
        return self.n * self.objective

    def sorted_labels(self) -> np.ndarray:
        """Cluster ids 1..k for the sorted sample."""
        return np.repeat(np.arange(1, self.k + 1), self.sizes)

    def labels(self) -> np.ndarray:
        """Cluster ids 1..k aligned with the input order."""
        out = np.empty(self.n, dtype=np.int64)
        out[self.order] = self.sorted_labels()
        return out


@nb.njit(cache=True)
def _prefix(x):
    n = x.size
    cs = np.zeros(n + 1)
    cq = np.zeros(n + 1)
    for i in range(n):
        cs[i + 1] = cs[i] + x[i]
        cq[i + 1] = cq[i] + x[i] * x[i]
    return cs, cq


@nb.njit(cache=True)
def _interval_cost(x, cs, cq, p, i, absolute):
    # cost of the cluster x[p..i] (inclusive, sorted)
    m = i - p + 1
    if absolute:
        med = p + (m - 1) // 2
        xm = x[med]
        left = xm * (med - p) - (cs[med] - cs[p])
        right = (cs[i + 1] - cs[med + 1]) - xm * (i - med)
        v = left + right
    else:
        s = cs[i + 1] - cs[p]
        v = (cq[i + 1] - cq[p]) - s * s / m
    if v < 0.0:
        v = 0.0
    return v


@nb.njit(cache=True)
def _fill_tables(x, kmax, absolute):
    n = x.size
    cs, cq = _prefix(x)
    cost = np.full((kmax, n), np.inf)
    start = np.zeros((kmax, n), dtype=np.int64)
    for i in range(n):
        cost[0, i] = _interval_cost(x, cs, cq, 0, i, absolute)
    for c in range(1, kmax):
        for i in range(c, n):
            best = np.inf
            best_p = c
            # ascending scan with strict '<': ties keep the smallest start
            for p in range(c, i + 1):
                v = cost[c - 1, p - 1] + _interval_cost(x, cs, cq, p, i, absolute)
                if v < best:
                    best = v
                    best_p = p
            cost[c, i] = best
            start[c, i] = best_p
    return cost, start


@nb.njit(cache=True)
def batch_within(samples, kmax, absolute):
    """Optimal W_1..W_kmax for each row of ``samples`` (rows pre-sorted).

    Used for the bootstrap reference, where only the dispersion values are
    needed and building solution objects per replicate would dominate.
    """
    B, n = samples.shape
    out = np.empty((B, kmax))
    for b in range(B):
        x = samples[b] - samples[b].mean()
        cost, _ = _fill_tables(x, kmax, absolute)
        for c in range(kmax):
            out[b, c] = cost[c, n - 1]
    return out


def _check_values(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise InvalidDataError("values must be one-dimensional")
    if x.size == 0:
        raise InvalidDataError("values must be non-empty")
    if not np.all(np.isfinite(x)):
        raise InvalidDataError("values contain NaN or infinite entries")
    return x


def _check_criterion(criterion: str) -> bool:
    if criterion not in CRITERIA:
        raise InvalidArgumentError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    return criterion == "absolute"


def _backtrack(start: np.ndarray, k: int, n: int) -> tuple:
    bounds = []
    i = n - 1
    for c in range(k - 1, 0, -1):
        p = int(start[c, i])
        bounds.append(p)
        i = p - 1
    return tuple(reversed(bounds))


def _solution(xs: np.ndarray, order: np.ndarray, bounds: tuple, criterion: str) -> UnivariateSolution:
    n = xs.size
    edges = (0,) + bounds + (n,)
    centers = np.empty(len(edges) - 1)
    total = 0.0
    for j in range(len(edges) - 1):
        seg = xs[edges[j]:edges[j + 1]]
        if criterion == "squared":
            centers[j] = seg.mean()
            # exact zero for point masses; mean() of equal floats can drift
            if seg[0] != seg[-1]:
                total += float(np.sum((seg - centers[j]) ** 2))
        else:
            centers[j] = seg[(seg.size - 1) // 2]
            total += float(np.sum(np.abs(seg - centers[j])))
    if criterion == "squared":
        objective = float(np.sqrt(total / n))
    else:
        objective = total / n
    return UnivariateSolution(
        k=len(centers),
        boundaries=bounds,
        centers=centers,
        objective=objective,
        criterion=criterion,
        n=n,
        order=order,
    )


def solve_path(values, kmax: int, criterion: str = "squared") -> list:
    """Optimal solutions for k = 1..kmax from one shared DP table.

    Element ``k - 1`` of the returned list is identical to the single-k
    solve for that k.
    """
    absolute = _check_criterion(criterion)
    x = _check_values(values)
    n = x.size
    kmax = int(kmax)
    if kmax < 1 or kmax > n:
        raise InvalidArgumentError(f"kmax must be in 1..n={n}, got {kmax}")
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    # centring keeps the prefix sums well conditioned
    _, start = _fill_tables(xs - xs.mean(), kmax, absolute)
    return [_solution(xs, order, _backtrack(start, k, n), criterion) for k in range(1, kmax + 1)]


def _solve_single(values, k: int, criterion: str) -> UnivariateSolution:
    x = _check_values(values)
    k = int(k)
    if k < 1 or k > x.size:
        raise InvalidArgumentError(f"k must be in 1..n={x.size}, got {k}")
    return solve_path(x, k, criterion)[-1]


def solve_kmeans_1d(values, k: int) -> UnivariateSolution:
    """Globally optimal univariate k-means; objective is S_k."""
    return _solve_single(values, k, "squared")


def solve_kmedians_1d(values, k: int) -> UnivariateSolution:
    """Globally optimal univariate k-medians; objective is M_k.

    Centers are lower medians of their clusters.
    """
    return _solve_single(values, k, "absolute")
