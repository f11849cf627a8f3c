import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pooledscale.errors import InvalidArgumentError, InvalidDataError
from pooledscale.univariate import solve_kmeans_1d, solve_kmedians_1d, solve_path


def _cluster_cost(seg, criterion):
    seg = np.asarray(seg, dtype=float)
    if criterion == "squared":
        return float(np.sum((seg - seg.mean()) ** 2))
    med = np.sort(seg)[(seg.size - 1) // 2]
    return float(np.sum(np.abs(seg - med)))


def brute_force(values, k, criterion):
    """Best objective over every contiguous k-partition of the sorted sample."""
    xs = np.sort(np.asarray(values, dtype=float))
    n = xs.size
    best = math.inf
    for cuts in itertools.combinations(range(1, n), k - 1):
        edges = (0,) + cuts + (n,)
        total = sum(_cluster_cost(xs[a:b], criterion) for a, b in zip(edges, edges[1:]))
        best = min(best, total)
    return math.sqrt(best / n) if criterion == "squared" else best / n


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def unrestricted_optimum(values, k, criterion):
    """Best objective over *all* k-partitions, contiguous or not."""
    x = np.asarray(values, dtype=float)
    best = math.inf
    for part in set_partitions(list(range(x.size))):
        if len(part) != k:
            continue
        best = min(best, sum(_cluster_cost(x[idx], criterion) for idx in part))
    return math.sqrt(best / x.size) if criterion == "squared" else best / x.size


class TestKMeansExamples:
    def test_two_point_masses(self):
        sol = solve_kmeans_1d([0, 0, 10, 10], 2)
        assert sol.boundaries == (2,)
        np.testing.assert_array_equal(sol.centers, [0, 10])
        assert sol.objective == 0.0

    def test_single_cluster_population_sd(self):
        sol = solve_kmeans_1d([1, 2, 3, 4], 1)
        assert sol.centers[0] == 2.5
        assert sol.objective == pytest.approx(math.sqrt(1.25), rel=1e-15)

    def test_split_between_one_and_nine(self):
        values = [0, 1, 9, 10, 11]
        sol = solve_kmeans_1d(values, 2)
        assert sol.boundaries == (2,)
        np.testing.assert_allclose(sol.centers, [0.5, 10])
        assert sol.objective == pytest.approx(math.sqrt(0.5), rel=1e-15)
        assert sol.objective == pytest.approx(brute_force(values, 2, "squared"), rel=1e-15)

    def test_unsorted_input_labels_follow_input_order(self):
        sol = solve_kmeans_1d([10, 0, 11, 1, 9], 2)
        np.testing.assert_array_equal(sol.labels(), [2, 1, 2, 1, 2])


class TestKMediansExamples:
    def test_two_point_masses(self):
        assert solve_kmedians_1d([0, 0, 4, 4], 2).objective == 0.0

    def test_lower_median_single_cluster(self):
        sol = solve_kmedians_1d([0, 0, 4], 1)
        assert sol.centers[0] == 0
        assert sol.objective == pytest.approx(4 / 3, rel=1e-15)

    def test_outlier_isolated(self):
        values = [1, 2, 3, 4, 100]
        sol = solve_kmedians_1d(values, 2)
        assert sol.boundaries == (4,)
        np.testing.assert_array_equal(sol.centers, [2, 100])
        assert sol.objective == pytest.approx(0.8, rel=1e-15)
        assert sol.objective == pytest.approx(brute_force(values, 2, "absolute"), rel=1e-15)

    def test_even_cluster_uses_lower_median(self):
        assert solve_kmedians_1d([1, 2, 3, 10], 1).centers[0] == 2


class TestPath:
    def test_point_masses_path(self):
        path = solve_path([0, 0, 10, 10], 2, "squared")
        assert [s.objective for s in path] == [5.0, 0.0]

    def test_kmax_one(self, rng):
        x = rng.normal(size=17)
        (only,) = solve_path(x, 1)
        single = solve_kmeans_1d(x, 1)
        assert only.objective == single.objective
        np.testing.assert_array_equal(only.centers, single.centers)

    @pytest.mark.parametrize("criterion", ["squared", "absolute"])
    def test_path_matches_independent_solves(self, rng, criterion):
        solve = solve_kmeans_1d if criterion == "squared" else solve_kmedians_1d
        for _ in range(10):
            x = rng.normal(size=int(rng.integers(5, 40))) * rng.uniform(0.1, 10)
            kmax = int(rng.integers(1, min(8, x.size) + 1))
            path = solve_path(x, kmax, criterion)
            assert len(path) == kmax
            for k, sol in enumerate(path, 1):
                ref = solve(x, k)
                assert sol.boundaries == ref.boundaries
                assert sol.objective == ref.objective

    def test_errors(self):
        with pytest.raises(InvalidArgumentError):
            solve_path([1, 2, 3], 4)
        with pytest.raises(InvalidArgumentError):
            solve_kmeans_1d([1, 2, 3], 0)
        with pytest.raises(InvalidDataError):
            solve_kmeans_1d([1, np.nan, 3], 1)
        with pytest.raises(InvalidDataError):
            solve_kmedians_1d([1, np.inf], 1)
        with pytest.raises(InvalidArgumentError):
            solve_path([1, 2], 1, "cubic")


@pytest.mark.parametrize("criterion", ["squared", "absolute"])
def test_contiguous_optimum_is_global(rng, criterion):
    # contiguity of optimal 1D clusters: enumeration over all set partitions
    for _ in range(15):
        x = np.round(rng.normal(size=int(rng.integers(3, 8))) * 3, 2)
        for k in (2, 3):
            if k > x.size:
                continue
            dp = solve_path(x, k, criterion)[-1].objective
            assert dp == pytest.approx(unrestricted_optimum(x, k, criterion), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("criterion", ["squared", "absolute"])
def test_zero_objective_at_distinct_count(criterion):
    x = [3, 3, 3, 7, 7, 1]
    path = solve_path(x, 5, criterion)
    assert path[2].objective == 0.0
    assert all(s.objective == 0.0 for s in path[2:])


def test_tie_break_prefers_smallest_last_start():
    # {0, 1, 2}: splits (0|1,2) and (0,1|2) cost the same; the later cluster
    # starts as early as possible
    sol = solve_kmeans_1d([0, 1, 2], 2)
    assert sol.boundaries == (1,)


finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=150, deadline=None)
@given(values=st.lists(finite, min_size=1, max_size=30), kmax=st.integers(1, 6),
       criterion=st.sampled_from(["squared", "absolute"]))
def test_properties(values, kmax, criterion):
    kmax = min(kmax, len(values))
    path = solve_path(values, kmax, criterion)
    xs = np.sort(np.asarray(values, dtype=float))
    objectives = [s.objective for s in path]
    scale = max(1.0, float(np.max(np.abs(xs))))
    for a, b in zip(objectives, objectives[1:]):
        assert b <= a + 1e-12 * scale
    for sol in path:
        # contiguity: clusters are consecutive runs of the sorted sample
        labels = sol.sorted_labels()
        assert np.all(np.diff(labels) >= 0)
        assert sol.sizes.min() >= 1
        assert sol.sizes.sum() == xs.size
        if sol.k > 1 and np.all(np.diff(xs) > 0):
            assert np.all(np.diff(sol.centers) > 0)
    if len(np.unique(xs)) <= kmax:
        assert objectives[len(np.unique(xs)) - 1] == 0.0


@settings(max_examples=100, deadline=None)
@given(values=st.lists(st.floats(-50, 50), min_size=2, max_size=25), k=st.integers(1, 5))
def test_decomposition_identity(values, k):
    k = min(k, len(values))
    sol = solve_kmeans_1d(values, k)
    xs = np.sort(np.asarray(values, dtype=float))
    edges = (0, *sol.boundaries, xs.size)
    pooled = sum((b - a) / xs.size * np.var(xs[a:b]) for a, b in zip(edges, edges[1:]))
    assert abs(sol.objective**2 - pooled) <= 1e-12 * max(1.0, float(np.var(xs)))
