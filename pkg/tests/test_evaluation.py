import itertools
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pooledscale.engines import Partition
from pooledscale.errors import InvalidArgumentError
from pooledscale.evaluation import (
    ENGINES,
    adjusted_rand_index,
    best_ari_over_k,
    cluster_once,
    contingency_table,
)


def pair_counting_ari(a, b):
    """Oracle: enumerate all pairs and apply the expected-index formula in exact arithmetic."""
    n = len(a)
    both = same_a = same_b = 0
    for i, j in itertools.combinations(range(n), 2):
        sa, sb = a[i] == a[j], b[i] == b[j]
        both += sa and sb
        same_a += sa
        same_b += sb
    total = n * (n - 1) // 2
    if total == 0:
        return 1.0
    expected = Fraction(same_a * same_b, total)
    top = Fraction(same_a + same_b, 2)
    if top == expected:
        return 1.0
    return float((both - expected) / (top - expected))


class TestARI:
    def test_identity_and_relabeling(self):
        a = [1, 1, 2, 2, 3, 3]
        assert adjusted_rand_index(a, a) == 1.0
        assert adjusted_rand_index(a, ["z", "z", "x", "x", "y", "y"]) == 1.0

    def test_trivial_against_structure(self):
        assert adjusted_rand_index([1] * 6, [1, 1, 2, 2, 3, 3]) == 0.0

    def test_both_trivial(self):
        assert adjusted_rand_index([1] * 5, [7] * 5) == 1.0
        assert adjusted_rand_index([1, 2, 3], [3, 2, 1]) == 1.0
        assert adjusted_rand_index([4], [9]) == 1.0

    def test_known_value(self):
        # table [[2, 1], [0, 3]]: index 4, row pairs 6, column pairs 7, 15 pairs in all
        a = [1, 1, 1, 2, 2, 2]
        b = [1, 1, 2, 2, 2, 2]
        expected = 6 * 7 / 15
        assert adjusted_rand_index(a, b) == pytest.approx((4 - expected) / (6.5 - expected))

    def test_partition_objects(self):
        p = Partition.from_labels(["b", "a", "b"])
        np.testing.assert_array_equal(p.labels, [1, 2, 1])
        assert adjusted_rand_index(p, [5, 6, 5]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            adjusted_rand_index([1, 2], [1, 2, 3])

    def test_contingency(self):
        t = contingency_table([1, 1, 2], ["a", "b", "b"])
        np.testing.assert_array_equal(t.counts, [[1, 1], [0, 1]])
        assert t.n == 3

    def test_matches_pair_counting_oracle(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 40))
            a = rng.integers(0, int(rng.integers(1, 6)), n)
            b = rng.integers(0, int(rng.integers(1, 6)), n)
            assert adjusted_rand_index(a, b) == pytest.approx(pair_counting_ari(a, b), abs=1e-12)


labels = st.lists(st.integers(0, 4), min_size=1, max_size=30)


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_ari_properties(data):
    a = data.draw(labels)
    b = data.draw(st.lists(st.integers(0, 4), min_size=len(a), max_size=len(a)))
    v = adjusted_rand_index(a, b)
    assert v == adjusted_rand_index(b, a)
    assert v <= 1.0 + 1e-12
    perm = {x: 10 - x for x in range(5)}
    assert v == adjusted_rand_index([perm[x] for x in a], b)


class TestBestAri:
    def test_point_masses(self):
        X = np.repeat([[0.0, 0.0], [10.0, 10.0]], 10, axis=0)
        truth = np.repeat([1, 2], 10)
        for engine in ENGINES:
            assert best_ari_over_k(X, truth, engine, seed=1, starts=5) == (1.0, 2)

    def test_sweeps_one_to_three_times_truth(self, monkeypatch):
        seen = []
        import pooledscale.evaluation as ev

        real = ev.cluster_once

        def spy(data, k, engine, seed=0, **kw):
            seen.append(k)
            return real(data, k, engine, seed, **kw)

        monkeypatch.setattr(ev, "cluster_once", spy)
        X = np.arange(20.0)[:, None]
        best_ari_over_k(X, np.repeat([1, 2], 10), "hc-average")
        assert seen == [1, 2, 3, 4, 5, 6]

    def test_cap_at_n_warns(self):
        X = np.array([[0.0], [1.0], [10.0], [11.0], [12.0]])
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            ari, k = best_ari_over_k(X, [1, 1, 2, 2, 2], "hc-single")
        assert any("capped" in str(x.message) for x in w)
        assert ari == 1.0 and k == 2

    def test_dominates_every_fixed_k(self, rng):
        X = np.vstack([rng.normal(c, 1.0, size=(15, 2)) for c in (0, 3, 6)])
        truth = np.repeat([1, 2, 3], 15)
        best, best_k = best_ari_over_k(X, truth, "kmeans", seed=4, starts=10)
        for k in range(1, 10):
            part = cluster_once(X, k, "kmeans", seed=4, starts=10)
            assert adjusted_rand_index(part, truth) <= best
        assert adjusted_rand_index(cluster_once(X, best_k, "kmeans", 4, starts=10), truth) == best

    def test_unknown_engine(self):
        with pytest.raises(InvalidArgumentError):
            best_ari_over_k(np.zeros((4, 1)), [1, 1, 2, 2], "dbscan")
