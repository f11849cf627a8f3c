import numpy as np
import pytest

from pooledscale.rng import normalize_seed, stream_key, substream


def test_same_path_same_stream():
    a = substream(42, "gap-reference", 3).random(5)
    b = substream(42, "gap-reference", 3).random(5)
    np.testing.assert_array_equal(a, b)


def test_paths_and_seeds_separate_streams():
    base = substream(42, "gap-reference", 3).random(4)
    for other in (substream(43, "gap-reference", 3), substream(42, "gap-reference", 4),
                  substream(42, "clusters", 3), substream(42, "gap-reference")):
        assert not np.array_equal(base, other.random(4))


def test_order_independence():
    # drawing other streams first does not disturb a given stream
    direct = substream(7, "noise", 2, 0).random(3)
    for i in range(5):
        substream(7, "noise", i, 0).random(100)
    np.testing.assert_array_equal(direct, substream(7, "noise", 2, 0).random(3))


def test_wide_seeds():
    assert normalize_seed(2**64 + 5) == 5
    assert normalize_seed(-1) == 2**64 - 1
    key = stream_key(2**63 + 1, "x", 2**40)
    assert key.dtype == np.uint64 and key.shape == (2,)


def test_rejects_missing_seed_and_bad_parts():
    with pytest.raises(TypeError):
        normalize_seed(None)
    with pytest.raises(TypeError):
        stream_key(0, 1.5)
    with pytest.raises(TypeError):
        stream_key(0, True)
