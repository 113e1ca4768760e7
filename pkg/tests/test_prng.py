import numpy as np

from btd.prng import MASK64, Prng, fnv1a64, splitmix64, stream_seed


def test_same_seed_same_stream():
    a = Prng(42)
    b = Prng(42)
    assert [a.next_u64() for _ in range(20)] == [b.next_u64() for _ in range(20)]


def test_distinct_seeds_differ():
    assert Prng(1).next_u64() != Prng(2).next_u64()


def test_u64_array_matches_scalar_stream():
    a = Prng(7)
    b = Prng(7)
    arr = a.u64_array(257)
    scalars = [b.next_u64() for _ in range(257)]
    assert arr.tolist() == scalars
    assert a.state == b.state


def test_splitmix_and_fnv_are_masked():
    assert 0 <= splitmix64(2**64 - 1) <= MASK64
    assert 0 <= fnv1a64(b"\xff" * 100) <= MASK64


def test_stream_seed_separates_stages():
    s = stream_seed(99, "train")
    assert s == stream_seed(99, "train")
    assert s != stream_seed(99, "init")
    assert s != stream_seed(98, "train")


def test_uniform_range():
    rng = Prng(3)
    values = rng.uniforms(10000)
    assert values.min() >= 0.0
    assert values.max() < 1.0
    assert abs(values.mean() - 0.5) < 0.02


def test_normals_statistics_and_determinism():
    rng = Prng(11)
    z = rng.normals(50001)
    assert z.shape == (50001,)
    assert abs(z.mean()) < 0.02
    assert abs(z.std() - 1.0) < 0.02
    z2 = Prng(11).normals(50001)
    assert np.array_equal(z, z2)


def test_below_bounds():
    rng = Prng(5)
    values = [rng.below(7) for _ in range(1000)]
    assert set(values) <= set(range(7))
    assert len(set(values)) == 7


def test_sample_indices_distinct_and_deterministic():
    rng = Prng(8)
    idx = rng.sample_indices(50, 10)
    assert len(idx) == len(set(idx)) == 10
    assert all(0 <= i < 50 for i in idx)
    assert idx == Prng(8).sample_indices(50, 10)


def test_shuffle_is_permutation():
    rng = Prng(9)
    items = list(range(30))
    rng.shuffle(items)
    assert sorted(items) == list(range(30))
    items2 = list(range(30))
    Prng(9).shuffle(items2)
    assert items == items2
