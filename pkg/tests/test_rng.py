import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divkit.rng import MASK64, SplitMix64, derive_seed, reservoir_sample


def test_reference_vectors_seed_zero():
    # First three outputs of the published reference implementation for state 0.
    rng = SplitMix64(0)
    assert rng.next_u64() == 0xE220A8397B1DCDAF
    assert rng.next_u64() == 0x6E789E6AA1B965F4
    assert rng.next_u64() == 0x06C45D188009454F


def test_streams_reproducible():
    a = SplitMix64(12345)
    b = SplitMix64(12345)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]


@given(st.integers(min_value=0, max_value=MASK64), st.integers(min_value=1, max_value=10_000))
def test_randbelow_in_range(seed, n):
    rng = SplitMix64(seed)
    for _ in range(20):
        assert 0 <= rng.randbelow(n) < n


def test_randbelow_rejects_nonpositive():
    with pytest.raises(ValueError):
        SplitMix64(0).randbelow(0)


@given(st.integers(min_value=0, max_value=MASK64))
def test_uniform_unit_interval(seed):
    rng = SplitMix64(seed)
    for _ in range(50):
        u = rng.uniform()
        assert 0.0 <= u < 1.0


@given(
    st.integers(min_value=0, max_value=MASK64),
    st.integers(min_value=0, max_value=30),
    st.integers(min_value=0, max_value=30),
)
def test_sample_indices_distinct_and_in_range(seed, population, extra):
    n = min(population, extra)
    idx = SplitMix64(seed).sample_indices(population, n)
    assert len(idx) == n
    assert len(set(idx)) == n
    assert all(0 <= i < population for i in idx)


def test_derive_seed_distinct_for_adjacent_indices():
    seeds = {derive_seed(99, i) for i in range(1000)}
    assert len(seeds) == 1000


@settings(max_examples=25)
@given(st.integers(min_value=0, max_value=MASK64), st.integers(min_value=0, max_value=50))
def test_reservoir_matches_repeat_runs(seed, n):
    stream = list(range(max(n, 60)))
    first = reservoir_sample(iter(stream), n, seed)
    second = reservoir_sample(iter(stream), n, seed)
    assert first == second
    assert len(set(first)) == n


def test_reservoir_short_stream_errors():
    with pytest.raises(ValueError):
        reservoir_sample(iter(range(3)), 5, seed=0)
