import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tezos_reorg.rng import chunk_plan, derive_seed, substream


@given(st.integers(1, 10**7), st.integers(1000, 10**6))
def test_chunk_plan_partitions(samples, size):
    plan = chunk_plan(samples, size)
    assert sum(plan) == samples
    assert all(0 < m <= size for m in plan)
    assert all(m == size for m in plan[:-1])


@pytest.mark.parametrize("samples, size", [(0, 10), (10, 0)])
def test_chunk_plan_rejects(samples, size):
    with pytest.raises(ValueError):
        chunk_plan(samples, size)


def test_substreams_reproducible_and_distinct():
    x = substream(7, 0).random(8)
    assert np.array_equal(x, substream(7, 0).random(8))
    assert not np.array_equal(x, substream(7, 1).random(8))
    assert not np.array_equal(x, substream(8, 0).random(8))


@given(st.integers(0, 2**64 - 1))
def test_derive_seed_range(seed):
    s = derive_seed(seed, (24, 8, 40, 1))
    assert 0 <= s < 2**64
    assert s == derive_seed(seed, (24, 8, 40, 1))
    assert s != derive_seed(seed, (24, 8, 40, 2))
