import pytest

from tezos_reorg.protocol import DEFAULT_PARAMS


@pytest.fixture
def params():
    return DEFAULT_PARAMS
