import pytest

from fblris.channel import SystemConfig


@pytest.fixture
def fig1_cfg():
    return SystemConfig(2, 1, 4, -5.0)

