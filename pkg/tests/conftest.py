import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import demo_scenario, demo_scenario_dict, two_state_dict, two_state_scenario


@pytest.fixture
def demo_dict():
    return demo_scenario_dict()


@pytest.fixture
def demo():
    return demo_scenario()


@pytest.fixture
def minimal_dict():
    return two_state_dict()


@pytest.fixture
def minimal():
    return two_state_scenario()
