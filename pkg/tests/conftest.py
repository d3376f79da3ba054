import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from fso_secrecy.channel import baseline_scenario


@pytest.fixture(scope="session")
def baseline():
    return baseline_scenario()


@pytest.fixture(scope="session")
def pointing_free():
    return baseline_scenario(sigma_s=0.0)
