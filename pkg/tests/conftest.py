import pathlib
import random
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(pathlib.Path(__file__).parent))

import propertylib  # noqa: E402

from squery.dsl import parse_file  # noqa: E402
from squery.synth import build_strip_map  # noqa: E402
from squery.trace import load_trace  # noqa: E402
from squery.world import load_map  # noqa: E402

settings.register_profile(
    "suite",
    max_examples=1000,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow,
                           HealthCheck.filter_too_much,
                           HealthCheck.data_too_large],
)
settings.load_profile("suite")

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> pathlib.Path:
    return FIXTURES


@pytest.fixture(scope="session")
def avoid_ast():
    return parse_file(str(FIXTURES / "lane_change.scq"))


@pytest.fixture(scope="session")
def two_car_trace():
    return load_trace(str(FIXTURES / "two_car_trace.json"))


@pytest.fixture(scope="session")
def two_lane_map():
    return load_map(str(FIXTURES / "two_lane_map.json"))


@pytest.fixture(scope="session")
def strip_map():
    return build_strip_map()


@pytest.fixture(scope="session")
def agreement_pool():
    # one pool shared by the exhaustive-agreement and monotonicity tests,
    # so both talk about the same instances
    return propertylib.agreement_instances(random.Random(20260816), 220)
