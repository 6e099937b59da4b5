from pathlib import Path

import pytest

import convoforge as cf
from convoforge.gateway import Gateway

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def schema():
    return cf.default_schema()


@pytest.fixture(scope="session")
def task_config():
    return cf.default_task()


@pytest.fixture
def make_gateway(schema, task_config):
    def factory(task=None):
        return Gateway(schema, task if task is not None else task_config)

    return factory


@pytest.fixture
def fixtures_dir():
    return FIXTURES
