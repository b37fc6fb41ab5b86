import json
import pathlib

import numpy as np
import pytest

from bdw.datasets import builtin_dataset

ROOT = pathlib.Path(__file__).resolve().parents[1]


@pytest.fixture(scope="session")
def football():
    return builtin_dataset("football")


@pytest.fixture(scope="session")
def nasal():
    return builtin_dataset("nasal")


@pytest.fixture
def rng():
    return np.random.default_rng(20250822)


@pytest.fixture(scope="session")
def report_schema():
    with open(ROOT / "docs" / "report.schema.json") as fh:
        return json.load(fh)
