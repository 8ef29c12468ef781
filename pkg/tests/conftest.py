import os

import numpy as np
import pytest

from ergm_bayes.graph import Graph
from ergm_bayes.io import dataset_path, load_dataset

EXTENDED = os.environ.get("ERGM_BAYES_EXTENDED") == "1"

# lines appended by test_acceptance and echoed at the end of the run
CRITERIA_LINES: list[str] = []


def pytest_collection_modifyitems(config, items):
    if EXTENDED:
        return
    skip = pytest.mark.skip(reason="extended run; set ERGM_BAYES_EXTENDED=1")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)


def require_dataset(name):
    if dataset_path(name) is None:
        pytest.skip(f"dataset {name!r} not available")
    return load_dataset(name)


@pytest.fixture(scope="session")
def florentine():
    return load_dataset("florentine")


@pytest.fixture(scope="session")
def monks():
    return load_dataset("monks")


def random_graph(rng, n, directed, p=None):
    p = rng.uniform(0.1, 0.9) if p is None else p
    a = (rng.random((n, n)) < p).astype(np.uint8)
    np.fill_diagonal(a, 0)
    if not directed:
        a = np.triu(a, 1)
        a = a + a.T
    return Graph.from_adjacency(a, directed)
