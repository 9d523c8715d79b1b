"""
Shared fixtures: the named fixture graphs, the seeded random instance suite
and a cached brute-force oracle.
"""

import pytest

from ctop.graph import Graph
from ctop.instance_io import GenSpec, gen_random, load_fixture
from ctop.oracle import Instance, enumerate_orders

DENSITIES = [0.3, 0.5, 0.7, 0.9]
RANDOM_SEEDS = list(range(200))


def random_spec(seed):
    """Seed s: n = 5 + s % 4, density cycles every 4 seeds, K flips every 16."""
    return GenSpec(
        family="random",
        n=5 + seed % 4,
        density=DENSITIES[(seed // 4) % 4],
        seed=seed,
    )


def random_k(seed):
    return 2 + (seed // 16) % 2


@pytest.fixture
def fixture_graph():
    def load(name):
        return load_fixture(name).graph

    return load


@pytest.fixture
def fixture_instance(fixture_graph):
    def build(name, k):
        return Instance(fixture_graph(name), k)

    return build


@pytest.fixture
def random_instance():
    def build(seed):
        return Instance(gen_random(random_spec(seed)), random_k(seed))

    return build


@pytest.fixture
def graph_from_edges():
    def build(n, edges):
        return Graph(n, edges)

    return build


_ORACLE_CACHE = {}


@pytest.fixture(scope="session")
def oracle():
    """enumerate_orders with results cached per (graph, k)."""

    def orders(inst):
        key = (inst.graph, inst.k)
        if key not in _ORACLE_CACHE:
            _ORACLE_CACHE[key] = enumerate_orders(inst)
        return _ORACLE_CACHE[key]

    return orders
