"""Shared fixtures for graph-rkhs tests."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
import pytest

from graph_rkhs.network import WeightedGraph, load_graph


def random_connected_graph(
    rng: np.random.Generator, n: int, extra_edges: int | None = None
) -> WeightedGraph:
    """Random spanning tree plus extra chords, conductances in [0.1, 10]."""
    vertices = [f"v{i}" for i in rng.permutation(n)]
    edges: dict[frozenset[str], float] = {}
    for i in range(1, n):
        parent = vertices[int(rng.integers(i))]
        edges[frozenset((vertices[i], parent))] = float(rng.uniform(0.1, 10))
    extra = n if extra_edges is None else extra_edges
    for _ in range(extra):
        u, v = rng.choice(n, size=2, replace=False)
        edges.setdefault(frozenset((vertices[u], vertices[v])), float(rng.uniform(0.1, 10)))
    return WeightedGraph.from_edges((*sorted(pair), c) for pair, c in edges.items())


def random_spd(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random strictly positive definite matrix with moderate conditioning."""
    a = rng.standard_normal((n, n))
    return a @ a.T + n * np.eye(n)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def graph_factory() -> Callable[..., WeightedGraph]:
    """Builder for random connected graphs."""
    return random_connected_graph


@pytest.fixture
def random_graphs() -> list[WeightedGraph]:
    """50 random connected graphs with at most 30 vertices."""
    generator = np.random.default_rng(7)
    return [
        random_connected_graph(generator, int(generator.integers(2, 31)))
        for _ in range(50)
    ]


@pytest.fixture
def path3() -> WeightedGraph:
    """Path 0 − 1 − 2 with unit conductances."""
    return load_graph("0 1 1\n1 2 1\n")


@pytest.fixture
def triangle() -> WeightedGraph:
    """Triangle a, b, c with unit conductances."""
    return load_graph("a b 1\nb c 1\nc a 1\n")
