"""Electrical network model: graph Laplacian, energy, dipoles, kernel and resistance."""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
import logging
import math
from pathlib import Path
from types import MappingProxyType

import networkx as nx
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg
import voluptuous as vol

from .const import LADDER_GROUND, SOLVE_TOL
from .exceptions import (
    BadConductance,
    BadParameter,
    ConsistencyError,
    DegenerateDipole,
    DimensionMismatch,
    Disconnected,
    ParseError,
    SelfLoop,
    UnknownPoint,
)
from .rkhs_core import FiniteKernel
from .schemas import EDGE_ROW_SCHEMA

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Connected undirected graph with positive edge conductances.

    Conductances are stored once per unordered pair, keyed by the pair in
    vertex order.
    """

    vertices: tuple[str, ...]
    conductance: Mapping[tuple[str, str], float]
    _index: dict[str, int] = field(init=False, repr=False)
    _neighbors: dict[str, dict[str, float]] = field(init=False, repr=False)
    _laplacian: NDArray[np.float64] = field(init=False, repr=False)
    _edges: tuple[NDArray[np.int_], NDArray[np.int_], NDArray[np.float64]] = field(
        init=False, repr=False
    )

    def __post_init__(self) -> None:
        """Validate the graph and precompute its Laplacian."""
        vertices = tuple(self.vertices)
        index = {v: i for i, v in enumerate(vertices)}
        if len(index) != len(vertices):
            raise BadParameter("Vertex identifiers must be pairwise distinct")

        conductance: dict[tuple[str, str], float] = {}
        neighbors: dict[str, dict[str, float]] = {v: {} for v in vertices}
        for (u, v), value in self.conductance.items():
            for end in (u, v):
                if end not in index:
                    raise UnknownPoint(f"Edge endpoint {end} is not a vertex")
            if u == v:
                raise SelfLoop(f"Self-loop at vertex {u}")
            value = float(value)
            if not math.isfinite(value) or value <= 0:
                raise BadConductance(f"Conductance of edge {u}-{v} is {value}")
            key = (u, v) if index[u] < index[v] else (v, u)
            if key in conductance:
                raise BadParameter(f"Edge {u}-{v} is given twice")
            conductance[key] = value
            neighbors[u][v] = value
            neighbors[v][u] = value

        graph = nx.Graph()
        graph.add_nodes_from(vertices)
        graph.add_weighted_edges_from((u, v, c) for (u, v), c in conductance.items())
        if len(vertices) < 2 or not nx.is_connected(graph):
            raise Disconnected(
                f"Graph with {len(vertices)} vertices and {len(conductance)} edges"
                " is not connected"
            )
        laplacian = nx.laplacian_matrix(graph, nodelist=list(vertices)).toarray()
        laplacian = laplacian.astype(float)
        laplacian.setflags(write=False)

        heads = np.array([index[u] for u, _ in conductance], dtype=int)
        tails = np.array([index[v] for _, v in conductance], dtype=int)
        weights = np.array(list(conductance.values()), dtype=float)

        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "conductance", MappingProxyType(conductance))
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_neighbors", neighbors)
        object.__setattr__(self, "_laplacian", laplacian)
        object.__setattr__(self, "_edges", (heads, tails, weights))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str, float]]) -> WeightedGraph:
        """Build a graph from (u, v, c) triples; vertex order is first appearance."""
        vertices: dict[str, None] = {}
        conductance: dict[tuple[str, str], float] = {}
        for u, v, c in edges:
            vertices.setdefault(u)
            vertices.setdefault(v)
            if (u, v) in conductance or (v, u) in conductance:
                raise BadParameter(f"Edge {u}-{v} is given twice")
            conductance[(u, v)] = c
        return cls(tuple(vertices), conductance)

    @property
    def size(self) -> int:
        """Number of vertices."""
        return len(self.vertices)

    def index(self, vertex: str) -> int:
        """Return the position of a vertex."""
        try:
            return self._index[vertex]
        except KeyError as err:
            raise UnknownPoint(f"Vertex {vertex} is not in the graph") from err

    def neighbors(self, vertex: str) -> Mapping[str, float]:
        """Return the neighbours of a vertex with their conductances."""
        self.index(vertex)
        return MappingProxyType(self._neighbors[vertex])

    def total_conductance(self, vertex: str) -> float:
        """Return c(x) = Σ_{y∼x} c_xy."""
        return float(sum(self.neighbors(vertex).values()))

    def vector(self, values: Mapping[str, float] | ArrayLike) -> NDArray[np.float64]:
        """Return a vertex function as an array in vertex order."""
        if isinstance(values, Mapping):
            missing = [v for v in self.vertices if v not in values]
            if missing:
                raise DimensionMismatch(f"Function is missing vertices {missing[:5]}")
            return np.array([float(values[v]) for v in self.vertices])
        vector = np.asarray(values, dtype=float)
        if vector.shape != (self.size,):
            raise DimensionMismatch(
                f"Function has shape {vector.shape}, expected ({self.size},)"
            )
        return vector


def _add_edge_line(
    lineno: int, fields: list[str], edges: dict[frozenset[str], tuple[str, str, float]]
) -> None:
    try:
        u, v, c = EDGE_ROW_SCHEMA(fields)
    except vol.Invalid as err:
        raise ParseError(lineno, f"expected 'u v c', got {' '.join(fields)!r}") from err
    if u == v:
        raise SelfLoop(f"line {lineno}: self-loop at vertex {u}")
    if not math.isfinite(c) or c <= 0:
        raise BadConductance(f"line {lineno}: conductance {c} is not positive")
    key = frozenset((u, v))
    if key in edges:
        raise ParseError(lineno, f"duplicate edge {u}-{v}")
    edges[key] = (u, v, c)


def load_graph(source: str) -> WeightedGraph:
    """Parse an edge list: one 'u v c' per line, '#' starts a comment line."""
    edges: dict[frozenset[str], tuple[str, str, float]] = {}
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        _add_edge_line(lineno, line.split(), edges)
    if not edges:
        raise ParseError(0, "edge list is empty")
    graph = WeightedGraph.from_edges(edges.values())
    _LOGGER.debug(f"Loaded graph with {graph.size} vertices and {len(edges)} edges")
    return graph


def read_edge_list(path: Path | str) -> str:
    """Return the text of a UTF-8 edge-list file."""
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as err:
        line = data[: err.start].count(b"\n") + 1
        raise ParseError(line, f"not valid UTF-8 ({err.reason})") from err


def load_graph_file(path: Path | str) -> WeightedGraph:
    """Read and parse a UTF-8 edge-list file."""
    return load_graph(read_edge_list(path))


def laplacian_matrix(graph: WeightedGraph) -> NDArray[np.float64]:
    """Return the graph Laplacian as a dense matrix in vertex order."""
    return np.array(graph._laplacian)


def grounded_laplacian(graph: WeightedGraph, base: str) -> NDArray[np.float64]:
    """Return the Laplacian with the base vertex's row and column removed."""
    o = graph.index(base)
    keep = [i for i in range(graph.size) if i != o]
    return graph._laplacian[np.ix_(keep, keep)].copy()


def laplacian_apply(
    graph: WeightedGraph, f: Mapping[str, float] | ArrayLike
) -> NDArray[np.float64]:
    """Return (Δf)(x) = Σ_{y∼x} c_xy (f(x) − f(y)) in vertex order."""
    return graph._laplacian @ graph.vector(f)


def energy_inner(
    graph: WeightedGraph,
    h: Mapping[str, float] | ArrayLike,
    f: Mapping[str, float] | ArrayLike,
) -> float:
    """Return ½ ΣΣ c_xy (h(x) − h(y))(f(x) − f(y)), summed once per edge."""
    h_vec, f_vec = graph.vector(h), graph.vector(f)
    heads, tails, weights = graph._edges
    dh = h_vec[heads] - h_vec[tails]
    df = f_vec[heads] - f_vec[tails]
    return float(np.sum(weights * dh * df))


@dataclass(frozen=True, eq=False)
class DipoleSystem:
    """Dipoles vₓ with Δvₓ = δₓ − δₒ and vₓ(o) = 0, one row per vertex."""

    vertices: tuple[str, ...]
    base: str
    potentials: NDArray[np.float64]

    def potential(self, x: str) -> NDArray[np.float64]:
        """Return vₓ in vertex order (the zero function for x = o)."""
        try:
            return self.potentials[self.vertices.index(x)].copy()
        except ValueError as err:
            raise UnknownPoint(f"Vertex {x} is not in the graph") from err

    def as_mapping(self) -> dict[str, dict[str, float]]:
        """Return {x: {y: vₓ(y)}} for every vertex x other than the base."""
        return {
            x: dict(zip(self.vertices, map(float, row), strict=True))
            for x, row in zip(self.vertices, self.potentials, strict=True)
            if x != self.base
        }


def _check_residual(residual: float, scale: float, what: str) -> None:
    if residual > SOLVE_TOL * max(1.0, scale):
        raise ConsistencyError(f"{what} residual {residual:.3e} exceeds tolerance")


def dipole_system(graph: WeightedGraph, base: str) -> DipoleSystem:
    """Solve every dipole from one Cholesky factorization of the grounded Laplacian."""
    o = graph.index(base)
    keep = [i for i in range(graph.size) if i != o]
    factor = linalg.cho_factor(grounded_laplacian(graph, base), lower=True)
    potentials = np.zeros((graph.size, graph.size))
    potentials[np.ix_(keep, keep)] = linalg.cho_solve(factor, np.eye(len(keep)))

    # Row x of L·Vᵀ must be δₓ − δₒ
    target = np.eye(graph.size)
    target[:, o] -= 1.0
    target[o, :] = 0.0
    residual = float(np.abs(potentials @ graph._laplacian - target).max())
    _check_residual(residual, float(np.abs(potentials).max()), "Dipole system")
    _LOGGER.debug(f"Solved {len(keep)} dipoles at base {base}, residual {residual:.2e}")
    return DipoleSystem(graph.vertices, base, potentials)


def dipole(graph: WeightedGraph, base: str, x: str) -> NDArray[np.float64]:
    """Return the dipole vₓ in vertex order, grounded so that vₓ(o) = 0."""
    o, i = graph.index(base), graph.index(x)
    if o == i:
        raise DegenerateDipole(f"Dipole needs x different from the base {base}")
    keep = [k for k in range(graph.size) if k != o]
    rhs = np.zeros(len(keep))
    rhs[keep.index(i)] = 1.0
    factor = linalg.cho_factor(grounded_laplacian(graph, base), lower=True)
    potential = np.zeros(graph.size)
    potential[keep] = linalg.cho_solve(factor, rhs)

    expected = np.zeros(graph.size)
    expected[i], expected[o] = 1.0, -1.0
    residual = float(np.abs(graph._laplacian @ potential - expected).max())
    _check_residual(residual, float(np.abs(potential).max()), f"Dipole {x}")
    return potential


def _edge_differences(graph: WeightedGraph, rows: NDArray[np.float64]) -> NDArray[np.float64]:
    heads, tails, _ = graph._edges
    return rows[:, heads] - rows[:, tails]


def network_kernel(graph: WeightedGraph, base: str) -> FiniteKernel:
    """Return k(x, y) = ⟨vₓ, v_y⟩ in energy on V∖{o}."""
    system = dipole_system(graph, base)
    o = graph.index(base)
    keep = [i for i in range(graph.size) if i != o]
    rows = system.potentials[keep]
    differences = _edge_differences(graph, rows)
    gram = (differences * graph._edges[2]) @ differences.T

    evaluations = rows[:, keep]
    deviation = float(np.abs(gram - evaluations).max())
    _check_residual(deviation, float(np.abs(gram).max()), "Reproducing identity")
    return FiniteKernel(tuple(graph.vertices[i] for i in keep), (gram + gram.T) / 2)


@dataclass(frozen=True, eq=False)
class DeltaExpansion:
    """δₓ written as a finite combination of dipoles."""

    coefficients: dict[str, float]
    c_of_x: float
    function: NDArray[np.float64]


def delta_expansion(graph: WeightedGraph, base: str, x: str) -> DeltaExpansion:
    """Expand δₓ = c(x)vₓ − Σ_{y∼x} c_xy v_y, with v_o ≡ 0 dropped.

    For x = o the expansion is −Σ_{z∼o} c_oz v_z, which is δₒ − 1: the
    representative of δₒ modulo constants that vanishes at o.
    """
    graph.index(x)
    system = dipole_system(graph, base)
    c_of_x = graph.total_conductance(x)

    if x == base:
        coefficients = {z: -c for z, c in graph.neighbors(x).items()}
        expected = np.full(graph.size, -1.0)
        expected[graph.index(base)] = 0.0
    else:
        coefficients = {x: c_of_x}
        coefficients.update({y: -c for y, c in graph.neighbors(x).items() if y != base})
        expected = np.zeros(graph.size)
        expected[graph.index(x)] = 1.0

    function = np.zeros(graph.size)
    for y, coefficient in coefficients.items():
        function += coefficient * system.potential(y)

    _check_residual(float(np.abs(function - expected).max()), c_of_x, f"Expansion of δ_{x}")
    energy = energy_inner(graph, function, function)
    if not math.isclose(energy, c_of_x, rel_tol=SOLVE_TOL, abs_tol=SOLVE_TOL):
        raise ConsistencyError(f"‖δ_{x}‖² = {energy!r} differs from c(x) = {c_of_x!r}")
    return DeltaExpansion(coefficients, c_of_x, function)


@dataclass(frozen=True, eq=False)
class ResistanceMatrix:
    """Resistance metric on a vertex set: symmetric, zero diagonal."""

    vertices: tuple[str, ...]
    values: NDArray[np.float64]

    def distance(self, x: str, y: str) -> float:
        """Return R(x, y)."""
        try:
            return float(self.values[self.vertices.index(x), self.vertices.index(y)])
        except ValueError as err:
            raise UnknownPoint(f"{x} or {y} is not a vertex") from err

    def triangle_defect(self) -> float:
        """Largest R(x, z) − R(x, y) − R(y, z) over all triples; ≤ 0 for a metric."""
        r = self.values
        return float((r[:, None, :] - r[:, :, None] - r[None, :, :]).max())

    def quadratic_form(self, xi: ArrayLike) -> float:
        """Return ξᵀRξ for a mean-zero ξ; ≤ 0 for a conditionally negative definite R."""
        vector = np.asarray(xi, dtype=float)
        if vector.shape != (len(self.vertices),):
            raise DimensionMismatch(f"Vector has shape {vector.shape}")
        if abs(vector.sum()) > 1e-9 * max(1.0, float(np.abs(vector).sum())):
            raise BadParameter("Coefficients must sum to zero")
        return float(vector @ self.values @ vector)


def resistance_from_kernel(points: tuple[str, ...], gram: NDArray[np.float64]) -> ResistanceMatrix:
    """Return R(x, y) = K(x, x) + K(y, y) − 2K(x, y)."""
    diagonal = np.diag(gram)
    values = diagonal[:, None] + diagonal[None, :] - 2 * gram
    np.fill_diagonal(values, 0.0)
    return ResistanceMatrix(points, (values + values.T) / 2)


def resistance_metric(graph: WeightedGraph, base: str) -> ResistanceMatrix:
    """Return R(x, y) = ‖vₓ − v_y‖² on all vertices, with vₒ ≡ 0."""
    kernel = network_kernel(graph, base)
    o = graph.index(base)
    keep = [i for i in range(graph.size) if i != o]
    full = np.zeros((graph.size, graph.size))
    full[np.ix_(keep, keep)] = kernel.gram
    resistance = resistance_from_kernel(graph.vertices, full)
    values = resistance.values
    scale = float(values.max())

    # Half of R(o, x) + R(o, y) − R(x, y) recovers the kernel
    rebuilt = (values[o][:, None] + values[o][None, :] - values) / 2
    _check_residual(float(np.abs(rebuilt - full).max()), scale, "Kernel reconstruction")

    pinv = np.linalg.pinv(graph._laplacian, hermitian=True)
    diagonal = np.diag(pinv)
    independent = diagonal[:, None] + diagonal[None, :] - 2 * pinv
    _check_residual(
        float(np.abs(independent - values).max()), scale * graph.size, "Resistance"
    )
    return resistance


def path_graph(n: int) -> WeightedGraph:
    """Path 0 − 1 − … − (n−1) with unit conductances."""
    if n < 2:
        raise BadParameter("A path needs at least two vertices")
    return WeightedGraph.from_edges((str(i), str(i + 1), 1.0) for i in range(n - 1))


def _check_ratio(ratio: float) -> None:
    if not 0 < ratio < 1:
        raise BadParameter(f"Ladder ratio must lie in (0, 1), got {ratio}")


def ladder_graph(ratio: float, n: int, tail: bool = True) -> WeightedGraph:
    """Ladder on {0, …, n} with c_{i,i+1} = R^{−i}.

    With ``tail`` the infinite remainder of the ladder is replaced by its
    effective conductance (1 − R)/Rⁿ to a ground vertex named LADDER_GROUND.
    """
    _check_ratio(ratio)
    if n < 1:
        raise BadParameter("Ladder needs n ≥ 1")
    edges = [(str(i), str(i + 1), ratio ** (-i)) for i in range(n)]
    if tail:
        edges.append((str(n), LADDER_GROUND, (1 - ratio) / ratio**n))
    return WeightedGraph.from_edges(edges)


def ladder_kernel(ratio: float, n: int) -> FiniteKernel:
    """Return k_R(i, j) = R^{max(i, j)}/(1 − R) on {0, …, n}."""
    _check_ratio(ratio)
    if n < 1:
        raise BadParameter("Ladder needs n ≥ 1")
    steps = np.arange(n + 1)
    gram = ratio ** np.maximum.outer(steps, steps) / (1 - ratio)
    return FiniteKernel(tuple(str(i) for i in steps), gram)


def ladder_pair(ratio: float) -> Callable[[int, int], float]:
    """Return the ladder kernel as a function of two non-negative integers."""
    _check_ratio(ratio)

    def kernel(i: int, j: int) -> float:
        return ratio ** max(int(i), int(j)) / (1 - ratio)

    return kernel


def ladder_laplacian_apply(ratio: float, f: ArrayLike) -> NDArray[np.float64]:
    """Return (Δf)(i) = R^{−i+1}(f(i) − f(i−1)) + R^{−i}(f(i) − f(i+1)) on {0, …, n}.

    The end vertices use only the neighbour they have.
    """
    _check_ratio(ratio)
    values = np.asarray(f, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise DimensionMismatch("Ladder function needs at least two values")
    steps = np.arange(values.size - 1)
    flux = ratio ** (-steps) * (values[:-1] - values[1:])
    result = np.zeros_like(values)
    result[:-1] += flux
    result[1:] -= flux
    return result
