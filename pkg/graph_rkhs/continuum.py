"""Continuous kernels, their restrictions to point sets and a Brownian bridge sampler."""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        """Backport of :class:`enum.StrEnum` for Python < 3.11."""

        def __str__(self) -> str:
            return str.__str__(self)

        def __format__(self, format_spec: str) -> str:
            return str.__format__(str(self), format_spec)

import csv
import io
import logging
import math
from typing import Any

import numpy as np
from numpy.polynomial import legendre
from numpy.typing import ArrayLike, NDArray
from scipy import special

from .const import (
    BM_DOMAIN_MAX,
    BOUNDARY_INSET,
    BOUNDARY_SAMPLES,
    COVARIANCE_SIGMAS,
    DEFAULT_SEED,
    DEFAULT_SELF_ENERGY_RADIUS,
    HARMONIC_EXCLUSION,
    KERNEL_BM,
    KERNEL_BRIDGE,
    KERNEL_DISK2,
    KERNEL_DISK3,
    KERNEL_NEWTON,
    MIN_QUADRATURE_N,
    SAMPLER_SHARD_SIZE,
    SEP_TOL,
)
from .exceptions import (
    BadParameter,
    ConsistencyError,
    DimensionMismatch,
    NotPositiveDefinite,
    OutOfDomain,
    SingularPair,
    TooClose,
)
from .network import ResistanceMatrix, resistance_from_kernel
from .rkhs_core import (
    FiniteKernel,
    InducedNetwork,
    PairKernel,
    gram_assemble,
    induced_conductances,
    point_label,
    psd_check,
)
from .schemas import configured_threads

_LOGGER = logging.getLogger(__name__)

# Complex-step width for derivatives of analytic test functions
COMPLEX_STEP = 1e-20


class KernelKind(StrEnum):
    """Closed-form kernel families."""

    BROWNIAN_MOTION = "brownian_motion"
    BROWNIAN_BRIDGE = "brownian_bridge"
    DISK_GREEN = "disk_green"
    NEWTON = "newton"


@dataclass(frozen=True)
class ContinuousKernel:
    """A closed-form kernel with its domain.

    BrownianMotion lives on (0, BM_DOMAIN_MAX], BrownianBridge on (0, 1),
    DiskGreen on the closed unit ball of ℝ^ν and NewtonPotential on ℝ^ν.
    """

    kind: KernelKind
    dimension: int = 1

    def __post_init__(self) -> None:
        """Validate the dimension for the kernel family."""
        if self.singular and self.dimension < 2:
            raise BadParameter(f"{self.kind} needs dimension ν ≥ 2")
        if not self.singular and self.dimension != 1:
            raise BadParameter(f"{self.kind} is one-dimensional")

    @classmethod
    def from_name(cls, name: str) -> ContinuousKernel:
        """Return a kernel from its registry name: bm, bridge, disk2, disk3, newton:ν."""
        if name == KERNEL_BM:
            return cls(KernelKind.BROWNIAN_MOTION)
        if name == KERNEL_BRIDGE:
            return cls(KernelKind.BROWNIAN_BRIDGE)
        if name == KERNEL_DISK2:
            return cls(KernelKind.DISK_GREEN, 2)
        if name == KERNEL_DISK3:
            return cls(KernelKind.DISK_GREEN, 3)
        kind, _, dimension = name.partition(":")
        if kind == KERNEL_NEWTON and dimension.isdigit():
            return cls(KernelKind.NEWTON, int(dimension))
        raise BadParameter(f"Unknown kernel {name!r}")

    @property
    def singular(self) -> bool:
        """True for kernels with an infinite diagonal."""
        return self.kind in (KernelKind.DISK_GREEN, KernelKind.NEWTON)

    @property
    def constant(self) -> float:
        """Cν = (ν−2)/|S^{ν−1}| for ν > 2, and 1/2π for ν = 2."""
        nu = self.dimension
        if nu == 2:
            return 1 / (2 * math.pi)
        sphere_area = 2 * math.pi ** (nu / 2) / special.gamma(nu / 2)
        return (nu - 2) / sphere_area


BROWNIAN_MOTION = ContinuousKernel(KernelKind.BROWNIAN_MOTION)
BROWNIAN_BRIDGE = ContinuousKernel(KernelKind.BROWNIAN_BRIDGE)


def _fundamental(kernel: ContinuousKernel, r: NDArray[np.float64]) -> NDArray[np.float64]:
    """Φ(r) = −(1/2π) log r for ν = 2 and Cν r^{2−ν} for ν > 2."""
    if kernel.dimension == 2:
        return -kernel.constant * np.log(r)
    return kernel.constant * r ** (2.0 - kernel.dimension)


def _reflected_distance(x: NDArray[np.float64], y: NDArray[np.float64]) -> NDArray[np.float64]:
    """|x||x* − y| = √(1 − 2x·y + |x|²|y|²), equal to 1 at x = 0."""
    dot = np.sum(x * y, axis=-1)
    squared = 1.0 - 2.0 * dot + np.sum(x * x, axis=-1) * np.sum(y * y, axis=-1)
    return np.sqrt(np.maximum(squared, 0.0))


def _disk_green(
    kernel: ContinuousKernel, x: NDArray[np.float64], y: NDArray[np.float64]
) -> NDArray[np.float64]:
    distance = np.linalg.norm(x - y, axis=-1)
    return _fundamental(kernel, distance) - _fundamental(kernel, _reflected_distance(x, y))


def _newton(
    kernel: ContinuousKernel, x: NDArray[np.float64], y: NDArray[np.float64]
) -> NDArray[np.float64]:
    return _fundamental(kernel, np.linalg.norm(x - y, axis=-1))


def _scalar(kernel: ContinuousKernel, point: Any) -> float:
    array = np.asarray(point, dtype=float)
    if array.size != 1:
        raise DimensionMismatch(f"{kernel.kind} takes real points, got {point}")
    value = float(array.reshape(-1)[0])
    if kernel.kind is KernelKind.BROWNIAN_MOTION and not 0 < value <= BM_DOMAIN_MAX:
        raise OutOfDomain(f"{value} is outside (0, {BM_DOMAIN_MAX:g}]")
    if kernel.kind is KernelKind.BROWNIAN_BRIDGE and not 0 < value < 1:
        raise OutOfDomain(f"{value} is outside (0, 1)")
    return value


def _vector(kernel: ContinuousKernel, point: Any) -> NDArray[np.float64]:
    vector = np.asarray(point, dtype=float).reshape(-1)
    if vector.shape != (kernel.dimension,):
        raise DimensionMismatch(
            f"Point {point} does not have {kernel.dimension} coordinates"
        )
    if not np.all(np.isfinite(vector)):
        raise OutOfDomain(f"Point {point} is not finite")
    if kernel.kind is KernelKind.DISK_GREEN and np.linalg.norm(vector) > 1 + 1e-12:
        raise OutOfDomain(f"Point {point} is outside the unit ball")
    return vector


def kernel_eval(kernel: ContinuousKernel, x: Any, y: Any) -> float:
    """Evaluate a continuous kernel at a pair of points."""
    if kernel.kind is KernelKind.BROWNIAN_MOTION:
        return min(_scalar(kernel, x), _scalar(kernel, y))
    if kernel.kind is KernelKind.BROWNIAN_BRIDGE:
        s, t = _scalar(kernel, x), _scalar(kernel, y)
        return min(s, t) - s * t

    xv, yv = _vector(kernel, x), _vector(kernel, y)
    if np.linalg.norm(xv - yv) < SEP_TOL:
        raise SingularPair(f"{kernel.kind} is singular at coincident points {x}, {y}")
    if kernel.kind is KernelKind.DISK_GREEN:
        return float(_disk_green(kernel, xv, yv))
    return float(_newton(kernel, xv, yv))


def self_energy(kernel: ContinuousKernel, x: Any, radius: float) -> float:
    """Diagonal value of a singular kernel: energy of the uniform measure on a small sphere."""
    xv = _vector(kernel, x)
    own = float(_fundamental(kernel, np.array(radius)))
    if kernel.kind is KernelKind.NEWTON:
        return own
    if np.linalg.norm(xv) > 1 - radius:
        raise OutOfDomain(f"Point {x} is within {radius} of the boundary")
    # Reflected part at y = x is Φ(1 − |x|²)
    return own - float(_fundamental(kernel, np.array(1.0 - float(xv @ xv))))


def canonical_point(kernel: ContinuousKernel, point: Any) -> float | tuple[float, ...]:
    """Return a domain-checked point: a float, or a coordinate tuple for ball kernels."""
    if kernel.singular:
        return tuple(float(c) for c in _vector(kernel, point))
    return _scalar(kernel, point)


def self_energy_radii(
    kernel: ContinuousKernel,
    points: Sequence[Any],
    self_energy_radius: float = DEFAULT_SELF_ENERGY_RADIUS,
) -> dict[str, float]:
    """Return the sphere radius of each point, keyed by point label.

    A radius is capped by half the distance to the nearest other point and,
    for the Green kernel, by half the distance to the boundary. The spheres
    then stay disjoint and inside the ball.
    """
    if not kernel.singular:
        raise BadParameter(f"{kernel.kind} has a finite diagonal")
    if self_energy_radius <= 0:
        raise BadParameter("self_energy_radius must be positive")
    vectors = np.array([_vector(kernel, p) for p in points])
    radii = np.full(len(vectors), self_energy_radius)
    if len(vectors) > 1:
        differences = vectors[:, None, :] - vectors[None, :, :]
        distances = np.linalg.norm(differences, axis=-1)
        np.fill_diagonal(distances, np.inf)
        radii = np.minimum(radii, distances.min(axis=1) / 2)
    if kernel.kind is KernelKind.DISK_GREEN:
        clearance = 1 - np.linalg.norm(vectors, axis=1)
        if np.any(clearance <= 0):
            raise OutOfDomain("Points must lie strictly inside the unit ball")
        radii = np.minimum(radii, clearance / 2)
    labels = [point_label(tuple(float(c) for c in v)) for v in vectors]
    return dict(zip(labels, radii.tolist(), strict=True))


def pair_function(
    kernel: ContinuousKernel,
    self_energy_radius: float = DEFAULT_SELF_ENERGY_RADIUS,
    radii: Mapping[str, float] | None = None,
) -> PairKernel:
    """Return k(x, y) for gram_assemble, with the regularized diagonal of singular kernels.

    ``radii`` overrides the sphere radius per point label, as computed by
    self_energy_radii.
    """
    if self_energy_radius <= 0:
        raise BadParameter("self_energy_radius must be positive")
    radii = radii or {}

    def evaluate(x: Any, y: Any) -> float:
        if kernel.singular and np.array_equal(np.asarray(x), np.asarray(y)):
            return self_energy(kernel, x, radii.get(point_label(x), self_energy_radius))
        return kernel_eval(kernel, x, y)

    return evaluate


def _min_separation(points: NDArray[np.float64]) -> float:
    differences = points[:, None, :] - points[None, :, :]
    distances = np.linalg.norm(differences, axis=-1)
    np.fill_diagonal(distances, np.inf)
    return float(distances.min())


def restrict(
    kernel: ContinuousKernel,
    points: Sequence[Any],
    self_energy_radius: float = DEFAULT_SELF_ENERGY_RADIUS,
) -> FiniteKernel:
    """Restrict a continuous kernel to a finite point set and check it is PSD.

    Singular kernels get the self-energy diagonal on spheres of radius at
    most self_energy_radius, shrunk per point by self_energy_radii.
    """
    points = [canonical_point(kernel, p) for p in points]
    radii: dict[str, float] | None = None
    if kernel.singular:
        if len(points) > 1:
            separation = _min_separation(np.array(points))
            if separation < SEP_TOL:
                raise TooClose(f"Points are {separation:.3e} apart, need at least {SEP_TOL:.0e}")
        radii = self_energy_radii(kernel, points, self_energy_radius)

    restricted = gram_assemble(pair_function(kernel, self_energy_radius, radii), points)
    report = psd_check(restricted)
    if not report.is_psd:
        raise NotPositiveDefinite(
            f"Restricted {kernel.kind} Gram has eigenvalue {report.min_eigenvalue:.3e}"
        )
    _LOGGER.debug(
        f"Restricted {kernel.kind} to {restricted.size} points,"
        f" eigenvalues {report.min_eigenvalue:.3e} .. {report.max_eigenvalue:.3e}"
    )
    return restricted


def _increasing(points: Sequence[float]) -> list[float]:
    values = [float(p) for p in points]
    if not values or any(b <= a for a, b in zip(values, values[1:], strict=False)):
        raise BadParameter("Points must be non-empty and strictly increasing")
    return values


def restriction_structure(kernel: ContinuousKernel, points: Sequence[float]) -> InducedNetwork:
    """Return the chain network a BM or Bridge restriction induces, checked in closed form.

    The inverse Gram is tridiagonal with conductances 1/(xᵢ₊₁ − xᵢ); the
    grounding is 1/x₁ at the left end, plus 1/(1 − xₙ) at the right end for
    the bridge.
    """
    if kernel.singular:
        raise BadParameter(f"{kernel.kind} does not induce a chain network")
    values = _increasing(points)
    network = induced_conductances(restrict(kernel, values))
    scale = max(1.0, float(np.abs(network.inverse).max()))

    off_band = network.off_band(1)
    if off_band > 1e-9 * scale:
        raise ConsistencyError(f"Inverse Gram is not tridiagonal ({off_band:.3e})")

    gaps = np.diff(values)
    chain = np.array([-network.inverse[i, i + 1] for i in range(len(gaps))])
    grounding = np.zeros(len(values))
    grounding[0] = 1 / values[0]
    if kernel.kind is KernelKind.BROWNIAN_BRIDGE:
        grounding[-1] += 1 / (1 - values[-1])
    deviation = max(
        float(np.abs(chain - 1 / gaps).max()) if gaps.size else 0.0,
        float(np.abs(network.grounding - grounding).max()),
    )
    if deviation > 1e-9 * scale:
        raise ConsistencyError(f"Induced conductances deviate by {deviation:.3e}")
    return network


def bm_restriction_structure(points: Sequence[float]) -> InducedNetwork:
    """Return the chain network induced by Brownian motion on increasing points."""
    return restriction_structure(BROWNIAN_MOTION, points)


def restriction_resistance(
    kernel: ContinuousKernel,
    points: Sequence[Any],
    self_energy_radius: float = DEFAULT_SELF_ENERGY_RADIUS,
) -> ResistanceMatrix:
    """Return R(x, y) = K(x, x) + K(y, y) − 2K(x, y) on the restricted points."""
    points = [canonical_point(kernel, p) for p in points]
    restricted = restrict(kernel, points, self_energy_radius)
    resistance = resistance_from_kernel(restricted.points, restricted.gram)
    if kernel.singular:
        return resistance

    values = np.array(points, dtype=float)
    gaps = np.abs(values[:, None] - values[None, :])
    expected = gaps if kernel.kind is KernelKind.BROWNIAN_MOTION else gaps * (1 - gaps)
    deviation = float(np.abs(resistance.values - expected).max())
    if deviation > 1e-12 * max(1.0, float(values.max())):
        raise ConsistencyError(f"{kernel.kind} resistance deviates by {deviation:.3e}")
    return resistance


def cameron_martin_energy(
    kernel: ContinuousKernel, points: Sequence[float], coeffs: ArrayLike
) -> float:
    """Return ∫|f′|² for f = Σ ξⱼ k(xⱼ, ·), exactly, for BM and Bridge.

    f′ is piecewise constant: Σ ξⱼ (𝟙[t < xⱼ] − aⱼ) with aⱼ = 0 for BM and
    aⱼ = xⱼ for the bridge.
    """
    if kernel.singular:
        raise BadParameter(f"{kernel.kind} has no piecewise linear sections")
    nodes = np.array([_scalar(kernel, p) for p in points])
    xi = np.asarray(coeffs, dtype=float)
    if xi.shape != nodes.shape:
        raise DimensionMismatch(f"{xi.size} coefficients for {nodes.size} points")
    bridge = kernel.kind is KernelKind.BROWNIAN_BRIDGE
    breaks = np.unique(np.concatenate([[0.0], nodes, [1.0] if bridge else []]))
    midpoints = (breaks[:-1] + breaks[1:]) / 2
    offsets = nodes if bridge else np.zeros_like(nodes)
    slopes = ((midpoints[:, None] < nodes[None, :]).astype(float) - offsets[None, :]) @ xi
    return float(np.sum(np.diff(breaks) * slopes**2))


def bridge_second_derivative_check(
    s: float,
    test_fn: Callable[[Any], Any],
    quadrature_n: int = MIN_QUADRATURE_N,
) -> float:
    """Return ∫₀¹ k_s′(t) φ′(t) dt, which equals φ(s) when φ(0) = φ(1) = 0.

    ``test_fn`` must accept complex arrays; φ′ is taken by complex step and
    integrated by Gauss–Legendre on (0, s) and (s, 1).
    """
    if not 0 < s < 1:
        raise OutOfDomain(f"s = {s} is outside (0, 1)")
    if quadrature_n < MIN_QUADRATURE_N:
        raise BadParameter(f"quadrature_n must be at least {MIN_QUADRATURE_N}")

    ends = np.abs(np.asarray(test_fn(np.array([0.0, 1.0])), dtype=float))
    if float(np.max(ends)) > 1e-12:
        _LOGGER.warning(f"Test function does not vanish at 0 and 1 ({ends.tolist()})")

    nodes, weights = legendre.leggauss(quadrature_n)

    def integral(a: float, b: float) -> float:
        t = (b - a) / 2 * nodes + (a + b) / 2
        values = np.asarray(test_fn(t + 1j * COMPLEX_STEP), dtype=complex)
        derivative = np.broadcast_to(values.imag / COMPLEX_STEP, t.shape)
        return float((b - a) / 2 * (weights @ derivative))

    return (1 - s) * integral(0.0, s) - s * integral(s, 1.0)


def eigen_expansion_partial(s: float, t: float, n_terms: int) -> float:
    """Return 2 Σ_{n ≤ N} sin(nπs) sin(nπt)/(nπ)², which tends to s∧t − st."""
    if not (0 < s < 1 and 0 < t < 1):
        raise BadParameter(f"({s}, {t}) is outside (0, 1)²")
    if n_terms < 1:
        raise BadParameter("Expansion needs at least one term")
    frequencies = np.arange(1, n_terms + 1) * math.pi
    terms = np.sin(frequencies * s) * np.sin(frequencies * t) / frequencies**2
    return float(2 * np.sum(terms))


@dataclass(frozen=True, eq=False)
class PathSample:
    """Sampled bridge paths on a grid, one row per path."""

    grid: NDArray[np.float64]
    paths: NDArray[np.float64]
    seed: int

    def csv_text(self) -> str:
        """Return CSV with the grid as first row, then one row per path."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow([repr(float(t)) for t in self.grid])
        writer.writerows([repr(float(v)) for v in row] for row in self.paths)
        return buffer.getvalue()


def _sample_shard(
    seed: np.random.SeedSequence, size: int, grid: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Bridge paths as (1 − t)·B(t/(1 − t)) from Gaussian increments of B."""
    rng = np.random.default_rng(seed)
    clock = grid / (1 - grid)
    steps = np.sqrt(np.diff(clock, prepend=0.0))
    motion = np.cumsum(rng.standard_normal((size, grid.size)) * steps, axis=1)
    return (1 - grid) * motion


def sample_bridge_paths(
    grid: Sequence[float],
    n_paths: int,
    seed: int = DEFAULT_SEED,
    threads: int | None = None,
) -> PathSample:
    """Sample Brownian bridge paths, deterministically for a given seed.

    Paths are drawn in shards of SAMPLER_SHARD_SIZE; shard k uses the k-th
    child of SeedSequence(seed), so the result does not depend on the
    number of worker threads.
    """
    times = np.asarray(grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise BadParameter("Grid must be a non-empty list of times")
    if np.any(times <= 0) or np.any(times >= 1) or np.any(np.diff(times) <= 0):
        raise BadParameter("Grid must be strictly increasing inside (0, 1)")
    if n_paths < 1:
        raise BadParameter("n_paths must be at least 1")

    sizes = [SAMPLER_SHARD_SIZE] * (n_paths // SAMPLER_SHARD_SIZE)
    if n_paths % SAMPLER_SHARD_SIZE:
        sizes.append(n_paths % SAMPLER_SHARD_SIZE)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    workers = min(threads or configured_threads(), len(sizes))
    _LOGGER.debug(f"Sampling {n_paths} paths in {len(sizes)} shards on {workers} threads")

    with ThreadPoolExecutor(max_workers=workers) as executor:
        shards = list(executor.map(_sample_shard, seeds, sizes, [times] * len(sizes)))
    return PathSample(times, np.vstack(shards), seed)


@dataclass(frozen=True, eq=False)
class CovarianceReport:
    """Empirical against analytic bridge covariance on the sample grid."""

    empirical: NDArray[np.float64]
    analytic: NDArray[np.float64]
    standard_error: NDArray[np.float64]
    max_z: float
    mean_max_z: float
    sigmas: float

    @property
    def passed(self) -> bool:
        """True when every covariance entry is within the allowed z-score."""
        return self.max_z <= self.sigmas


def bridge_covariance_check(
    sample: PathSample, sigmas: float = COVARIANCE_SIGMAS
) -> CovarianceReport:
    """Compare the sample covariance with s∧t − st, entrywise in standard errors."""
    paths = sample.paths
    count = paths.shape[0]
    if count < 2:
        raise BadParameter("Covariance check needs at least two paths")
    products = paths[:, :, None] * paths[:, None, :]
    empirical = products.mean(axis=0)
    standard_error = products.std(axis=0, ddof=1) / math.sqrt(count)
    grid = sample.grid
    analytic = np.minimum.outer(grid, grid) - np.outer(grid, grid)
    max_z = float(np.max(np.abs(empirical - analytic) / standard_error))

    mean_error = paths.std(axis=0, ddof=1) / math.sqrt(count)
    mean_max_z = float(np.max(np.abs(paths.mean(axis=0)) / mean_error))
    _LOGGER.debug(f"Bridge covariance max z {max_z:.2f}, mean max z {mean_max_z:.2f}")
    return CovarianceReport(empirical, analytic, standard_error, max_z, mean_max_z, sigmas)


@dataclass(frozen=True)
class DirichletReport:
    """Boundary smallness and harmonicity of the Dirichlet correction."""

    boundary_max: float
    harmonic_residual: float
    grid_points: int


def _sphere_samples(dimension: int, count: int) -> NDArray[np.float64]:
    if dimension == 2:
        angles = np.linspace(0, 2 * math.pi, count, endpoint=False)
        return np.column_stack([np.cos(angles), np.sin(angles)])
    # Fibonacci lattice on S²
    k = np.arange(count) + 0.5
    z = 1 - 2 * k / count
    radius = np.sqrt(1 - z**2)
    phi = k * math.pi * (3 - math.sqrt(5))
    return np.column_stack([radius * np.cos(phi), radius * np.sin(phi), z])


def dirichlet_kernel_checks(nu: int, x: ArrayLike, grid_h: float) -> DirichletReport:
    """Check that K(x, ·) vanishes near the sphere and K(x, ·) − G(x, ·) is harmonic.

    The harmonic residual is the 5-point (ν = 2) or 7-point (ν = 3) stencil
    sum Σ u(neighbour) − 2ν·u(y) of u = K(x, ·) − G(x, ·), taken over lattice
    points of spacing grid_h whose stencil stays inside the ball and that
    are at least HARMONIC_EXCLUSION·grid_h away from x.
    """
    if nu not in (2, 3):
        raise BadParameter(f"Dirichlet checks support ν = 2 or 3, got {nu}")
    if not 0 < grid_h < 0.5:
        raise BadParameter(f"grid_h = {grid_h} is outside (0, 0.5)")
    green = ContinuousKernel(KernelKind.DISK_GREEN, nu)
    newton = ContinuousKernel(KernelKind.NEWTON, nu)
    center = np.asarray(x, dtype=float).reshape(-1)
    if center.shape != (nu,):
        raise BadParameter(f"x must have {nu} coordinates")
    if np.linalg.norm(center) >= 1 - 2 * grid_h:
        raise BadParameter(f"|x| must be below 1 − 2·grid_h = {1 - 2 * grid_h}")

    boundary = _sphere_samples(nu, BOUNDARY_SAMPLES) * (1 - BOUNDARY_INSET)
    boundary_max = float(np.abs(_disk_green(green, center, boundary)).max())

    steps = np.arange(-math.floor(1 / grid_h), math.floor(1 / grid_h) + 1) * grid_h
    lattice = np.stack(np.meshgrid(*[steps] * nu, indexing="ij"), axis=-1).reshape(-1, nu)
    inside = np.linalg.norm(lattice, axis=-1) < 1 - grid_h
    away = np.linalg.norm(lattice - center, axis=-1) >= HARMONIC_EXCLUSION * grid_h
    lattice = lattice[inside & away]

    def correction(y: NDArray[np.float64]) -> NDArray[np.float64]:
        return _disk_green(green, center, y) - _newton(newton, center, y)

    residual = -2 * nu * correction(lattice)
    for axis in range(nu):
        shift = np.zeros(nu)
        shift[axis] = grid_h
        residual += correction(lattice + shift) + correction(lattice - shift)
    harmonic_residual = float(np.abs(residual).max()) if lattice.size else 0.0
    _LOGGER.debug(
        f"Dirichlet ν={nu}, h={grid_h}: boundary {boundary_max:.3e},"
        f" harmonic {harmonic_residual:.3e} on {len(lattice)} points"
    )
    return DirichletReport(boundary_max, harmonic_residual, len(lattice))

