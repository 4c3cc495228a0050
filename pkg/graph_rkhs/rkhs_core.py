"""Gram-matrix machinery for positive definite kernels on finite point sets."""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
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

import logging
import math
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from .const import (
    CAUCHY_LEVELS,
    CAUCHY_RTOL,
    DEFAULT_MAX_LEVELS,
    DIVERGENCE_CEILING,
    GROWTH_AFTER_LEVEL,
    GROWTH_FACTOR,
    GROWTH_LEVELS,
    MONO_TOL,
    PINV_CUTOFF,
    PSD_TOL,
    SCHEDULE_FULL,
    SCHEDULE_LINEAR,
    SCHEDULE_PREFIX,
    SOLVE_TOL,
)
from .exceptions import (
    BadParameter,
    ConsistencyError,
    DimensionMismatch,
    DuplicatePoint,
    NonFiniteKernelValue,
    NotSymmetric,
    SingularGram,
    UnknownPoint,
)

_LOGGER = logging.getLogger(__name__)

PairKernel = Callable[[Any, Any], float]

# A truncated eigen-direction carrying more than this share of a unit
# vector means the vector is outside the range of the Gram matrix.
RANGE_TOL = 1e-8


def point_label(point: Any) -> str:
    """Return the stable string identifier of a point."""
    if isinstance(point, str):
        return point
    if isinstance(point, (int, np.integer)) and not isinstance(point, bool):
        return str(int(point))
    if isinstance(point, (float, np.floating)):
        return repr(float(point))
    if isinstance(point, (Sequence, np.ndarray)):
        return "(" + ", ".join(point_label(coord) for coord in point) + ")"
    return str(point)


@dataclass(frozen=True, eq=False)
class FiniteKernel:
    """An ordered point list with the symmetric Gram matrix over it."""

    points: tuple[str, ...]
    gram: NDArray[np.float64]
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Validate and freeze the Gram matrix."""
        points = tuple(self.points)
        gram = np.array(self.gram, dtype=float)
        if not points:
            raise BadParameter("A kernel needs at least one point")
        if gram.shape != (len(points), len(points)):
            raise DimensionMismatch(
                f"Gram of shape {gram.shape} does not match {len(points)} points"
            )
        if len(set(points)) != len(points):
            raise DuplicatePoint("Point identifiers must be pairwise distinct")
        if not np.all(np.isfinite(gram)):
            raise NonFiniteKernelValue("Gram matrix has non-finite entries")
        if not np.array_equal(gram, gram.T):
            raise NotSymmetric("Gram matrix must be stored symmetric")
        gram.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "gram", gram)
        object.__setattr__(
            self, "_index", {label: i for i, label in enumerate(points)}
        )

    @property
    def size(self) -> int:
        """Number of points."""
        return len(self.points)

    def index(self, point: Any) -> int:
        """Return the position of a point, given raw or as a label."""
        label = point_label(point)
        try:
            return self._index[label]
        except KeyError as err:
            raise UnknownPoint(f"Point {label} is not in the kernel") from err

    def submatrix(self, points: Sequence[Any]) -> NDArray[np.float64]:
        """Return the principal submatrix on the given points."""
        idx = [self.index(p) for p in points]
        return self.gram[np.ix_(idx, idx)]


@dataclass(frozen=True)
class PsdReport:
    """Outcome of a positive semidefiniteness check."""

    min_eigenvalue: float
    max_eigenvalue: float
    is_psd: bool


@dataclass(frozen=True, eq=False)
class _Spectrum:
    """Eigen-split of a Gram into kept and truncated directions."""

    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]
    keep: NDArray[np.bool_]

    @property
    def rank(self) -> int:
        return int(self.keep.sum())

    def pinv(self) -> NDArray[np.float64]:
        vecs = self.eigenvectors[:, self.keep]
        inv = (vecs / self.eigenvalues[self.keep]) @ vecs.T
        return (inv + inv.T) / 2

    def range_defect(self, i: int) -> float:
        """Norm of the component of e_i outside the kept eigenspace."""
        null = self.eigenvectors[i, ~self.keep]
        return float(np.sqrt(np.sum(null**2)))


def _spectrum(gram: NDArray[np.float64]) -> _Spectrum:
    eigenvalues, eigenvectors = linalg.eigh(gram)
    cutoff = PINV_CUTOFF * max(float(eigenvalues[-1]), 0.0)
    keep = eigenvalues > cutoff
    return _Spectrum(eigenvalues, eigenvectors, keep)


def _as_vector(values: ArrayLike, size: int, what: str) -> NDArray[np.float64]:
    vector = np.asarray(values, dtype=float)
    if vector.shape != (size,):
        raise DimensionMismatch(f"{what} has shape {vector.shape}, expected ({size},)")
    return vector


def _strict_inverse(gram: NDArray[np.float64]) -> NDArray[np.float64]:
    """Invert a strictly positive definite Gram by Cholesky."""
    eigenvalues = linalg.eigvalsh(gram)
    if eigenvalues[0] <= PINV_CUTOFF * max(float(eigenvalues[-1]), 0.0):
        raise SingularGram(
            f"Gram is numerically singular (eigenvalues {eigenvalues[0]:.3e}"
            f" .. {eigenvalues[-1]:.3e})"
        )
    try:
        factor = linalg.cho_factor(gram, lower=True)
    except linalg.LinAlgError as err:
        raise SingularGram(f"Cholesky factorization failed: {err}") from err
    inverse = linalg.cho_solve(factor, np.eye(gram.shape[0]))
    return (inverse + inverse.T) / 2


def gram_assemble(kernel: PairKernel, points: Sequence[Any]) -> FiniteKernel:
    """Evaluate a kernel on every pair of points.

    Args:
        kernel: function of two points returning a real number
        points: ordered, pairwise distinct points

    Returns:
        FiniteKernel with gram symmetrized as (a + aᵀ)/2
    """
    points = list(points)
    labels = [point_label(p) for p in points]
    duplicates = [label for label, count in Counter(labels).items() if count > 1]
    if duplicates:
        raise DuplicatePoint(f"Point {duplicates[0]} appears more than once")

    n = len(points)
    raw = np.empty((n, n))
    for i, x in enumerate(points):
        for j, y in enumerate(points):
            value = float(kernel(x, y))
            if not math.isfinite(value):
                raise NonFiniteKernelValue(
                    f"Kernel value at ({labels[i]}, {labels[j]}) is {value}"
                )
            raw[i, j] = value

    return FiniteKernel(tuple(labels), (raw + raw.T) / 2)


def psd_check(kernel: FiniteKernel) -> PsdReport:
    """Report whether the Gram is positive semidefinite within psd_tol."""
    eigenvalues = linalg.eigvalsh(kernel.gram)
    lowest, highest = float(eigenvalues[0]), float(eigenvalues[-1])
    return PsdReport(
        min_eigenvalue=lowest,
        max_eigenvalue=highest,
        is_psd=lowest >= -PSD_TOL * max(1.0, highest),
    )


def rkhs_inner(kernel: FiniteKernel, a: ArrayLike, b: ArrayLike) -> float:
    """Return ΣΣ a(x) b(y) k(x, y)."""
    a_vec = _as_vector(a, kernel.size, "Left coefficient vector")
    b_vec = _as_vector(b, kernel.size, "Right coefficient vector")
    return float(a_vec @ kernel.gram @ b_vec)


def pseudo_inverse(kernel: FiniteKernel) -> tuple[NDArray[np.float64], int]:
    """Return the eigen-truncated pseudo-inverse of the Gram and its rank."""
    spectrum = _spectrum(kernel.gram)
    return spectrum.pinv(), spectrum.rank


def in_range(kernel: FiniteKernel, x: Any) -> bool:
    """Return True when δₓ on the points lies in the range of the Gram."""
    i = kernel.index(x)
    return _spectrum(kernel.gram).range_defect(i) <= RANGE_TOL


def membership_value(kernel: FiniteKernel, x: Any) -> float:
    """Return (K⁺δₓ)(x), the squared norm of the projection of δₓ onto span{k_y}."""
    i = kernel.index(x)
    return float(_spectrum(kernel.gram).pinv()[i, i])


def projection_coeffs(kernel: FiniteKernel, x: Any) -> NDArray[np.float64]:
    """Return ζ = K⁺δₓ, the expansion of the projection of δₓ in the k_y."""
    i = kernel.index(x)
    return _spectrum(kernel.gram).pinv()[:, i].copy()


def evaluation_bound(kernel: FiniteKernel, x: Any, xi: ArrayLike) -> tuple[float, float]:
    """Return both sides of |ξ(x)|² ≤ membership_value(K, x) · ξᵀKξ."""
    i = kernel.index(x)
    vector = _as_vector(xi, kernel.size, "Test vector")
    lhs = float(vector[i] ** 2)
    rhs = membership_value(kernel, x) * float(vector @ kernel.gram @ vector)
    return lhs, rhs


def finite_laplacian(kernel: FiniteKernel) -> NDArray[np.float64]:
    """Return L = K⁻¹, the operator with L kₓ = δₓ on the points."""
    inverse = _strict_inverse(kernel.gram)
    residual = float(np.max(np.abs(inverse @ kernel.gram - np.eye(kernel.size))))
    scale = max(1.0, float(np.abs(inverse).max() * np.abs(kernel.gram).max()))
    if residual > SOLVE_TOL * scale * kernel.size:
        raise ConsistencyError(f"L·K deviates from identity by {residual:.3e}")
    _LOGGER.debug(f"Finite Laplacian on {kernel.size} points, residual {residual:.2e}")
    return inverse


def modified_kernel(kernel: FiniteKernel, x: Any, eps: float) -> FiniteKernel:
    """Return the x-modified kernel: eps subtracted from the diagonal entry (x, x)."""
    i = kernel.index(x)
    gram = np.array(kernel.gram)
    gram[i, i] -= eps
    return FiniteKernel(kernel.points, gram)


def max_diagonal_perturbation(
    kernel: FiniteKernel, x: Any, method: str = "inverse"
) -> float:
    """Return the largest ε ≥ 0 keeping K − ε·eₓeₓᵀ positive semidefinite.

    The ``inverse`` method returns 1/(K⁻¹)ₓₓ. The ``bisection`` method
    searches on the sign of the smallest eigenvalue and serves as an
    independent check of the former.
    """
    i = kernel.index(x)
    inverse = _strict_inverse(kernel.gram)
    if method == "inverse":
        return float(1.0 / inverse[i, i])
    if method != "bisection":
        raise BadParameter(f"Unknown method {method!r}")

    low, high = 0.0, float(kernel.gram[i, i])
    gram = np.array(kernel.gram)
    for _ in range(200):
        middle = (low + high) / 2
        gram[i, i] = kernel.gram[i, i] - middle
        if linalg.eigvalsh(gram)[0] > 0:
            low = middle
        else:
            high = middle
        if high - low <= 1e-15 * high:
            break
    return (low + high) / 2


def restriction_min_norm(
    kernel: FiniteKernel, subset: Sequence[Any], phi: ArrayLike
) -> float:
    """Return the squared ℋ_V-norm of φ given on a subset V.

    Computed as φᵀ(K_V)⁻¹φ from the principal submatrix and, independently,
    as the minimum of ‖f‖² over f in span{k_y} with f|_V = φ, found by
    solving the Lagrange system on the full point set. Both must agree.
    """
    idx = [kernel.index(p) for p in subset]
    if len(set(idx)) != len(idx):
        raise DuplicatePoint("Subset repeats a point")
    values = _as_vector(phi, len(idx), "Boundary values")
    _strict_inverse(kernel.gram)

    sub = kernel.gram[np.ix_(idx, idx)]
    sub_value = float(values @ linalg.cho_solve(linalg.cho_factor(sub), values))

    n, m = kernel.size, len(idx)
    columns = kernel.gram[:, idx]
    system = np.zeros((n + m, n + m))
    system[:n, :n] = kernel.gram
    system[:n, n:] = columns
    system[n:, :n] = columns.T
    rhs = np.concatenate([np.zeros(n), values])
    coeffs = linalg.solve(system, rhs, assume_a="sym")[:n]
    constrained_value = float(coeffs @ kernel.gram @ coeffs)

    if not math.isclose(sub_value, constrained_value, rel_tol=1e-9, abs_tol=1e-12):
        raise ConsistencyError(
            f"Submatrix value {sub_value!r} differs from constrained minimum"
            f" {constrained_value!r}"
        )
    return sub_value


@dataclass(frozen=True, eq=False)
class InducedNetwork:
    """The electrical network whose grounded Laplacian is K⁻¹."""

    points: tuple[str, ...]
    inverse: NDArray[np.float64]
    conductances: dict[tuple[str, str], float]
    grounding: NDArray[np.float64]

    def off_band(self, bandwidth: int = 1) -> float:
        """Largest |(K⁻¹)ᵢⱼ| with |i − j| > bandwidth."""
        n = len(self.points)
        mask = np.abs(np.subtract.outer(np.arange(n), np.arange(n))) > bandwidth
        return float(np.abs(self.inverse[mask]).max()) if mask.any() else 0.0


def induced_conductances(kernel: FiniteKernel) -> InducedNetwork:
    """Read off the network a strictly positive definite kernel induces."""
    inverse = _strict_inverse(kernel.gram)
    floor = SOLVE_TOL * max(1.0, float(np.abs(inverse).max()))
    conductances: dict[tuple[str, str], float] = {}
    for i in range(kernel.size):
        for j in range(i + 1, kernel.size):
            if -inverse[i, j] > floor:
                conductances[(kernel.points[i], kernel.points[j])] = float(-inverse[i, j])
    return InducedNetwork(
        points=kernel.points,
        inverse=inverse,
        conductances=conductances,
        grounding=inverse.sum(axis=1),
    )


class Verdict(StrEnum):
    """Outcome of a membership diagnostic."""

    CONVERGED = "converged"
    DIVERGED = "diverged"
    UNDECIDED = "undecided"


def prefix_size(level: int) -> int:
    """Default exhaustion schedule: 2, 4, 8, ..."""
    return 2 ** (level + 1)


def size_schedule(name: str, total: int | None = None) -> Callable[[int], int]:
    """Return the subset size per level for a schedule name.

    ``prefix`` doubles from 2, ``linear:k`` grows by k from k, and ``full``
    takes all ``total`` points at once (finite point lists only).
    """
    kind, _, step = name.partition(":")
    if kind == SCHEDULE_PREFIX and not step:
        return prefix_size
    if kind == SCHEDULE_LINEAR and step.isdigit() and int(step) > 0:
        width = int(step)
        return lambda level: width * (level + 1)
    if kind == SCHEDULE_FULL and not step:
        if total is None:
            raise BadParameter("The full schedule needs a finite point list")
        return lambda level: total
    raise BadParameter(f"Unknown exhaustion schedule {name!r}")


@dataclass(frozen=True)
class Exhaustion:
    """Increasing sequence of finite point sets, produced level by level.

    ``levels`` is None for a countable exhaustion; for a finite point set
    it is the number of levels, the last of which is the whole set.
    """

    generator: Callable[[int], Sequence[Any]]
    levels: int | None = None

    def subset(self, level: int) -> tuple[Any, ...]:
        """Return the subset at the given level."""
        if level < 0 or (self.levels is not None and level >= self.levels):
            raise BadParameter(f"Exhaustion has no level {level}")
        return tuple(self.generator(level))

    def subsets(self, count: int) -> list[tuple[Any, ...]]:
        """Materialize the first count subsets."""
        if self.levels is not None:
            count = min(count, self.levels)
        return [self.subset(level) for level in range(count)]

    @classmethod
    def from_sequence(
        cls,
        point_at: Callable[[int], Any],
        size_at: Callable[[int], int] = prefix_size,
    ) -> Exhaustion:
        """Prefixes of a countable point sequence."""

        def generator(level: int) -> list[Any]:
            return [point_at(k) for k in range(size_at(level))]

        return cls(generator)

    @classmethod
    def from_points(
        cls,
        points: Sequence[Any],
        size_at: Callable[[int], int] = prefix_size,
    ) -> Exhaustion:
        """Prefixes of a finite point list, ending with the whole list."""
        points = list(points)
        if not points:
            raise BadParameter("Cannot exhaust an empty point list")
        sizes: list[int] = []
        level = 0
        while not sizes or sizes[-1] < len(points):
            size = min(size_at(level), len(points))
            if not sizes or size > sizes[-1]:
                sizes.append(size)
            level += 1

        def generator(level: int) -> list[Any]:
            return points[: sizes[level]]

        return cls(generator, levels=len(sizes))


@dataclass(frozen=True)
class MembershipDiagnostic:
    """Monotone sequence of (K_F⁺δₓ)(x) over an exhaustion, with its verdict."""

    target: str
    values: tuple[float, ...]
    subset_sizes: tuple[int, ...]
    verdict: Verdict
    limit: float | None = None


def membership_diagnostic(
    kernel: PairKernel,
    exhaustion: Exhaustion,
    x: Any,
    max_levels: int = DEFAULT_MAX_LEVELS,
) -> MembershipDiagnostic:
    """Decide numerically whether δₓ belongs to the RKHS of a kernel.

    The value at each level is ‖P_F δₓ‖², nondecreasing in F. Converged when
    consecutive values agree to CAUCHY_RTOL for CAUCHY_LEVELS levels (or when
    a finite exhaustion has been fully seen); diverged when δₓ is outside
    the range of some K_F, when the value exceeds DIVERGENCE_CEILING, or
    when it keeps growing geometrically past GROWTH_AFTER_LEVEL. The growth
    rule needs max_levels above GROWTH_AFTER_LEVEL, so the default leaves it
    to the ceiling and the range check.
    """
    if max_levels < 1:
        raise BadParameter("max_levels must be at least 1")
    target = point_label(x)
    levels = max_levels if exhaustion.levels is None else min(max_levels, exhaustion.levels)

    values: list[float] = []
    sizes: list[int] = []
    previous: set[str] | None = None
    cauchy_run = 0
    growth_run = 0

    for level in range(levels):
        finite = gram_assemble(kernel, exhaustion.subset(level))
        labels = set(finite.points)
        if level == 0 and target not in labels:
            raise UnknownPoint(f"Target {target} is not in the first exhaustion level")
        if previous is not None and not previous < labels:
            _LOGGER.warning(
                f"Exhaustion level {level} does not strictly enlarge level {level - 1}, stopping"
            )
            break
        previous = labels

        spectrum = _spectrum(finite.gram)
        i = finite.index(target)
        value = float(spectrum.pinv()[i, i])
        values.append(value)
        sizes.append(finite.size)
        _LOGGER.debug(f"Level {level}: {finite.size} points, value {value!r}")

        if spectrum.range_defect(i) > RANGE_TOL:
            _LOGGER.debug(f"δ_{target} is outside the range of the Gram at level {level}")
            return MembershipDiagnostic(
                target, tuple(values), tuple(sizes), Verdict.DIVERGED
            )

        if len(values) >= 2:
            step = value - values[-2]
            if step < -MONO_TOL:
                _LOGGER.warning(
                    f"Membership value decreased by {-step:.3e} at level {level}"
                )
            cauchy_run = cauchy_run + 1 if abs(step) <= CAUCHY_RTOL * max(1.0, value) else 0
            grows = values[-2] > 0 and value >= GROWTH_FACTOR * values[-2]
            growth_run = growth_run + 1 if grows and level > GROWTH_AFTER_LEVEL else 0

        if cauchy_run >= CAUCHY_LEVELS:
            return MembershipDiagnostic(
                target, tuple(values), tuple(sizes), Verdict.CONVERGED, value
            )
        if value > DIVERGENCE_CEILING or growth_run >= GROWTH_LEVELS:
            return MembershipDiagnostic(
                target, tuple(values), tuple(sizes), Verdict.DIVERGED
            )
    else:
        if exhaustion.levels is not None and levels == exhaustion.levels:
            return MembershipDiagnostic(
                target, tuple(values), tuple(sizes), Verdict.CONVERGED, values[-1]
            )

    return MembershipDiagnostic(target, tuple(values), tuple(sizes), Verdict.UNDECIDED)
