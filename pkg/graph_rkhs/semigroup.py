"""Spectral calculus for grounded Laplacians: heat kernels and Green matrices."""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from .const import (
    GREEN_HEAD_FRACTION,
    GREEN_QUADRATURE_NODES,
    GREEN_TAIL,
    PINV_CUTOFF,
    PSD_TOL,
    SYMMETRY_TOL,
)
from .exceptions import (
    BadParameter,
    ConsistencyError,
    DimensionMismatch,
    NotInvertible,
    NotPositive,
    NotSymmetric,
)

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues in nondecreasing order with orthonormal eigenvector columns."""

    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]

    @property
    def size(self) -> int:
        """Dimension of the decomposed matrix."""
        return int(self.eigenvalues.size)

    def apply(self, spectrum: NDArray[np.float64]) -> NDArray[np.float64]:
        """Return U·diag(spectrum)·Uᵀ, symmetrized."""
        u = self.eigenvectors
        matrix = (u * spectrum) @ u.T
        return (matrix + matrix.T) / 2


def spectral_decompose(matrix: ArrayLike) -> SpectralDecomposition:
    """Diagonalize a symmetric positive semidefinite matrix."""
    laplacian = np.asarray(matrix, dtype=float)
    if laplacian.ndim != 2 or laplacian.shape[0] != laplacian.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {laplacian.shape}")
    scale = max(1.0, float(np.abs(laplacian).max(initial=0.0)))
    asymmetry = float(np.abs(laplacian - laplacian.T).max(initial=0.0))
    if asymmetry > SYMMETRY_TOL * scale:
        raise NotSymmetric(f"Matrix is asymmetric by {asymmetry:.3e}")

    eigenvalues, eigenvectors = linalg.eigh(laplacian)
    if eigenvalues[0] < -PSD_TOL * max(1.0, float(eigenvalues[-1])):
        raise NotPositive(f"Matrix has eigenvalue {eigenvalues[0]:.3e}")

    decomposition = SpectralDecomposition(eigenvalues, eigenvectors)
    reconstruction_error = float(np.abs(decomposition.apply(eigenvalues) - laplacian).max())
    orthogonality_error = float(
        np.abs(eigenvectors.T @ eigenvectors - np.eye(len(eigenvalues))).max()
    )
    if reconstruction_error > 1e-10 * scale or orthogonality_error > 1e-12 * len(eigenvalues):
        raise ConsistencyError(
            f"Eigendecomposition errors {reconstruction_error:.3e}, {orthogonality_error:.3e}"
        )
    _LOGGER.debug(
        f"Decomposed {len(eigenvalues)}×{len(eigenvalues)} matrix,"
        f" spectrum {eigenvalues[0]:.3e} .. {eigenvalues[-1]:.3e}"
    )
    return decomposition


def reconstruct(decomposition: SpectralDecomposition) -> NDArray[np.float64]:
    """Return U·diag(λ)·Uᵀ."""
    return decomposition.apply(decomposition.eigenvalues)


def heat_kernel(decomposition: SpectralDecomposition, t: float) -> NDArray[np.float64]:
    """Return pₜ = e^{−tL}; p₀ is the identity."""
    if not math.isfinite(t) or t < 0:
        raise BadParameter(f"Heat kernel time must be nonnegative, got {t}")
    if t == 0:
        return np.eye(decomposition.size)
    return decomposition.apply(np.exp(-t * decomposition.eigenvalues))


def semigroup_defect(decomposition: SpectralDecomposition, s: float, t: float) -> float:
    """Return ‖p_s·p_t − p_{s+t}‖_max."""
    product = heat_kernel(decomposition, s) @ heat_kernel(decomposition, t)
    return float(np.abs(product - heat_kernel(decomposition, s + t)).max())


def _positive_spectrum(decomposition: SpectralDecomposition) -> NDArray[np.float64]:
    eigenvalues = decomposition.eigenvalues
    if eigenvalues[0] <= PINV_CUTOFF * max(float(eigenvalues[-1]), 1.0):
        raise NotInvertible(
            f"Smallest eigenvalue {eigenvalues[0]:.3e} is zero; ground a vertex first"
        )
    return eigenvalues


def green_from_semigroup(decomposition: SpectralDecomposition) -> NDArray[np.float64]:
    """Return K = ∫₀^∞ pₜ dt = U·diag(1/λ)·Uᵀ, the inverse of the Laplacian."""
    eigenvalues = _positive_spectrum(decomposition)
    green = decomposition.apply(1 / eigenvalues)
    laplacian = reconstruct(decomposition)
    residual = float(np.abs(green @ laplacian - np.eye(decomposition.size)).max())
    tolerance = 1e-9 * max(1.0, float(eigenvalues[-1] / eigenvalues[0]))
    if residual > tolerance:
        raise ConsistencyError(f"K·L deviates from identity by {residual:.3e}")
    return green


def green_quadrature(
    decomposition: SpectralDecomposition, nodes: int = GREEN_QUADRATURE_NODES
) -> NDArray[np.float64]:
    """Approximate ∫₀^∞ pₜ dt by quadrature, independently of 1/λ.

    Trapezoid in u = log t on [a, T] with T = log(1/GREEN_TAIL)/λ_min and
    a = min(GREEN_HEAD_FRACTION·T, 10⁻⁴/λ_max), plus one trapezoid panel on
    [0, a]. The neglected tail is below GREEN_TAIL/λ_min.
    """
    if nodes < 2:
        raise BadParameter("Quadrature needs at least two nodes")
    eigenvalues = _positive_spectrum(decomposition)
    upper = math.log(1 / GREEN_TAIL) / float(eigenvalues[0])
    lower = min(GREEN_HEAD_FRACTION * upper, 1e-4 / float(eigenvalues[-1]))

    u = np.linspace(math.log(lower), math.log(upper), nodes)
    times = np.exp(u)
    integrand = np.exp(-np.outer(eigenvalues, times)) * times
    body = np.trapezoid(integrand, u, axis=1)
    head = lower * (1 + np.exp(-eigenvalues * lower)) / 2
    _LOGGER.debug(f"Green quadrature on [{lower:.3e}, {upper:.3e}] with {nodes} nodes")
    return decomposition.apply(body + head)
