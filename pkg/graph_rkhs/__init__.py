"""Reproducing kernels on discrete sets: Gram matrices, electrical networks and Dirac masses."""

from __future__ import annotations

from .const import VERSION as __version__
from .continuum import (
    ContinuousKernel,
    KernelKind,
    kernel_eval,
    restrict,
    restriction_resistance,
    sample_bridge_paths,
)
from .exceptions import GraphRkhsError
from .network import (
    WeightedGraph,
    dipole,
    energy_inner,
    ladder_kernel,
    laplacian_apply,
    load_graph,
    network_kernel,
    resistance_metric,
)
from .rkhs_core import (
    Exhaustion,
    FiniteKernel,
    Verdict,
    finite_laplacian,
    gram_assemble,
    max_diagonal_perturbation,
    membership_diagnostic,
    membership_value,
    psd_check,
)
from .semigroup import green_from_semigroup, heat_kernel, spectral_decompose
