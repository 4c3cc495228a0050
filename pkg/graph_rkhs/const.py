"""Constants for the graph-rkhs package."""

from typing import Final

VERSION: Final = "1.0.0"

# JobResult layout version, bumped on any change to an output schema
SCHEMA_VERSION: Final = 1

# Positive definiteness and inversion
PSD_TOL: Final = 1e-9
PINV_CUTOFF: Final = 1e-12
SOLVE_TOL: Final = 1e-10
MONO_TOL: Final = 1e-9
SYMMETRY_TOL: Final = 1e-12

# Membership diagnostic
CAUCHY_RTOL: Final = 1e-8
CAUCHY_LEVELS: Final = 3
DIVERGENCE_CEILING: Final = 1e12
GROWTH_FACTOR: Final = 1.01
GROWTH_LEVELS: Final = 10
GROWTH_AFTER_LEVEL: Final = 20
DEFAULT_MAX_LEVELS: Final = 20

# Continuous kernels
SEP_TOL: Final = 1e-8
BM_DOMAIN_MAX: Final = 1e6
DEFAULT_SELF_ENERGY_RADIUS: Final = 0.01
BOUNDARY_INSET: Final = 1e-6
BOUNDARY_SAMPLES: Final = 720
MIN_QUADRATURE_N: Final = 100
HARMONIC_EXCLUSION: Final = 5

# Brownian bridge sampler
SAMPLER_SHARD_SIZE: Final = 1024
DEFAULT_SEED: Final = 0
COVARIANCE_SIGMAS: Final = 4.0

# Semigroup
GREEN_QUADRATURE_NODES: Final = 10_000
GREEN_TAIL: Final = 1e-10
GREEN_HEAD_FRACTION: Final = 1e-6

# Ladder network
LADDER_GROUND: Final = "inf"

# Environment
ENV_THREADS: Final = "RKHS_THREADS"

# Built-in kernel registry (CLI)
KERNEL_BM: Final = "bm"
KERNEL_BRIDGE: Final = "bridge"
KERNEL_DISK2: Final = "disk2"
KERNEL_DISK3: Final = "disk3"
KERNEL_NEWTON: Final = "newton"
KERNEL_LADDER: Final = "ladder"

# Exhaustion schedules (CLI)
SCHEDULE_PREFIX: Final = "prefix"
SCHEDULE_LINEAR: Final = "linear"
SCHEDULE_FULL: Final = "full"

# Exit codes
EXIT_OK: Final = 0
EXIT_FAILURE: Final = 1
EXIT_USAGE: Final = 2
