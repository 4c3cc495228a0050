"""Errors raised by graph-rkhs."""

from __future__ import annotations


class GraphRkhsError(Exception):
    """Base class for every error raised by the package."""

    @property
    def code(self) -> str:
        """Stable machine-readable error code."""
        return type(self).__name__


class DuplicatePoint(GraphRkhsError):
    """Exception raised when a point list repeats an identifier."""


class NonFiniteKernelValue(GraphRkhsError):
    """Exception raised when a kernel returns NaN or infinity."""


class DimensionMismatch(GraphRkhsError):
    """Exception raised when a vector does not match its index set."""


class UnknownPoint(GraphRkhsError):
    """Exception raised when a point is not part of the index set."""


class SingularGram(GraphRkhsError):
    """Exception raised when a Gram matrix is numerically singular."""


class NotPositiveDefinite(GraphRkhsError):
    """Exception raised when a restricted kernel fails the PSD check."""


class BadConductance(GraphRkhsError):
    """Exception raised for a nonpositive or non-finite conductance."""


class Disconnected(GraphRkhsError):
    """Exception raised when a graph is not connected."""


class SelfLoop(GraphRkhsError):
    """Exception raised when an edge joins a vertex to itself."""


class ParseError(GraphRkhsError):
    """Exception raised when an edge list cannot be parsed."""

    def __init__(self, line: int, message: str) -> None:
        """Initialize with the 1-based offending line."""
        super().__init__(f"line {line}: {message}")
        self.line = line


class DegenerateDipole(GraphRkhsError):
    """Exception raised when a dipole is requested with x equal to the base."""


class BadParameter(GraphRkhsError):
    """Exception raised for a parameter outside its admissible range."""


class OutOfDomain(GraphRkhsError):
    """Exception raised for a point outside a kernel's domain."""


class SingularPair(GraphRkhsError):
    """Exception raised when a singular kernel is evaluated on its diagonal."""


class TooClose(GraphRkhsError):
    """Exception raised when points are closer than the separation floor."""


class NotSymmetric(GraphRkhsError):
    """Exception raised when an operator matrix is not symmetric."""


class NotPositive(GraphRkhsError):
    """Exception raised when an operator has a negative eigenvalue."""


class NotInvertible(GraphRkhsError):
    """Exception raised when an operator has a zero eigenvalue."""


class ConsistencyError(GraphRkhsError):
    """Exception raised when an internal identity check fails."""


class ConfigError(GraphRkhsError):
    """Exception raised for an invalid environment setting."""
