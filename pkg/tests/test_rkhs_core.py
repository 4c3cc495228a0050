"""Tests for Gram-matrix machinery and the membership diagnostic."""

import numpy as np
import numpy.testing as npt
import pytest

from graph_rkhs import rkhs_core
from graph_rkhs.const import (
    DEFAULT_MAX_LEVELS,
    DIVERGENCE_CEILING,
    GROWTH_AFTER_LEVEL,
    GROWTH_LEVELS,
)
from graph_rkhs.exceptions import (
    BadParameter,
    DimensionMismatch,
    DuplicatePoint,
    NonFiniteKernelValue,
    NotSymmetric,
    SingularGram,
    UnknownPoint,
)
from graph_rkhs.network import ladder_kernel, ladder_pair
from graph_rkhs.rkhs_core import Exhaustion, FiniteKernel, Verdict

from .conftest import random_spd


def bm(x, y):
    return min(x, y)


def constant(_x, _y):
    return 1.0


@pytest.fixture
def bm3() -> FiniteKernel:
    return rkhs_core.gram_assemble(bm, [1, 2, 3])


@pytest.mark.parametrize(
    ("point", "label"),
    [(3, "3"), (0.5, "0.5"), ((0.1, 0.2), "(0.1, 0.2)"), ("a", "a"), (np.int64(7), "7")],
)
def test_point_label(point, label):
    assert rkhs_core.point_label(point) == label


def test_gram_assemble_brownian_motion(bm3):
    npt.assert_array_equal(bm3.gram, [[1, 1, 1], [1, 2, 2], [1, 2, 3]])
    assert bm3.points == ("1", "2", "3")
    assert bm3.index(2) == 1
    npt.assert_array_equal(bm3.submatrix([1, 3]), [[1, 1], [1, 3]])


def test_gram_assemble_symmetrizes():
    kernel = rkhs_core.gram_assemble(lambda x, y: x + 2 * y, [0, 1])
    npt.assert_array_equal(kernel.gram, [[0, 1.5], [1.5, 3]])


def test_gram_assemble_errors():
    with pytest.raises(DuplicatePoint):
        rkhs_core.gram_assemble(bm, [1, 2, 1])
    with pytest.raises(NonFiniteKernelValue):
        rkhs_core.gram_assemble(lambda *_: float("nan"), [1, 2])


def test_finite_kernel_validation():
    with pytest.raises(NotSymmetric):
        FiniteKernel(("a", "b"), np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(DimensionMismatch):
        FiniteKernel(("a",), np.eye(2))
    with pytest.raises(DuplicatePoint):
        FiniteKernel(("a", "a"), np.eye(2))
    with pytest.raises(BadParameter):
        FiniteKernel((), np.zeros((0, 0)))
    kernel = FiniteKernel(("a", "b"), np.eye(2))
    with pytest.raises(UnknownPoint):
        kernel.index("c")
    with pytest.raises(ValueError, match="read-only"):
        kernel.gram[0, 0] = 2.0


def test_psd_check(bm3):
    assert rkhs_core.psd_check(bm3).is_psd
    assert rkhs_core.psd_check(rkhs_core.gram_assemble(constant, [1, 2, 3])).is_psd
    report = rkhs_core.psd_check(FiniteKernel(("a", "b"), np.array([[1.0, 2.0], [2.0, 1.0]])))
    assert not report.is_psd
    npt.assert_allclose(report.min_eigenvalue, -1.0)


def test_rkhs_inner(bm3):
    assert rkhs_core.rkhs_inner(bm3, [1, 0, 0], [0, 0, 1]) == 1.0
    assert rkhs_core.rkhs_inner(bm3, [0, 1, -1], [0, 1, -1]) == 1.0
    with pytest.raises(DimensionMismatch):
        rkhs_core.rkhs_inner(bm3, [1, 0], [0, 0, 1])


def test_pseudo_inverse_of_rank_one_kernel():
    kernel = rkhs_core.gram_assemble(constant, [1, 2, 3])
    inverse, rank = rkhs_core.pseudo_inverse(kernel)
    assert rank == 1
    npt.assert_allclose(inverse, np.full((3, 3), 1 / 9), atol=1e-15)


def test_membership_and_projection(bm3):
    npt.assert_allclose(rkhs_core.pseudo_inverse(bm3)[0], [[2, -1, 0], [-1, 2, -1], [0, -1, 1]], atol=1e-12)
    npt.assert_allclose(rkhs_core.membership_value(bm3, 1), 2.0)
    npt.assert_allclose(rkhs_core.projection_coeffs(bm3, 1), [2, -1, 0], atol=1e-12)
    npt.assert_allclose(rkhs_core.projection_coeffs(bm3, 2), [-1, 2, -1], atol=1e-12)
    assert rkhs_core.in_range(bm3, 3)


def test_projection_reproduces_delta(rng):
    gram = random_spd(rng, 8)
    kernel = FiniteKernel(tuple("abcdefgh"), gram)
    for i, x in enumerate(kernel.points):
        zeta = rkhs_core.projection_coeffs(kernel, x)
        npt.assert_allclose(gram @ zeta, np.eye(8)[i], atol=1e-10)
        npt.assert_allclose(
            rkhs_core.rkhs_inner(kernel, zeta, zeta), rkhs_core.membership_value(kernel, x)
        )


def test_delta_outside_range_of_constant_kernel():
    kernel = rkhs_core.gram_assemble(constant, ["a", "b"])
    assert not rkhs_core.in_range(kernel, "a")


def test_evaluation_bound(rng):
    kernel = FiniteKernel(tuple("abcdef"), random_spd(rng, 6))
    for _ in range(20):
        xi = rng.standard_normal(6)
        for x in kernel.points:
            lhs, rhs = rkhs_core.evaluation_bound(kernel, x, xi)
            assert lhs <= rhs * (1 + 1e-12)


def test_finite_laplacian_of_ladder():
    laplacian = rkhs_core.finite_laplacian(ladder_kernel(0.5, 2))
    npt.assert_allclose(laplacian, [[1, -1, 0], [-1, 3, -2], [0, -2, 4]], atol=1e-12)


def test_finite_laplacian_rejects_singular_gram():
    with pytest.raises(SingularGram):
        rkhs_core.finite_laplacian(rkhs_core.gram_assemble(constant, [1, 2]))


@pytest.mark.parametrize(("x", "expected"), [(1, 0.5), (2, 0.5), (3, 1.0)])
@pytest.mark.parametrize("method", ["inverse", "bisection"])
def test_max_diagonal_perturbation(bm3, x, expected, method):
    npt.assert_allclose(
        rkhs_core.max_diagonal_perturbation(bm3, x, method), expected, rtol=1e-8
    )


def test_max_diagonal_perturbation_methods_agree(rng):
    kernel = FiniteKernel(tuple("abcde"), random_spd(rng, 5))
    for x in kernel.points:
        npt.assert_allclose(
            rkhs_core.max_diagonal_perturbation(kernel, x, "bisection"),
            rkhs_core.max_diagonal_perturbation(kernel, x, "inverse"),
            rtol=1e-8,
        )
    with pytest.raises(BadParameter):
        rkhs_core.max_diagonal_perturbation(kernel, "a", "newton")


@pytest.mark.parametrize("seed", range(20))
def test_max_diagonal_perturbation_random_grams(seed):
    rng = np.random.default_rng(seed)
    size = int(rng.integers(2, 13))
    kernel = FiniteKernel(tuple(str(i) for i in range(size)), random_spd(rng, size))
    x = str(rng.integers(size))
    npt.assert_allclose(
        rkhs_core.max_diagonal_perturbation(kernel, x, "bisection"),
        1 / np.linalg.inv(kernel.gram)[kernel.index(x), kernel.index(x)],
        rtol=1e-6,
    )


def test_modified_kernel_stays_psd_up_to_threshold(bm3):
    eps = rkhs_core.max_diagonal_perturbation(bm3, 1)
    assert rkhs_core.psd_check(rkhs_core.modified_kernel(bm3, 1, 0.99 * eps)).is_psd
    assert not rkhs_core.psd_check(rkhs_core.modified_kernel(bm3, 1, 1.1 * eps)).is_psd
    assert bm3.gram[0, 0] == 1.0


def test_restriction_min_norm(bm3):
    npt.assert_allclose(rkhs_core.restriction_min_norm(bm3, [1, 3], [1.0, 0.0]), 1.5)
    with pytest.raises(DuplicatePoint):
        rkhs_core.restriction_min_norm(bm3, [1, 1], [1.0, 0.0])
    with pytest.raises(DimensionMismatch):
        rkhs_core.restriction_min_norm(bm3, [1, 3], [1.0])


@pytest.mark.parametrize("seed", range(50))
def test_restriction_min_norm_random_instances(seed):
    rng = np.random.default_rng(1000 + seed)
    size = int(rng.integers(2, 13))
    kernel = FiniteKernel(tuple(str(i) for i in range(size)), random_spd(rng, size))
    subset = [str(i) for i in rng.choice(size, size=int(rng.integers(1, size + 1)), replace=False)]
    phi = rng.standard_normal(len(subset))
    idx = [kernel.index(p) for p in subset]
    expected = phi @ np.linalg.solve(kernel.gram[np.ix_(idx, idx)], phi)
    npt.assert_allclose(rkhs_core.restriction_min_norm(kernel, subset, phi), expected, rtol=1e-9)


def test_induced_conductances_of_brownian_motion():
    network = rkhs_core.induced_conductances(rkhs_core.gram_assemble(bm, [1, 2, 4]))
    assert set(network.conductances) == {("1", "2"), ("2", "4")}
    npt.assert_allclose(network.conductances[("1", "2")], 1.0)
    npt.assert_allclose(network.conductances[("2", "4")], 0.5)
    npt.assert_allclose(network.grounding, [1, 0, 0], atol=1e-12)
    assert network.off_band(1) < 1e-12


def test_size_schedule():
    prefix = rkhs_core.size_schedule("prefix")
    assert [prefix(level) for level in range(4)] == [2, 4, 8, 16]
    linear = rkhs_core.size_schedule("linear:3")
    assert [linear(level) for level in range(3)] == [3, 6, 9]
    assert rkhs_core.size_schedule("full", 5)(0) == 5
    for bad in ("full", "linear:0", "linear:x", "doubling"):
        with pytest.raises(BadParameter):
            rkhs_core.size_schedule(bad)


def test_exhaustion_from_points_ends_with_whole_set():
    exhaustion = Exhaustion.from_points(list("abcde"))
    assert exhaustion.levels == 3
    assert exhaustion.subsets(10) == [("a", "b"), ("a", "b", "c", "d"), tuple("abcde")]
    with pytest.raises(BadParameter):
        exhaustion.subset(3)
    with pytest.raises(BadParameter):
        Exhaustion.from_points([])


def test_membership_brownian_motion_on_integers():
    exhaustion = Exhaustion.from_sequence(lambda k: k + 1)
    result = rkhs_core.membership_diagnostic(bm, exhaustion, 1, max_levels=8)
    assert result.verdict is Verdict.CONVERGED
    npt.assert_allclose(result.limit, 2.0, rtol=1e-9)
    assert result.subset_sizes[:3] == (2, 4, 8)


def test_membership_ladder_converges():
    ratio = 0.8
    exhaustion = Exhaustion.from_sequence(lambda k: k)
    result = rkhs_core.membership_diagnostic(ladder_pair(ratio), exhaustion, 1, max_levels=8)
    assert result.verdict is Verdict.CONVERGED
    npt.assert_allclose(result.values[0], 1 / ratio, rtol=1e-9)
    npt.assert_allclose(result.limit, 1 + 1 / ratio, rtol=1e-9)


def test_membership_constant_kernel_diverges_at_first_level():
    exhaustion = Exhaustion.from_sequence(lambda k: k)
    result = rkhs_core.membership_diagnostic(constant, exhaustion, 0)
    assert result.verdict is Verdict.DIVERGED
    assert len(result.values) == 1
    assert result.limit is None


def test_membership_diverges_past_ceiling():
    # Gaps to the target shrink as 10^-k, so the value is 10^6·(1 + 10^k)
    exhaustion = Exhaustion.from_sequence(
        lambda k: 1.0 + 10.0**-k if k else 1.0, rkhs_core.size_schedule("linear:1")
    )
    result = rkhs_core.membership_diagnostic(
        lambda x, y: 1e-6 * min(x, y), exhaustion, 1.0, max_levels=12
    )
    assert result.verdict is Verdict.DIVERGED
    assert result.limit is None
    assert len(result.values) == 7
    assert result.values[-1] > DIVERGENCE_CEILING
    assert max(result.values[:-1]) < DIVERGENCE_CEILING
    npt.assert_allclose(result.values[3], 1e6 * (1 + 1e3), rtol=1e-6)


def test_membership_diverges_by_steady_growth():
    # Brownian motion refining toward 1 with gap 1/k: the value is 1 + k
    exhaustion = Exhaustion.from_sequence(
        lambda k: 1.0 + 1.0 / k if k else 1.0, rkhs_core.size_schedule("linear:1")
    )
    result = rkhs_core.membership_diagnostic(bm, exhaustion, 1.0, max_levels=40)
    assert result.verdict is Verdict.DIVERGED
    assert len(result.values) == GROWTH_AFTER_LEVEL + GROWTH_LEVELS + 1
    npt.assert_allclose(result.values, np.arange(1, len(result.values) + 1), rtol=1e-8)


def test_membership_growth_rule_waits_for_late_levels():
    exhaustion = Exhaustion.from_sequence(
        lambda k: 1.0 + 1.0 / k if k else 1.0, rkhs_core.size_schedule("linear:1")
    )
    result = rkhs_core.membership_diagnostic(bm, exhaustion, 1.0)
    assert result.verdict is Verdict.UNDECIDED
    assert len(result.values) == DEFAULT_MAX_LEVELS


def test_membership_non_growing_exhaustion_is_undecided(caplog):
    exhaustion = Exhaustion(lambda _level: ["a"])
    result = rkhs_core.membership_diagnostic(constant, exhaustion, "a")
    assert result.verdict is Verdict.UNDECIDED
    assert result.values == (1.0,)
    assert "does not strictly enlarge" in caplog.text


def test_membership_target_must_be_in_first_level():
    exhaustion = Exhaustion.from_sequence(lambda k: k + 1)
    with pytest.raises(UnknownPoint):
        rkhs_core.membership_diagnostic(bm, exhaustion, 10)
    with pytest.raises(BadParameter):
        rkhs_core.membership_diagnostic(bm, exhaustion, 1, max_levels=0)


@pytest.mark.parametrize("schedule", ["prefix", "linear:1", "linear:2", "full"])
@pytest.mark.parametrize(
    ("kernel", "points", "target", "limit"),
    [
        (bm, [3, 1, 2, 4, 5], 3, 2.0),
        (lambda s, t: min(s, t) - s * t, [0.4, 0.2, 0.6, 0.8], 0.4, 10.0),
    ],
)
def test_membership_on_finite_lists(schedule, kernel, points, target, limit):
    sizes = rkhs_core.size_schedule(schedule, len(points))
    result = rkhs_core.membership_diagnostic(
        kernel, Exhaustion.from_points(points, sizes), target
    )
    assert result.verdict is Verdict.CONVERGED
    assert result.subset_sizes[-1] == len(points)
    npt.assert_allclose(result.limit, limit, rtol=1e-9)


def test_membership_values_are_monotone(rng):
    gram = random_spd(rng, 12)
    kernel = FiniteKernel(tuple(str(i) for i in range(12)), gram)

    def lookup(x, y):
        return float(kernel.gram[kernel.index(x), kernel.index(y)])

    exhaustion = Exhaustion.from_points(list(kernel.points), rkhs_core.size_schedule("linear:1"))
    result = rkhs_core.membership_diagnostic(lookup, exhaustion, "0")
    assert np.all(np.diff(result.values) >= -1e-9)
    npt.assert_allclose(result.limit, np.linalg.inv(gram)[0, 0], rtol=1e-9)
