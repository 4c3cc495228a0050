"""Tests for the graph-rkhs command line."""

import json

import numpy.testing as npt
import pytest

from graph_rkhs.cli import main
from graph_rkhs.const import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, SCHEMA_VERSION

TRIANGLE = "a b 1\nb c 1\nc a 1\n"
PATH4 = "# path on four vertices\n0 1 1\n1 2 1\n2 3 1\n"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


@pytest.fixture
def triangle_file(tmp_path):
    path = tmp_path / "triangle.txt"
    path.write_text(TRIANGLE, encoding="utf-8")
    return path


@pytest.fixture
def path_file(tmp_path):
    path = tmp_path / "path.txt"
    path.write_text(PATH4, encoding="utf-8")
    return path


def test_version(capsys):
    code, out = run(capsys, "--version")
    assert code == EXIT_OK
    assert "graph-rkhs" in out


def test_missing_command_is_usage_error():
    assert main([]) == EXIT_USAGE


def test_membership_ladder(capsys):
    code, result = run(
        capsys, "membership", "--kernel", "ladder:0.5", "--target", "1", "--max-levels", "8"
    )
    assert code == EXIT_OK
    assert result["schema_version"] == SCHEMA_VERSION
    assert result["command"] == "membership"
    outputs = result["outputs"]
    assert outputs["verdict"] == "converged"
    assert outputs["subset_sizes"][:3] == [2, 4, 8]
    npt.assert_allclose(outputs["limit"], 3.0, rtol=1e-6)
    assert all(check["passed"] for check in result["diagnostics"])


def test_membership_bridge_points(capsys):
    code, result = run(
        capsys,
        "membership",
        "--kernel",
        "bridge",
        "--points",
        "[0.25, 0.5, 0.75]",
        "--target",
        "0.5",
    )
    assert code == EXIT_OK
    assert result["outputs"]["verdict"] == "converged"
    assert result["outputs"]["target"] == "0.5"
    npt.assert_allclose(result["outputs"]["limit"], 8.0, rtol=1e-9)


@pytest.mark.parametrize("schedule", ["prefix", "linear:2", "full"])
def test_membership_points_from_file(capsys, tmp_path, schedule):
    points = tmp_path / "points.json"
    points.write_text("[1, 2, 3, 4, 5]", encoding="utf-8")
    code, result = run(
        capsys,
        "membership",
        "--kernel",
        "bm",
        "--points",
        str(points),
        "--target",
        "3",
        "--exhaustion",
        schedule,
    )
    assert code == EXIT_OK
    assert result["outputs"]["subset_sizes"][-1] == 5
    npt.assert_allclose(result["outputs"]["limit"], 2.0, rtol=1e-9)


def test_membership_graph_file(capsys, path_file):
    code, result = run(
        capsys, "membership", "--kernel", str(path_file), "--target", "1", "--base", "0"
    )
    assert code == EXIT_OK
    npt.assert_allclose(result["outputs"]["limit"], 2.0, rtol=1e-9)


def test_membership_graph_integer_points(capsys, path_file):
    code, result = run(
        capsys,
        "membership",
        "--kernel",
        str(path_file),
        "--points",
        "[1, 2, 3]",
        "--target",
        "1",
        "--base",
        "0",
    )
    assert code == EXIT_OK
    assert result["outputs"]["target"] == "1"
    npt.assert_allclose(result["outputs"]["limit"], 2.0, rtol=1e-9)


def test_membership_disk_green_near_boundary(capsys):
    code, result = run(
        capsys,
        "membership",
        "--kernel",
        "disk2",
        "--points",
        "[[0.0, 0.0], [0.995, 0.0], [0.0, 0.5], [-0.3, -0.3]]",
        "--target",
        "[0.995, 0.0]",
        "--exhaustion",
        "linear:1",
    )
    assert code == EXIT_OK
    assert result["outputs"]["verdict"] == "converged"
    assert all(check["passed"] for check in result["diagnostics"])


def test_membership_target_cannot_be_base(capsys, path_file):
    code, result = run(
        capsys, "membership", "--kernel", str(path_file), "--target", "0", "--base", "0"
    )
    assert code == EXIT_USAGE
    assert result == ""


@pytest.mark.parametrize(
    "argv",
    [
        ["--kernel", "gauss", "--points", "[1, 2]", "--target", "1"],
        ["--kernel", "bridge", "--points", "[0.25, 0.5]", "--target", "0.6"],
        ["--kernel", "bridge", "--target", "0.5"],
        ["--kernel", "bm", "--points", "[1, 2", "--target", "1"],
        ["--kernel", "bm", "--points", "[1, 2]", "--target", "1", "--exhaustion", "random"],
        ["--kernel", "ladder:0.5", "--target", "-1"],
    ],
)
def test_membership_usage_errors(argv):
    assert main(["membership", *argv]) == EXIT_USAGE


def test_membership_domain_error(capsys):
    code, result = run(capsys, "membership", "--kernel", "bm", "--points", "[-1, 2]", "--target", "2")
    assert code == EXIT_FAILURE
    assert result["error"]["code"] == "OutOfDomain"


def test_network_resistance_triangle(capsys, triangle_file):
    code, result = run(
        capsys, "network", "--graph", str(triangle_file), "--base", "a", "--emit", "resistance"
    )
    assert code == EXIT_OK
    resistance = result["outputs"]["resistance"]
    assert resistance["vertices"] == ["a", "b", "c"]
    npt.assert_allclose(
        resistance["matrix"], [[0, 2 / 3, 2 / 3], [2 / 3, 0, 2 / 3], [2 / 3, 2 / 3, 0]], atol=1e-12
    )
    names = {check["check_name"] for check in result["diagnostics"]}
    assert names == {"gm1_identity", "triangle_defect"}
    assert all(check["passed"] for check in result["diagnostics"])


def test_network_resistance_path_is_graph_distance(capsys, path_file):
    code, result = run(
        capsys, "network", "--graph", str(path_file), "--base", "2", "--emit", "resistance"
    )
    assert code == EXIT_OK
    npt.assert_allclose(
        result["outputs"]["resistance"]["matrix"],
        [[abs(i - j) for j in range(4)] for i in range(4)],
        atol=1e-12,
    )


@pytest.mark.parametrize("emit", ["dipoles", "kernel", "laplacian"])
def test_network_emits(capsys, path_file, emit):
    code, result = run(capsys, "network", "--graph", str(path_file), "--base", "0", "--emit", emit)
    assert code == EXIT_OK
    assert emit in result["outputs"]
    assert all(check["passed"] for check in result["diagnostics"])


def test_network_dipoles_and_kernel_on_path(capsys, path_file):
    _, result = run(capsys, "network", "--graph", str(path_file), "--base", "0", "--emit", "dipoles")
    npt.assert_allclose(list(result["outputs"]["dipoles"]["2"].values()), [0, 1, 2, 2], atol=1e-12)
    _, result = run(capsys, "network", "--graph", str(path_file), "--base", "0", "--emit", "kernel")
    kernel = result["outputs"]["kernel"]
    assert kernel["vertices"] == ["1", "2", "3"]
    npt.assert_allclose(kernel["matrix"], [[1, 1, 1], [1, 2, 2], [1, 2, 3]], atol=1e-12)


def test_network_errors(capsys, tmp_path, triangle_file):
    assert main(["network", "--graph", str(triangle_file), "--base", "z", "--emit", "kernel"]) == EXIT_USAGE
    assert main(["network", "--graph", str(triangle_file), "--base", "a", "--emit", "nothing"]) == EXIT_USAGE
    capsys.readouterr()

    disconnected = tmp_path / "split.txt"
    disconnected.write_text("a b 1\nc d 1\n", encoding="utf-8")
    code, result = run(capsys, "network", "--graph", str(disconnected), "--base", "a", "--emit", "kernel")
    assert code == EXIT_FAILURE
    assert result["error"]["code"] == "Disconnected"

    broken = tmp_path / "broken.txt"
    broken.write_text("a b 1\nb c\n", encoding="utf-8")
    code, result = run(capsys, "network", "--graph", str(broken), "--base", "a", "--emit", "kernel")
    assert code == EXIT_FAILURE
    assert result["error"]["code"] == "ParseError"
    assert "line 2" in result["error"]["message"]

    code, result = run(
        capsys, "network", "--graph", str(tmp_path / "missing.txt"), "--base", "a", "--emit", "kernel"
    )
    assert code == EXIT_FAILURE
    assert result["error"]["code"] == "IOError"


@pytest.mark.parametrize(
    "argv",
    [
        ["network", "--base", "a", "--emit", "kernel", "--graph"],
        ["membership", "--base", "a", "--target", "b", "--kernel"],
    ],
)
def test_edge_list_must_be_utf8(capsys, tmp_path, argv):
    garbled = tmp_path / "garbled.txt"
    garbled.write_bytes(b"a b 1\n\xff\xfe c 1\n")
    code, result = run(capsys, *argv, str(garbled))
    assert code == EXIT_FAILURE
    assert result["error"]["code"] == "ParseError"
    assert "line 2" in result["error"]["message"]


def test_bridge_sample(capsys, tmp_path):
    out = tmp_path / "paths.csv"
    argv = ["bridge-sample", "--grid", "[0.1, 0.3, 0.5, 0.7, 0.9]", "--paths", "10000", "--seed", "42"]
    code, result = run(capsys, *argv, "--out", str(out))
    assert code == EXIT_OK
    outputs = result["outputs"]
    assert outputs["paths"] == 10000
    assert outputs["csv"] == str(out)
    assert outputs["max_z"] <= 4.0
    assert all(check["passed"] for check in result["diagnostics"])
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "0.1,0.3,0.5,0.7,0.9"
    assert len(lines) == 10001

    again = tmp_path / "again.csv"
    _, repeat = run(capsys, *argv, "--out", str(again))
    assert again.read_bytes() == out.read_bytes()
    assert repeat["inputs_digest"] == result["inputs_digest"]


def test_bridge_sample_single_path(capsys, tmp_path):
    code, result = run(
        capsys, "bridge-sample", "--grid", "[0.5]", "--paths", "1", "--out", str(tmp_path / "one.csv")
    )
    assert code == EXIT_OK
    assert result["outputs"]["seed"] == 0
    assert result["diagnostics"] == []


def test_bridge_sample_errors(capsys, tmp_path):
    out = str(tmp_path / "paths.csv")
    assert main(["bridge-sample", "--grid", "[0.5]", "--paths", "0", "--out", out]) == EXIT_USAGE
    assert main(["bridge-sample", "--grid", "[0.5, 0.2]", "--paths", "5", "--out", out]) == EXIT_USAGE
    assert main(["bridge-sample", "--grid", "[1.5]", "--paths", "5", "--out", out]) == EXIT_USAGE
    capsys.readouterr()
    code, result = run(
        capsys,
        "bridge-sample",
        "--grid",
        "[0.5]",
        "--paths",
        "5",
        "--out",
        str(tmp_path / "missing" / "paths.csv"),
    )
    assert code == EXIT_FAILURE
    assert result["error"]["code"] == "IOError"


def test_heat_green(capsys):
    code, result = run(
        capsys, "heat", "--laplacian", "[[2, -1], [-1, 1]]", "--times", "[0, 0.5]", "--check", "green"
    )
    assert code == EXIT_OK
    outputs = result["outputs"]
    assert outputs["heat_kernels"][0]["matrix"] == [[1.0, 0.0], [0.0, 1.0]]
    npt.assert_allclose(outputs["green"], [[1, 1], [1, 2]], atol=1e-12)
    assert result["diagnostics"][0]["check_name"] == "green_quadrature"
    assert result["diagnostics"][0]["passed"]


def test_heat_semigroup(capsys, tmp_path):
    matrix = tmp_path / "laplacian.json"
    matrix.write_text("[[2, -1, 0], [-1, 2, -1], [0, -1, 1]]", encoding="utf-8")
    code, result = run(
        capsys, "heat", "--laplacian", str(matrix), "--times", "[0.1, 0.4, 2]", "--check", "semigroup"
    )
    assert code == EXIT_OK
    assert len(result["outputs"]["heat_kernels"]) == 3
    assert result["diagnostics"][0]["check_name"] == "semigroup_defect"
    assert result["diagnostics"][0]["passed"]


@pytest.mark.parametrize(
    ("laplacian", "code_name"),
    [
        ("[[1, -1], [-1, 1]]", "NotInvertible"),
        ("[[1, 0.5], [0, 1]]", "NotSymmetric"),
        ("[[1, 2], [2, 1]]", "NotPositive"),
    ],
)
def test_heat_errors(capsys, laplacian, code_name):
    code, result = run(capsys, "heat", "--laplacian", laplacian, "--times", "[1]", "--check", "green")
    assert code == EXIT_FAILURE
    assert result["error"]["code"] == code_name


def test_heat_usage_errors(capsys):
    assert main(["heat", "--laplacian", "[[1, 0]]", "--times", "[1]"]) == EXIT_USAGE
    assert main(["heat", "--laplacian", "[[1]]", "--times", "[]"]) == EXIT_USAGE
    assert main(["heat", "--laplacian", "[[1]]", "--times", "[1]", "--check", "energy"]) == EXIT_USAGE
