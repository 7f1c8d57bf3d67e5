import numpy as np
import pytest

from twistcart.errors import (BallOutOfRange, GridTooSmall, InputError,
                              NotPositiveAtCenter)
from twistcart.elliptic import (AlmostComplexField, ChartGrid,
                                ScalarPairField, constant_j_field,
                                elliptic_coefficients, max_principle_check,
                                operator_residual, positive_definite_region,
                                rc_residual, read_grid_file, sample_pair,
                                square_grid, standard_j, write_grid_file)


def center_of(grid):
    return tuple(s // 2 for s in grid.shape)


def test_grid_validation():
    with pytest.raises(GridTooSmall):
        ChartGrid(2, 0.1, (4, 9), (0.0, 0.0))
    with pytest.raises(InputError):
        ChartGrid(2, -0.1, (9, 9), (0.0, 0.0))


def test_coefficients_standard_structure():
    for n in (1, 2):
        shape = tuple([9] * (2 * n))
        grid = ChartGrid(2 * n, 0.25, shape, tuple([-1.0] * (2 * n)))
        co = elliptic_coefficients(constant_j_field(grid))
        assert float(np.max(np.abs(co["a"] - 2.0 * np.eye(2 * n)))) <= 1e-12
        assert float(np.max(np.abs(co["b"]))) <= 1e-12


def smooth_j_field(grid):
    """Pointwise J with J^2 = -1, nonconstant: trace 0, determinant 1."""
    xs, ys = grid.coordinates()
    a = 0.3 * np.sin(xs + 0.5 * ys)
    b = 1.0 + 0.2 * np.cos(ys)
    c = -(1.0 + a * a) / b
    j = np.empty((*grid.shape, 2, 2))
    j[..., 0, 0] = a
    j[..., 0, 1] = b
    j[..., 1, 0] = c
    j[..., 1, 1] = -a
    return AlmostComplexField(grid, j)


def test_coefficient_symmetry_everywhere():
    grid = square_grid(1.0 / 16, 0.5)
    co = elliptic_coefficients(smooth_j_field(grid))
    a = co["a"]
    assert float(np.max(np.abs(a - np.swapaxes(a, -1, -2)))) <= 1e-12


def test_rc_residual_cases():
    grid = square_grid(1.0 / 64, 0.5)
    jf = constant_j_field(grid)
    # exact holomorphic quadratic: differences are exact for quadratics
    assert rc_residual(jf, sample_pair("z2", grid))["max_residual"] <= \
        10.0 * (1.0 / 64) ** 2
    assert abs(rc_residual(jf, sample_pair("linear-x", grid))["max_residual"]
               - 1.0) <= 1e-12
    xs, _ = grid.coordinates()
    const = ScalarPairField(grid, 0 * xs + 3.0, 0 * xs - 2.0)
    assert rc_residual(jf, const)["max_residual"] == 0.0


def test_second_order_convergence():
    for name in ("z2", "z3", "expz"):
        rc_vals = []
        op_vals = []
        for h in (1.0 / 32, 1.0 / 64, 1.0 / 128):
            grid = square_grid(h, 0.5)
            jf = constant_j_field(grid)
            fg = sample_pair(name, grid)
            rc_vals.append(rc_residual(jf, fg)["max_residual"])
            op_vals.append(operator_residual(jf, fg, center_of(grid),
                                             int(0.35 / h)))
        for vals in (rc_vals, op_vals):
            for a, b in zip(vals, vals[1:]):
                assert b <= 1e-12 or a / b >= 3.5


def test_operator_residual_examples():
    grid = square_grid(1.0 / 64, 0.5)
    jf = constant_j_field(grid)
    xs, ys = grid.coordinates()
    x2 = ScalarPairField(grid, xs * xs, 0 * xs)
    assert abs(operator_residual(jf, x2, center_of(grid), 20) - 4.0) <= 1e-9
    const = ScalarPairField(grid, 0 * xs + 1.0, 0 * xs)
    assert operator_residual(jf, const, center_of(grid), 20) == 0.0


def test_max_principle_cases():
    grid = square_grid(1.0 / 64, 0.5)
    radius = 28
    for name, expected in (("z2", True), ("z3", True), ("expz", True),
                           ("bump", False)):
        fg = sample_pair(name, grid)
        rep = max_principle_check(fg.f, grid, center_of(grid), radius)
        assert rep["pass"] == expected, name
    with pytest.raises(BallOutOfRange):
        max_principle_check(fg.f, grid, center_of(grid), 10 ** 6)


def test_positive_definite_region():
    grid = square_grid(1.0 / 16, 0.5)
    co = elliptic_coefficients(constant_j_field(grid))
    rep = positive_definite_region(co["a"], grid, center_of(grid))
    assert rep["limited_by"] == "grid"
    # perturbed coefficient field loses definiteness away from the center
    xs, ys = grid.coordinates()
    dist2 = xs * xs + ys * ys
    a = np.broadcast_to(2.0 * np.eye(2), (*grid.shape, 2, 2)).copy()
    a[..., 1, 1] = 2.0 - 40.0 * dist2
    rep = positive_definite_region(a, grid, center_of(grid))
    assert rep["limited_by"] == "definiteness"
    # radius below the first failing shell: 2 - 40 (r h)^2 <= 0 at r h ~ 0.22
    assert rep["radius"] < 0.23 / grid.h
    bad = a.copy()
    bad[center_of(grid)] = -np.eye(2)
    with pytest.raises(NotPositiveAtCenter):
        positive_definite_region(bad, grid, center_of(grid))


def test_region_monotone_under_shrinking():
    radii = []
    for extent in (0.5, 0.25):
        grid = square_grid(1.0 / 16, extent)
        co = elliptic_coefficients(constant_j_field(grid))
        radii.append(positive_definite_region(
            co["a"], grid, center_of(grid))["radius"])
    assert radii[1] <= radii[0]


def test_grid_file_round_trip(tmp_path):
    grid = square_grid(1.0 / 8, 0.5)
    jf = constant_j_field(grid)
    fg = sample_pair("z2", grid)
    path = tmp_path / "sample.grid"
    write_grid_file(path, grid, {"J": jf.j, "f": fg.f, "g": fg.g})
    grid2, fields = read_grid_file(path)
    assert grid2 == grid
    assert np.array_equal(fields["J"], jf.j)
    assert np.array_equal(fields["f"], fg.f)
    assert np.array_equal(fields["g"], fg.g)


def test_standard_j_makes_holomorphic_pairs_pseudoholomorphic():
    # the defining property of the shipped constant structure
    grid = square_grid(1.0 / 128, 0.25)
    jf = constant_j_field(grid)
    res = rc_residual(jf, sample_pair("expz", grid))
    assert res["max_residual"] <= 10.0 * (1.0 / 128) ** 2
    m = standard_j(1)
    assert np.array_equal(m @ m, -np.eye(2))
