import math

import numpy as np
import pytest

from fibernls.field import (ComplexField, GridError, dtt_norm, edge_level, is_edge_decaying,
                            l2_norm, make_gaussian, make_grid, mass, read_field_csv,
                            spectral_derivative, sup_norm, weighted_norm_t2, weighted_norm_t_ut,
                            write_field_csv, zeros)

SQRT_PI = math.sqrt(math.pi)


def test_grid_basics():
    g = make_grid(-20.0, 20.0, 1024)
    assert g.dt == pytest.approx(40.0 / 1024)
    assert g.t[0] == -20.0 and g.t[-1] < 20.0
    assert g.wavenumbers[1] == pytest.approx(2 * math.pi / 40.0)
    assert g.k_max == pytest.approx(math.pi / g.dt)
    assert g.same_as(make_grid(-20.0, 20.0, 1024))
    assert not g.same_as(make_grid(-20.0, 20.0, 512))


@pytest.mark.parametrize("args", [(1.0, -1.0, 16), (0.0, 1.0, 1), (0.0, 1.0, 100), (0.0, math.inf, 16)])
def test_grid_rejects_bad_input(args):
    with pytest.raises(GridError):
        make_grid(*args)


def test_grid_arrays_are_read_only():
    g = make_grid(-1.0, 1.0, 16)
    with pytest.raises(ValueError):
        g.t[0] = 3.0


def test_field_validates_shape_and_finiteness(grid1024):
    with pytest.raises(ValueError):
        ComplexField(grid1024, np.zeros(10, complex))
    bad = np.zeros(grid1024.n, complex)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        ComplexField(grid1024, bad)


def test_gaussian_l2_norm(grid2048):
    # int exp(-t^2) dt = sqrt(pi)
    u = make_gaussian(grid2048, 1.0, 1.0)
    assert abs(l2_norm(u) - math.pi**0.25) < 1e-8
    assert mass(u) == pytest.approx(SQRT_PI, abs=1e-12)
    assert sup_norm(u) == pytest.approx(1.0)


def test_gaussian_moments(grid2048):
    # int t^4 exp(-t^2) dt = (3/4) sqrt(pi); |t u_t| = t^2 u for this profile
    u = make_gaussian(grid2048, 1.0, 1.0)
    expected = math.sqrt(0.75 * SQRT_PI)
    assert abs(weighted_norm_t2(u) - expected) < 1e-7
    assert abs(weighted_norm_t_ut(u) - expected) < 1e-7


def test_spectral_derivative_of_gaussian(grid2048):
    u = make_gaussian(grid2048, 1.0, 1.0)
    du = spectral_derivative(u, 1).values
    t = grid2048.t
    assert np.max(np.abs(du - (-t * np.exp(-t**2 / 2)))) < 1e-8
    d2 = spectral_derivative(u, 2).values
    assert np.max(np.abs(d2 - (t**2 - 1) * np.exp(-t**2 / 2))) < 1e-8


def test_dtt_norm_matches_closed_form(grid2048):
    # int (t^2-1)^2 exp(-t^2) dt = (3/4 - 1 + 1) sqrt(pi)
    u = make_gaussian(grid2048, 1.0, 1.0)
    assert dtt_norm(u) == pytest.approx(math.sqrt(0.75 * SQRT_PI), abs=1e-9)


def test_gaussian_rejects_nonpositive_width(grid1024):
    with pytest.raises(ValueError, match="width"):
        make_gaussian(grid1024, 1.0, 0.0)


def test_zero_field_norms(grid1024):
    z = zeros(grid1024)
    assert l2_norm(z) == 0.0 and weighted_norm_t2(z) == 0.0 and weighted_norm_t_ut(z) == 0.0
    assert is_edge_decaying(z)


def test_edge_detection(grid1024):
    narrow = make_gaussian(grid1024, 1.0, 1.0)
    wide = make_gaussian(grid1024, 1.0, 8.0)
    assert is_edge_decaying(narrow)
    assert not is_edge_decaying(wide, 1e-8, relative=True)
    assert edge_level(wide) > 1e-3


def test_csv_round_trip(tmp_path, grid1024):
    u = make_gaussian(grid1024, 0.3, 2.0).with_values(
        make_gaussian(grid1024, 0.3, 2.0).values * np.exp(0.4j * grid1024.t))
    path = tmp_path / "u.csv"
    write_field_csv(u, path)
    assert path.read_text().splitlines()[0] == "t,re,im"
    back = read_field_csv(path)
    assert back.grid.n == grid1024.n
    np.testing.assert_array_equal(back.values, u.values)


def test_subtraction_requires_same_grid(grid1024):
    other = make_grid(-10.0, 10.0, 1024)
    with pytest.raises(ValueError):
        make_gaussian(grid1024, 1, 1) - make_gaussian(other, 1, 1)
