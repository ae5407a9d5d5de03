"""Phantom, boundary-family and recipe registries."""

import numpy as np
import pytest

from lamerecon.errors import ContractViolation, PositivityError
from lamerecon.models import Grid, LameParameters
from lamerecon.phantoms import (
    AMPLITUDE_RECIPES, BOUNDARY_FAMILIES, PHANTOMS, boundary_family, lame_phantom, make_phantom
)


def test_registry_names():
    assert set(PHANTOMS) == {"constant", "linear", "sinusoid", "bump"}
    assert set(BOUNDARY_FAMILIES) == {"polynomial", "plane_wave", "linear"}


def test_phantom_profiles(grid33):
    x, y = grid33.coordinates()
    assert np.allclose(make_phantom("constant", grid33, 2.0, 5.0).values, 2.0)
    assert np.allclose(make_phantom("linear", grid33, 1.0, 0.5).values, 1.0 + 0.5 * x)
    sinusoid = make_phantom("sinusoid", grid33, 2.0, 0.5).values
    assert sinusoid[0, 0] == pytest.approx(2.5)
    assert sinusoid[16, 0] == pytest.approx(2.0)
    bump = make_phantom("bump", grid33, 1.5, 0.3).values
    assert bump[16, 16] == pytest.approx(1.8)
    assert bump.argmax() == np.ravel_multi_index((16, 16), grid33.shape)


def test_unknown_phantom(grid33):
    with pytest.raises(ContractViolation):
        make_phantom("checkerboard", grid33, 1.0)


def test_lame_phantom_positivity(grid33):
    params = lame_phantom(grid33, "sinusoid", 2.0, 0.5, "bump", 1.5, 0.3)
    assert params.within_bounds()
    with pytest.raises(PositivityError):
        lame_phantom(grid33, "sinusoid", 0.2, 0.5, "constant", 1.0, 0.0)


def test_lame_phantom_bounds_are_enforced(grid33):
    params = lame_phantom(grid33, "sinusoid", 2.0, 0.5, "bump", 1.5, 0.3, bounds=(1.0, 3.0))
    assert params.bounds == (1.0, 3.0)
    with pytest.raises(PositivityError, match="lambda outside bounds"):
        lame_phantom(grid33, "sinusoid", 2.0, 0.5, "bump", 1.5, 0.3, bounds=(1.0, 2.2))
    with pytest.raises(PositivityError, match="mu outside bounds"):
        lame_phantom(grid33, "constant", 2.0, 0.0, "constant", 0.5, 0.0, bounds=(1.0, 3.0))
    with pytest.raises(ValueError):
        lame_phantom(grid33, "constant", 2.0, 0.0, "constant", 1.5, 0.0, bounds=(3.0, 1.0))


def test_bounds_skip_lambda_when_only_mu_is_checked(grid33):
    params = LameParameters.constant(grid33, 10.0, 1.5).model_copy(update={"bounds": (1.0, 5.0)})
    assert params.check_positive(lam_too=False) is params
    assert not params.within_bounds()
    with pytest.raises(PositivityError):
        params.check_positive()


@pytest.mark.parametrize("name", ["polynomial", "plane_wave", "linear"])
def test_family_shapes_and_labels(grid33, name):
    traces = boundary_family(name, grid33, 4)
    assert len(traces) == 4
    assert traces[2].label == f"{name}2"
    assert traces[0].values.shape == (len(grid33.boundary_indices()), 2)
    assert not np.allclose(traces[0].values, traces[1].values)


def test_polynomial_family_is_reproducible(grid33):
    a = boundary_family("polynomial", grid33, 3)
    b = boundary_family("polynomial", grid33, 3)
    assert all(np.array_equal(s.values, t.values) for s, t in zip(a, b))


def test_family_limits():
    grid = Grid.unit(2, 9)
    assert len(boundary_family("linear", grid, 6)) == 6
    with pytest.raises(ContractViolation):
        boundary_family("linear", grid, 7)
    with pytest.raises(ContractViolation):
        boundary_family("spiral", grid, 2)
    with pytest.raises(ContractViolation):
        boundary_family("polynomial", grid, 0)


def test_recipe_pins():
    theta = np.array([1.0, 1j])
    u0 = AMPLITUDE_RECIPES["u0"].pin(theta)
    assert np.allclose(u0, [0.5, -0.5j, 1.0])
    assert u0[:2] @ theta == pytest.approx(1.0)
    u1 = AMPLITUDE_RECIPES["u1"].pin(theta)
    assert u1[:2] @ theta == pytest.approx(0.0)
    assert AMPLITUDE_RECIPES["u2"].rotated
