"""Grid containers and finite-difference calculus."""

import numpy as np
import pytest

from lamerecon.errors import ContractViolation, GridMismatchError
from lamerecon.models import Grid, GridField, Mask, Rank, check_same_grid
from lamerecon.tools.calculus import (
    c2_norm, divergence, gradient, hessians, jacobian, second_derivatives, sym_grad
)

from conftest import vector_field


class TestGrid:
    def test_unit_grid_geometry(self):
        grid = Grid.unit(2, 5)
        assert grid.shape == (5, 5)
        assert grid.spacing == (0.25, 0.25)
        assert np.allclose(grid.axis(0), [0, 0.25, 0.5, 0.75, 1.0])
        assert len(grid.boundary_indices()) == 16
        assert len(grid.interior_indices()) == 9

    def test_nearest_index_snaps_and_clips(self):
        grid = Grid.unit(2, 5)
        assert grid.nearest_index((0.49, 0.26)) == (2, 1)
        assert grid.nearest_index((1.7, -3.0)) == (4, 0)
        with pytest.raises(ContractViolation):
            grid.nearest_index((0.5,))

    def test_small_grid_rejected(self):
        with pytest.raises(ValueError):
            Grid.unit(2, 4)

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            check_same_grid(Grid.unit(2, 9), Grid.unit(2, 11))

    def test_field_shape_is_checked(self):
        grid = Grid.unit(2, 9)
        with pytest.raises(ValueError):
            GridField(grid=grid, values=np.zeros((9, 8)))
        with pytest.raises(ValueError):
            GridField(grid=grid, values=np.full((9, 9), np.nan))

    def test_field_is_read_only_copy(self):
        grid = Grid.unit(2, 9)
        raw = np.ones((9, 9))
        field = GridField(grid=grid, values=raw)
        raw[0, 0] = 5.0
        assert field.values[0, 0] == 1.0
        with pytest.raises(ValueError):
            field.values[0, 0] = 2.0

    def test_ranks(self):
        grid = Grid.unit(3, 5)
        assert GridField.zeros(grid).rank is Rank.SCALAR
        assert GridField.zeros(grid, (3,)).rank is Rank.VECTOR
        assert GridField.zeros(grid, (4, 4)).rank is Rank.MATRIX
        with pytest.raises(ContractViolation):
            GridField.zeros(grid, (3,)).require(Rank.VECTOR, 6)

    def test_mask_fractions(self):
        grid = Grid.unit(2, 5)
        mask = Mask.interior(grid)
        assert mask.count == 9
        assert mask.interior_fraction == 1.0
        assert (mask & ~mask).count == 0
        assert (mask | ~mask).count == 25


class TestCalculus:
    def test_gradient_exact_on_quadratics(self, grid33):
        f = GridField.from_function(grid33, lambda x, y: x ** 2 + 3 * x * y - y)
        g = gradient(f).values
        x, y = grid33.coordinates()
        assert np.allclose(g[..., 0], 2 * x + 3 * y, atol=1e-10)
        assert np.allclose(g[..., 1], 3 * x - 1, atol=1e-10)

    def test_hessian_exact_on_quadratics(self, grid33):
        f = GridField.from_function(grid33, lambda x, y: x ** 2 + 3 * x * y - y ** 2)
        h = second_derivatives(f).values
        assert np.allclose(h, np.array([[2.0, 3.0], [3.0, -2.0]]), atol=1e-8)

    def test_diagonal_second_derivative_exact_on_cubics(self, grid33):
        x, y = grid33.coordinates()
        h = hessians(x ** 3 - 2 * y ** 3, grid33.spacing)
        assert np.allclose(h[..., 0, 0], 6 * x, atol=1e-8)
        assert np.allclose(h[..., 1, 1], -12 * y, atol=1e-8)

    def test_second_order_convergence_on_sine(self):
        errors = []
        for n in (17, 33, 65):
            grid = Grid.unit(2, n)
            f = GridField.from_function(grid, lambda x, y: np.sin(2 * x) * np.cos(y))
            x, y = grid.coordinates()
            err = np.abs(gradient(f).values[..., 0] - 2 * np.cos(2 * x) * np.cos(y)).max()
            errors.append(err)
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(orders > 1.8)

    def test_divergence_jacobian_and_sym_grad(self, grid33):
        u = vector_field(grid33, lambda x, y: 2 * x + y, lambda x, y: 3 * x - y)
        assert np.allclose(divergence(u).values, 1.0)
        jac = jacobian(u).values
        assert np.allclose(jac, np.array([[2.0, 1.0], [3.0, -1.0]]))
        assert np.allclose(sym_grad(u).values, np.array([[2.0, 2.0], [2.0, -1.0]]))

    def test_c2_norm(self, grid33):
        assert c2_norm(GridField.from_function(grid33, lambda x, y: np.ones_like(x))) == pytest.approx(1.0)
        assert c2_norm(GridField.from_function(grid33, lambda x, y: x)) == pytest.approx(2.0)

    def test_gradient_and_hessian_are_linear(self, grid33):
        f = GridField.from_function(grid33, lambda x, y: np.sin(3 * x) * np.exp(y))
        g = GridField.from_function(grid33, lambda x, y: np.cos(x * y) + y ** 4)
        combined = GridField(grid=grid33, values=2.5 * f.values - 0.75 * g.values)
        assert np.allclose(gradient(combined).values,
                           2.5 * gradient(f).values - 0.75 * gradient(g).values, atol=1e-10)
        assert np.allclose(second_derivatives(combined).values,
                           2.5 * second_derivatives(f).values - 0.75 * second_derivatives(g).values,
                           atol=1e-8)

    @pytest.mark.parametrize("axis", [0, 1])
    def test_mirrored_field_gives_mirrored_derivatives(self, grid33, axis):
        f = GridField.from_function(grid33, lambda x, y: np.sin(3 * x) * np.exp(y) + x * y ** 3)
        mirrored = GridField(grid=grid33, values=np.flip(f.values, axis=axis))
        sign = np.where(np.arange(2) == axis, -1.0, 1.0)

        grad = np.flip(gradient(f).values, axis=axis) * sign
        assert np.allclose(gradient(mirrored).values, grad, atol=1e-10)
        hess = np.flip(second_derivatives(f).values, axis=axis) * np.outer(sign, sign)
        assert np.allclose(second_derivatives(mirrored).values, hess, atol=1e-8)
