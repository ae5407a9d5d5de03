"""Pointwise reductions of the elasticity system."""

import numpy as np
import pytest

from lamerecon.errors import ContractViolation, GridMismatchError
from lamerecon.models import Grid, GridField, LameParameters, Variant
from lamerecon.tools import elasticity_residual, identity_residual, reduce_lambda, reduce_mu
from lamerecon.tools.reduction import reduce_fields

from conftest import vector_field


def test_bundle_layout(grid33):
    u = vector_field(grid33, lambda x, y: x * y, lambda x, y: y ** 2)
    mu_bundle = reduce_mu(u)
    assert mu_bundle.variant is Variant.MU
    assert mu_bundle.count == 1
    assert mu_bundle.source_labels == ["u0"]
    sharp = mu_bundle.sharp[0].values
    # d = 3y: ∇d = (0, 3), then d repeated
    assert np.allclose(sharp[..., :2], [0.0, 3.0])
    assert np.allclose(sharp[..., 2], sharp[..., 3])
    lam_bundle = reduce_lambda([u, u], ["a", "b"])
    assert lam_bundle.count == 2
    assert np.allclose(lam_bundle.sharp[1].values[..., 0], 3 * grid33.coordinates()[1])
    assert np.allclose(lam_bundle.star[0].values, (u.values.sum(axis=-1)))


def test_identity_on_quadratic_field_2d(grid33, smooth_params):
    x, y = grid33.coordinates()
    u = vector_field(grid33, lambda x, y: x ** 2, lambda x, y: x * y)
    expected = 13.5 + 7 * x + 3 * y + x ** 2 + x * y
    for variant in (Variant.MU, Variant.LAMBDA):
        bundle = reduce_fields(u, variant)
        residual = identity_residual(bundle, smooth_params, k=1.0)
        assert np.allclose(residual.values, expected, atol=1e-8)


def test_identity_on_quadratic_field_3d():
    grid = Grid.unit(3, 9)
    params = LameParameters.constant(grid, 2.0, 1.5)
    x, y, z = grid.coordinates()
    u = vector_field(grid, lambda x, y, z: x * y, lambda x, y, z: y ** 2, lambda x, y, z: x * z)
    expected = 17.0 + x * y + y ** 2 + x * z
    for variant in (Variant.MU, Variant.LAMBDA):
        residual = identity_residual(reduce_fields(u, variant), params, k=1.0)
        assert np.allclose(residual.values, expected, atol=1e-8)


def test_identity_matches_operator_on_smooth_field(grid33, smooth_params):
    u = vector_field(grid33, lambda x, y: np.sin(2 * x) * np.cos(y), lambda x, y: np.exp(x - y))
    summed = elasticity_residual(u, smooth_params, 1.5).values.sum(axis=-1)
    interior = ~grid33.boundary_flags()
    for variant in (Variant.MU, Variant.LAMBDA):
        residual = identity_residual(reduce_fields(u, variant), smooth_params, k=1.5).values
        assert np.allclose(residual[interior], summed[interior], atol=1e-8)


def test_identity_vanishes_on_forward_solutions(smooth_solutions):
    params, fields = smooth_solutions
    interior = ~params.grid.boundary_flags()
    for bundle in (reduce_mu(fields), reduce_lambda(fields)):
        for j in range(bundle.count):
            residual = identity_residual(bundle, params, k=1.0, index=j).values
            assert np.abs(residual[interior]).max() < 1e-7


def test_complex_fields_rejected(grid33):
    u = GridField(grid=grid33, values=np.ones(grid33.shape + (2,)) * 1j)
    with pytest.raises(ContractViolation):
        reduce_mu(u)
    with pytest.raises(ContractViolation):
        reduce_mu([])


def test_mixed_grids_rejected(grid33):
    other = Grid.unit(2, 17)
    with pytest.raises(GridMismatchError):
        reduce_lambda([GridField.zeros(grid33, (2,)), GridField.zeros(other, (2,))])


@pytest.mark.slow
def test_identity_vanishes_on_3d_forward_solutions():
    from lamerecon.phantoms import boundary_family
    from lamerecon.tools import ForwardSolver

    grid = Grid.unit(3, 25)
    params = LameParameters(lam=GridField.from_function(grid, lambda x, y, z: 2.0 + x),
                            mu=GridField.from_function(grid, lambda x, y, z: 1.5 + 0.5 * y * z))
    solver = ForwardSolver()
    results = solver.solve_many(params, 1.0, boundary_family("polynomial", grid, 2))
    for result in results:
        assert solver.report(result, params, 1.0).residual_sup < 1e-8
    fields = [r.displacement for r in results]
    interior = ~grid.boundary_flags()
    for bundle in (reduce_mu(fields), reduce_lambda(fields)):
        for j in range(bundle.count):
            residual = identity_residual(bundle, params, k=1.0, index=j).values
            assert np.abs(residual[interior]).max() < 1e-7
