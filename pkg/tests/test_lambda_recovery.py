"""Algebraic λ recovery and harmonic inpainting."""

import numpy as np
import pytest

from lamerecon.errors import ContractViolation, PositivityError
from lamerecon.models import GridField, Mask
from lamerecon.tools import compute_kappa_sigma, recover_lambda
from lamerecon.tools.lambda_recovery import harmonic_inpaint, lambda_with_inpainting


def _synthetic(grid, lam, mu, k, targets=1, seed=0):
    """Random v's with r* chosen so that κλ = σμ − k²r* holds exactly."""
    rng = np.random.default_rng(seed)
    vs, rs = [], []
    for _ in range(targets):
        v = rng.uniform(0.5, 1.5, size=grid.shape + (4,))
        kappa = v[..., :2].sum(axis=-1)
        sigma = -v.sum(axis=-1)
        vs.append(GridField(grid=grid, values=v))
        rs.append(GridField(grid=grid, values=(sigma * mu - kappa * lam) / (k * k)))
    return vs, rs


def test_exact_recovery_single_target(grid33):
    x, y = grid33.coordinates()
    lam, mu = 2.0 + x * y, 1.5 + 0.5 * y
    vs, rs = _synthetic(grid33, lam, mu, k=1.0)
    ks = compute_kappa_sigma(vs[0], rs[0], dim=2)
    result = recover_lambda(ks, GridField(grid=grid33, values=mu), k=1.0)
    assert result.recovered.count == grid33.n_points
    assert np.allclose(result.lam.values, lam, rtol=1e-12)
    assert result.negative.count == 0
    assert result.extrapolated.count == 0


def test_exact_recovery_least_squares_over_targets(grid33):
    x, _ = grid33.coordinates()
    lam, mu = 3.0 - x, np.full(grid33.shape, 2.0)
    vs, rs = _synthetic(grid33, lam, mu, k=2.0, targets=3, seed=4)
    ks = compute_kappa_sigma(vs, rs, dim=2)
    result = recover_lambda(ks, GridField(grid=grid33, values=mu), k=2.0)
    assert np.allclose(result.lam.values, lam, rtol=1e-10)


def test_small_kappa_is_masked(grid33):
    lam, mu = np.full(grid33.shape, 2.0), np.full(grid33.shape, 1.0)
    vs, rs = _synthetic(grid33, lam, mu, k=1.0)
    v = np.array(vs[0].values)
    v[5, 7, 0] = -v[5, 7, 1]
    ks = compute_kappa_sigma(GridField(grid=grid33, values=v), rs[0], dim=2)
    assert not ks.mask.flags[5, 7]
    assert ks.mask.count == grid33.n_points - 1
    result = recover_lambda(ks, GridField(grid=grid33, values=mu), k=1.0)
    assert result.lam.values[5, 7] == 0.0


def test_negative_lambda_flagged(grid33):
    lam, mu = np.full(grid33.shape, -0.5), np.full(grid33.shape, 1.0)
    vs, rs = _synthetic(grid33, lam, mu, k=1.0)
    result = recover_lambda(compute_kappa_sigma(vs, rs, dim=2),
                            GridField(grid=grid33, values=mu), k=1.0)
    assert result.negative.count == grid33.n_points


def test_nonpositive_mu_rejected(grid33):
    lam, mu = np.full(grid33.shape, 1.0), np.full(grid33.shape, 1.0)
    vs, rs = _synthetic(grid33, lam, mu, k=1.0)
    ks = compute_kappa_sigma(vs, rs, dim=2)
    with pytest.raises(PositivityError):
        recover_lambda(ks, GridField(grid=grid33, values=-mu), k=1.0)


def test_mismatched_inputs(grid33):
    vs, rs = _synthetic(grid33, np.ones(grid33.shape), np.ones(grid33.shape), k=1.0)
    with pytest.raises(ContractViolation):
        compute_kappa_sigma(vs, rs + rs, dim=2)
    with pytest.raises(ContractViolation):
        compute_kappa_sigma(vs, rs, dim=3)


def test_harmonic_inpaint_reproduces_linear_field(grid33):
    x, y = grid33.coordinates()
    truth = 1.0 + 2.0 * x - y
    flags = np.ones(grid33.shape, dtype=bool)
    flags[10:20, 12:25] = False
    flags[3:6, 3:6] = False
    field = GridField(grid=grid33, values=np.where(flags, truth, 0.0))
    filled, extrapolated = harmonic_inpaint(field, Mask(grid=grid33, flags=flags))
    assert extrapolated.count == 10 * 13 + 9
    assert np.allclose(filled.values, truth, atol=1e-10)


def test_inpainting_keeps_recovered_mask(grid33):
    lam, mu = np.full(grid33.shape, 2.0), np.full(grid33.shape, 1.0)
    vs, rs = _synthetic(grid33, lam, mu, k=1.0)
    ks = compute_kappa_sigma(vs, rs, dim=2)
    flags = np.array(ks.mask.flags)
    flags[14:18, 14:18] = False
    ks = ks.model_copy(update={"mask": Mask(grid=grid33, flags=flags)})
    result = lambda_with_inpainting(recover_lambda(ks, GridField(grid=grid33, values=mu), k=1.0))
    assert result.extrapolated.count == 16
    assert result.recovered.count == grid33.n_points - 16
    assert np.allclose(result.lam.values, 2.0)


def test_raising_kappa_threshold_never_enlarges_mask(smooth_solutions):
    from lamerecon.tools import Eliminator, reduce_lambda
    from lamerecon.tools.lambda_recovery import kappa_sigma_from

    _, fields = smooth_solutions
    _, combined = Eliminator().eliminate(reduce_lambda(fields))
    previous = None
    for kappa_rel in (1e-4, 1e-3, 1e-2, 1e-1, 0.5):
        mask = kappa_sigma_from(combined, dim=2, kappa_rel=kappa_rel).mask
        if previous is not None:
            assert not np.any(mask.flags & ~previous.flags)
            assert mask.count <= previous.count
        previous = mask
