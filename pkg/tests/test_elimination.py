"""Basis selection and Θ elimination."""

import numpy as np
import pytest

from lamerecon.errors import ContractViolation, InsufficientDataError
from lamerecon.tools import Eliminator, reduce_lambda, reduce_mu
from lamerecon.tools.elimination import distinct_entries, min_targets
from lamerecon.tools.reduction import coefficient_vectors
from lamerecon.models import Variant


def test_distinct_entries():
    assert distinct_entries(Variant.MU, 2) == [0, 1, 2]
    assert distinct_entries(Variant.LAMBDA, 2) == [0, 2, 3]
    assert distinct_entries(Variant.LAMBDA, 3) == [0, 3, 4, 5]
    assert min_targets(Variant.MU, 3) == 3
    assert min_targets(Variant.LAMBDA, 3) == 1


@pytest.mark.parametrize("reduce", [reduce_mu, reduce_lambda])
def test_targets_are_annihilated(smooth_solutions, reduce):
    _, fields = smooth_solutions
    bundle = reduce(fields)
    eliminator = Eliminator()
    plan = eliminator.independence_map(bundle)
    assert plan.basis_count == 3
    assert plan.target_count == 5
    assert plan.mask.interior_fraction > 0.5
    assert not np.any(plan.mask.flags[plan.grid.boundary_flags()])
    for t in range(plan.target_count):
        theta = eliminator.solve_theta(plan, bundle, t)
        residual = eliminator.annihilation_residual(plan, bundle, theta)
        assert residual.max() <= 1e-10


def test_selection_excludes_targets(smooth_solutions):
    _, fields = smooth_solutions
    plan = Eliminator().independence_map(reduce_mu(fields))
    for p in range(0, plan.selection.shape[0], 97):
        assert not set(plan.selection[p]) & set(plan.targets[p])
        assert len(set(plan.selection[p]) | set(plan.targets[p])) == 8


def test_combined_flat_satisfies_reduced_equation(smooth_solutions):
    params, fields = smooth_solutions
    k = 1.0
    for reduce in (reduce_mu, reduce_lambda):
        bundle = reduce(fields)
        _, g_vec = coefficient_vectors(params, bundle.variant)
        plan, combined = Eliminator().eliminate(bundle)
        flags = plan.mask.flags
        for c in combined:
            lhs = np.sum(c.v.values * g_vec, axis=-1) + k * k * c.rhs_star.values
            scale = np.linalg.norm(c.v.values, axis=-1) * np.linalg.norm(g_vec, axis=-1)
            assert np.all(np.abs(lhs[flags]) <= 1e-6 * (1.0 + scale[flags]))
            assert np.all(c.v.values[~flags] == 0.0)


def test_greedy_selection_matches_enumeration_quality(smooth_solutions):
    _, fields = smooth_solutions
    bundle = reduce_lambda(fields)
    exact = Eliminator().independence_map(bundle)
    greedy = Eliminator(subset_cap=1).independence_map(bundle)
    both = exact.mask.flags.ravel() & greedy.mask.flags.ravel()
    assert np.all(greedy.sigma_rel <= exact.sigma_rel + 1e-12)
    assert both.sum() > 0.5 * exact.mask.flags.sum()


def test_max_targets_limits_combinations(smooth_solutions):
    _, fields = smooth_solutions
    plan, combined = Eliminator(max_targets=2).eliminate(reduce_mu(fields))
    assert plan.target_count == 2
    assert len(combined) == 2
    # the μ-variant never goes below dim targets
    plan = Eliminator(max_targets=1).independence_map(reduce_mu(fields))
    assert plan.target_count == 2


def test_too_few_solutions(smooth_solutions):
    _, fields = smooth_solutions
    with pytest.raises(InsufficientDataError):
        Eliminator().independence_map(reduce_mu(fields[:4]))
    with pytest.raises(InsufficientDataError):
        Eliminator().independence_map(reduce_lambda(fields[:3]))
    plan = Eliminator().independence_map(reduce_lambda(fields[:4]))
    assert plan.target_count == 1


def test_target_index_checked(smooth_solutions):
    _, fields = smooth_solutions
    bundle = reduce_lambda(fields)
    eliminator = Eliminator()
    plan = eliminator.independence_map(bundle)
    with pytest.raises(ContractViolation):
        eliminator.solve_theta(plan, bundle, plan.target_count)
    with pytest.raises(ContractViolation):
        eliminator.solve_theta(plan, reduce_mu(fields), 0)


@pytest.mark.parametrize("reduce", [reduce_mu, reduce_lambda])
def test_mask_is_invariant_under_field_scaling(smooth_solutions, reduce):
    _, fields = smooth_solutions
    factors = [4.0, 1.0, 0.5, 1.0, 2.0, 1.0, 1.0, 8.0]
    scaled = [f.with_values(c * f.values) for c, f in zip(factors, fields)]
    eliminator = Eliminator()
    plan = eliminator.independence_map(reduce(fields))
    rescaled = eliminator.independence_map(reduce(scaled))
    assert np.array_equal(rescaled.mask.flags, plan.mask.flags)
    assert np.array_equal(rescaled.selection, plan.selection)
    assert np.allclose(rescaled.sigma_rel, plan.sigma_rel, rtol=1e-12, atol=1e-14)

    uniform = eliminator.independence_map(reduce([f.with_values(4.0 * f.values) for f in fields]))
    assert np.array_equal(uniform.mask.flags, plan.mask.flags)
    assert np.allclose(uniform.sigma_min, 4.0 * plan.sigma_min, rtol=1e-12, atol=1e-14)
