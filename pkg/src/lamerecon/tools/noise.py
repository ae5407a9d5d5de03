"""Smoothed pseudorandom perturbations with a prescribed discrete C² size."""

import logging
from typing import List, Sequence, Union

import numpy as np
from scipy.ndimage import gaussian_filter

from ..errors import ContractViolation
from ..models import GridField, check_same_grid
from .calculus import c2_norm

logger = logging.getLogger(__name__)


def smoothed_noise(rng: np.random.Generator, field: GridField, kernel_width: float) -> np.ndarray:
    """Gaussian-filtered white noise shaped like `field` (spatial axes only)."""
    grid = field.grid
    sigma = tuple(kernel_width / h for h in grid.spacing) + (0.0,) * len(field.component_shape)
    noise = gaussian_filter(rng.standard_normal(field.values.shape), sigma=sigma, mode="nearest")
    if field.is_complex:
        noise = noise + 1j * gaussian_filter(rng.standard_normal(field.values.shape),
                                             sigma=sigma, mode="nearest")
    return noise


def inject_noise(fields: Union[GridField, Sequence[GridField]], amplitude: float,
                 kernel_width: float, seed: int) -> List[GridField]:
    """Add noise_j with ‖noise_j‖_{C²} = amplitude·‖u_j‖_{C²} to every field.

    One generator seeded with `seed` draws the fields in order, so a fixed seed
    reproduces the perturbations bit for bit.
    """
    fields = [fields] if isinstance(fields, GridField) else list(fields)
    if amplitude < 0:
        raise ContractViolation(f"Noise amplitude must be non-negative, got {amplitude}")
    if not kernel_width > 0:
        raise ContractViolation(f"Kernel width must be positive, got {kernel_width}")
    if fields:
        check_same_grid(*[f.grid for f in fields])
    if amplitude == 0:
        return fields

    rng = np.random.default_rng(seed)
    noisy = []
    for f in fields:
        noise = f.with_values(smoothed_noise(rng, f, kernel_width))
        target = amplitude * c2_norm(f)
        size = c2_norm(noise)
        noisy.append(f.with_values(f.values + noise.values * (target / size if size > 0 else 0.0)))
    logger.info(f"Injected noise at relative C² amplitude {amplitude:g} into {len(fields)} fields "
                f"(seed {seed})")
    return noisy
