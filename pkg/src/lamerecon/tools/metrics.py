"""Error summaries of recovered parameters against known phantoms."""

import logging
from typing import Optional

import numpy as np

from ..models import GridField, Mask, MetricsReport, Rank, check_same_grid

logger = logging.getLogger(__name__)


def metrics(recovered: GridField, truth: GridField, mask: Optional[Mask] = None) -> MetricsReport:
    """Sup/mean absolute and relative errors on `mask` plus per-axis mean error profiles.

    Profile entry i along axis a is the mean absolute error over the masked
    points of the i-th slice normal to a, or 0 for a slice with none.
    """
    grid = check_same_grid(recovered.grid, truth.grid)
    recovered.require(Rank.SCALAR)
    truth.require(Rank.SCALAR)
    if mask is None:
        mask = Mask.full(grid)
    check_same_grid(grid, mask.grid)

    flags = mask.flags
    err = np.abs(recovered.values - truth.values)
    scale = np.abs(truth.values)
    rel = err / np.where(scale > 0, scale, 1.0)
    points = int(flags.sum())
    if points == 0:
        logger.warning("Metrics requested on an empty mask")
        return MetricsReport(sup_abs=0.0, mean_abs=0.0, sup_rel=0.0, mean_rel=0.0,
                             coverage=0.0, interior_coverage=0.0, points=0,
                             profiles=[[0.0] * n for n in grid.extents])

    profiles = []
    for a in range(grid.dim):
        axes = tuple(b for b in range(grid.dim) if b != a)
        counts = flags.sum(axis=axes)
        sums = np.where(flags, err, 0.0).sum(axis=axes)
        profiles.append([float(s / c) if c else 0.0 for s, c in zip(sums, counts)])

    return MetricsReport(sup_abs=float(err[flags].max()), mean_abs=float(err[flags].mean()),
                         sup_rel=float(rel[flags].max()), mean_rel=float(rel[flags].mean()),
                         coverage=mask.fraction, interior_coverage=mask.interior_fraction,
                         points=points, profiles=profiles)


def error_field(recovered: GridField, truth: GridField, mask: Mask) -> GridField:
    """|recovered − truth| on the mask, zero elsewhere (for quick-look maps)."""
    check_same_grid(recovered.grid, truth.grid, mask.grid)
    err = np.where(mask.flags, np.abs(recovered.values - truth.values), 0.0)
    return recovered.with_values(err)
