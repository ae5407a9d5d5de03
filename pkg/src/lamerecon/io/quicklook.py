"""PNG heat maps of 2D scalar fields for quick visual checks."""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image

from ..models import GridField, Mask, Rank

logger = logging.getLogger(__name__)

# blue -> white -> red
_STOPS = np.array([[0.23, 0.30, 0.75], [0.87, 0.87, 0.87], [0.71, 0.02, 0.15]])


def _colormap(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0) * (len(_STOPS) - 1)
    lo = np.minimum(np.floor(t).astype(int), len(_STOPS) - 2)
    frac = (t - lo)[..., None]
    return (1 - frac) * _STOPS[lo] + frac * _STOPS[lo + 1]


def save_heatmap(field: GridField, path: Union[str, Path], mask: Optional[Mask] = None,
                 scale: int = 4) -> Path:
    """Write a heat map of a real 2D scalar field; masked-out points are black.

    3D fields are shown through their middle slice along the last axis.
    """
    field.require(Rank.SCALAR)
    values = np.real(field.values)
    flags = mask.flags if mask is not None else np.ones(values.shape, dtype=bool)
    if field.grid.dim == 3:
        mid = values.shape[2] // 2
        values, flags = values[:, :, mid], flags[:, :, mid]
    shown = values[flags]
    lo, hi = (float(shown.min()), float(shown.max())) if shown.size else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0
    rgb = _colormap((values - lo) / span)
    rgb[~flags] = 0.0
    # x1 runs left to right, x2 bottom to top
    image = np.flipud(np.transpose(rgb, (1, 0, 2)))
    img = Image.fromarray((image * 255).astype(np.uint8))
    img = img.resize((img.width * scale, img.height * scale), Image.Resampling.NEAREST)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    img.save(path)
    logger.debug(f"Wrote heat map {path} (range {lo:.4g}..{hi:.4g})")
    return path
