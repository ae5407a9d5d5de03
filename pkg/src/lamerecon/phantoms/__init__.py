"""Phantom, boundary-family and design-recipe registries."""

from .library import PHANTOMS, make_phantom, lame_phantom
from .boundary_families import BOUNDARY_FAMILIES, boundary_family
from .design_recipes import AMPLITUDE_RECIPES, BASE_DIRECTIONS, DESIGN_SETS, design_set

__all__ = [
    "PHANTOMS",
    "make_phantom",
    "lame_phantom",
    "BOUNDARY_FAMILIES",
    "boundary_family",
    "AMPLITUDE_RECIPES",
    "BASE_DIRECTIONS",
    "DESIGN_SETS",
    "design_set",
]
