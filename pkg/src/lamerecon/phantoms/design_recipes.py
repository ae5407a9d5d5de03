"""Amplitude recipes for designed boundary data.

Each recipe pins the leading amplitude (r, s) at an anchor. `r` is expressed
through the base direction θ of its family: "half_conj" is θ̄/2 (θ·r = 1),
"theta" is θ (θ·r = 0) and "conj" is θ̄. Rotated recipes solve along iθ.
"""

from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel

from ..models import DesignVariant


class AmplitudeRecipe(BaseModel):
    direction: str
    rotated: bool = False
    r_pin: str
    s_pin: float

    def pin(self, theta: np.ndarray) -> np.ndarray:
        r = PIN_VECTORS[self.r_pin](theta)
        return np.concatenate([r, [complex(self.s_pin)]])


PIN_VECTORS = {
    "half_conj": lambda theta: np.conj(theta) / 2.0,
    "theta": lambda theta: np.asarray(theta, dtype=complex),
    "conj": lambda theta: np.conj(theta),
}

# (alpha, beta) of every base direction family
BASE_DIRECTIONS: Dict[int, Dict[str, Tuple[Tuple[float, ...], Tuple[float, ...]]]] = {
    2: {"theta1": ((1.0, 0.0), (0.0, 1.0))},
    3: {
        "theta1": ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
        "theta2": ((1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
    },
}

AMPLITUDE_RECIPES: Dict[str, AmplitudeRecipe] = {
    "u0": AmplitudeRecipe(direction="theta1", r_pin="half_conj", s_pin=1.0),
    "u1": AmplitudeRecipe(direction="theta1", r_pin="theta", s_pin=0.0),
    "u2": AmplitudeRecipe(direction="theta1", rotated=True, r_pin="conj", s_pin=0.0),
    "u3": AmplitudeRecipe(direction="theta1", r_pin="conj", s_pin=0.0),
    "u4": AmplitudeRecipe(direction="theta1", rotated=True, r_pin="theta", s_pin=1.0),
    "v1": AmplitudeRecipe(direction="theta2", r_pin="theta", s_pin=0.0),
    "v2": AmplitudeRecipe(direction="theta2", rotated=True, r_pin="conj", s_pin=0.0),
}

DESIGN_SETS: Dict[int, Dict[DesignVariant, List[str]]] = {
    2: {
        DesignVariant.MU: ["u0", "u1", "u2"],
        DesignVariant.LAMBDA: ["u0", "u1", "u3", "u4"],
        DesignVariant.BOTH: ["u0", "u1", "u2", "u3", "u4"],
    },
    3: {
        DesignVariant.MU: ["u0", "u1", "u2", "v1", "v2"],
        DesignVariant.LAMBDA: ["u0", "u1", "u3", "u4", "v1"],
        DesignVariant.BOTH: ["u0", "u1", "u2", "u3", "u4", "v1", "v2"],
    },
}


def design_set(dim: int, variant: DesignVariant) -> List[str]:
    """Recipe names used for a variant in `dim` dimensions."""
    if dim not in DESIGN_SETS:
        raise ValueError(f"No design recipes for dim {dim}")
    return list(DESIGN_SETS[dim][DesignVariant(variant)])
