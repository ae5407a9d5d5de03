"""Grid, field and mask containers shared by every module."""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..errors import ContractViolation, GridMismatchError
from .types import Rank


class Grid(BaseModel):
    """Axis-aligned rectangle or box sampled on a uniform tensor grid."""

    model_config = ConfigDict(frozen=True)

    dim: int
    extents: Tuple[int, ...]
    origin: Tuple[float, ...]
    spacing: Tuple[float, ...]

    @model_validator(mode="after")
    def _check(self) -> "Grid":
        if self.dim not in (2, 3):
            raise ContractViolation(f"Grid dim must be 2 or 3, got {self.dim}")
        for name in ("extents", "origin", "spacing"):
            if len(getattr(self, name)) != self.dim:
                raise ContractViolation(f"Grid {name} must have {self.dim} entries")
        if any(n < 5 for n in self.extents):
            raise ContractViolation(f"Grid extents must be >= 5, got {self.extents}")
        if any(not h > 0 for h in self.spacing):
            raise ContractViolation(f"Grid spacing must be positive, got {self.spacing}")
        return self

    @classmethod
    def unit(cls, dim: int, n: int) -> "Grid":
        """The unit square/cube with n points per axis."""
        return cls(dim=dim, extents=(n,) * dim, origin=(0.0,) * dim,
                   spacing=(1.0 / (n - 1),) * dim)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.extents)

    @property
    def n_points(self) -> int:
        return int(np.prod(self.extents))

    @property
    def min_spacing(self) -> float:
        return float(min(self.spacing))

    def axis(self, a: int) -> np.ndarray:
        return self.origin[a] + self.spacing[a] * np.arange(self.extents[a])

    def axes(self) -> List[np.ndarray]:
        return [self.axis(a) for a in range(self.dim)]

    def coordinates(self) -> List[np.ndarray]:
        """Coordinate arrays x_1..x_dim, each of grid shape."""
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def points(self) -> np.ndarray:
        """All point coordinates as an (N, dim) array in row-major order."""
        return np.stack([c.ravel() for c in self.coordinates()], axis=-1)

    def boundary_flags(self) -> np.ndarray:
        flags = np.zeros(self.shape, dtype=bool)
        for a in range(self.dim):
            index = [slice(None)] * self.dim
            index[a] = 0
            flags[tuple(index)] = True
            index[a] = -1
            flags[tuple(index)] = True
        return flags

    def boundary_indices(self) -> np.ndarray:
        """Flat indices of the boundary points, ascending."""
        return np.flatnonzero(self.boundary_flags().ravel())

    def interior_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_flags().ravel())

    def nearest_index(self, x: Sequence[float]) -> Tuple[int, ...]:
        """Multi-index of the grid point closest to x (clipped into the box)."""
        if len(x) != self.dim:
            raise ContractViolation(f"Point {x} does not have {self.dim} coordinates")
        idx = []
        for a in range(self.dim):
            i = int(round((x[a] - self.origin[a]) / self.spacing[a]))
            idx.append(min(max(i, 0), self.extents[a] - 1))
        return tuple(idx)

    def point(self, index: Sequence[int]) -> np.ndarray:
        return np.array([self.origin[a] + self.spacing[a] * index[a] for a in range(self.dim)])

    def same_as(self, other: "Grid") -> bool:
        return (self.dim == other.dim and self.extents == other.extents
                and np.allclose(self.origin, other.origin, rtol=0, atol=1e-12)
                and np.allclose(self.spacing, other.spacing, rtol=1e-12, atol=0))


def check_same_grid(*grids: Grid) -> Grid:
    first = grids[0]
    for g in grids[1:]:
        if not first.same_as(g):
            raise GridMismatchError(f"Grid mismatch: {first.extents} vs {g.extents}")
    return first


class GridField(BaseModel):
    """Sampled values on a grid with trailing component axes.

    Scalar fields have values of grid shape, vector fields grid shape + (c,),
    matrix fields grid shape + (r, c). Values are finite and read-only.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: Grid
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_array(cls, v):
        arr = np.array(v, copy=True)
        if np.iscomplexobj(arr):
            arr = arr.astype(np.complex128)
        else:
            arr = arr.astype(np.float64)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check(self) -> "GridField":
        lead = self.values.shape[: self.grid.dim]
        if lead != self.grid.shape or self.values.ndim > self.grid.dim + 2:
            raise ContractViolation(
                f"Field values of shape {self.values.shape} do not fit grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ContractViolation("Field values contain NaN or Inf")
        return self

    @classmethod
    def zeros(cls, grid: Grid, components: Tuple[int, ...] = (), dtype=float) -> "GridField":
        return cls(grid=grid, values=np.zeros(grid.shape + tuple(components), dtype=dtype))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "GridField":
        """Sample fn(*coords); fn may return an array or a list of component arrays."""
        out = fn(*grid.coordinates())
        if isinstance(out, (list, tuple)):
            out = np.stack([np.broadcast_to(np.asarray(c), grid.shape) for c in out], axis=-1)
        else:
            out = np.broadcast_to(np.asarray(out), grid.shape)
        return cls(grid=grid, values=out)

    @classmethod
    def stack(cls, fields: Sequence["GridField"]) -> "GridField":
        """Stack scalar fields into a vector field."""
        grid = check_same_grid(*[f.grid for f in fields])
        for f in fields:
            f.require(Rank.SCALAR)
        return cls(grid=grid, values=np.stack([f.values for f in fields], axis=-1))

    @property
    def component_shape(self) -> Tuple[int, ...]:
        return self.values.shape[self.grid.dim:]

    @property
    def rank(self) -> Rank:
        return (Rank.SCALAR, Rank.VECTOR, Rank.MATRIX)[len(self.component_shape)]

    @property
    def components(self) -> int:
        return int(np.prod(self.component_shape)) if self.component_shape else 1

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def require(self, rank: Rank, components: Optional[int] = None) -> "GridField":
        if self.rank != rank:
            raise ContractViolation(f"Expected a {rank.value} field, got {self.rank.value}")
        if components is not None and self.components != components:
            raise ContractViolation(
                f"Expected {components} components, got {self.components}")
        return self

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(grid=self.grid, values=values)

    def component(self, i: int) -> "GridField":
        self.require(Rank.VECTOR)
        return GridField(grid=self.grid, values=self.values[..., i])

    def flat_values(self) -> np.ndarray:
        """Values reshaped to (N, components)."""
        return self.values.reshape(self.grid.n_points, self.components)

    @property
    def real(self) -> "GridField":
        return self.with_values(self.values.real)

    @property
    def imag(self) -> "GridField":
        return self.with_values(self.values.imag)

    def __add__(self, other: "GridField") -> "GridField":
        check_same_grid(self.grid, other.grid)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridField") -> "GridField":
        check_same_grid(self.grid, other.grid)
        return self.with_values(self.values - other.values)

    def scaled(self, factor) -> "GridField":
        return self.with_values(self.values * factor)


class Mask(BaseModel):
    """Boolean flag per grid point."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: Grid
    flags: np.ndarray

    @field_validator("flags", mode="before")
    @classmethod
    def _as_bool(cls, v):
        arr = np.array(v, dtype=bool, copy=True)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check(self) -> "Mask":
        if self.flags.shape != self.grid.shape:
            raise ContractViolation(
                f"Mask of shape {self.flags.shape} does not fit grid {self.grid.shape}")
        return self

    @classmethod
    def full(cls, grid: Grid, value: bool = True) -> "Mask":
        return cls(grid=grid, flags=np.full(grid.shape, value))

    @classmethod
    def interior(cls, grid: Grid) -> "Mask":
        return cls(grid=grid, flags=~grid.boundary_flags())

    @property
    def count(self) -> int:
        return int(self.flags.sum())

    @property
    def fraction(self) -> float:
        return self.count / self.grid.n_points

    @property
    def interior_fraction(self) -> float:
        interior = ~self.grid.boundary_flags()
        return float((self.flags & interior).sum() / interior.sum())

    def __and__(self, other: "Mask") -> "Mask":
        check_same_grid(self.grid, other.grid)
        return Mask(grid=self.grid, flags=self.flags & other.flags)

    def __or__(self, other: "Mask") -> "Mask":
        check_same_grid(self.grid, other.grid)
        return Mask(grid=self.grid, flags=self.flags | other.flags)

    def __invert__(self) -> "Mask":
        return Mask(grid=self.grid, flags=~self.flags)

    def as_field(self) -> GridField:
        return GridField(grid=self.grid, values=self.flags.astype(float))
