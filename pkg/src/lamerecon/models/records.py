"""Domain records passed between the reconstruction stages."""

from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import ContractViolation, PositivityError
from .grid import Grid, GridField, Mask, check_same_grid
from .types import AmplitudeStatus, Rank, Variant

_ARRAYS = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class LameParameters(BaseModel):
    """λ and μ on a common grid, with the admissible bounds (m, M)."""

    model_config = _ARRAYS

    lam: GridField
    mu: GridField
    bounds: Tuple[float, float] = (1e-6, 1e6)

    @model_validator(mode="after")
    def _check(self) -> "LameParameters":
        check_same_grid(self.lam.grid, self.mu.grid)
        self.lam.require(Rank.SCALAR)
        self.mu.require(Rank.SCALAR)
        if self.lam.is_complex or self.mu.is_complex:
            raise ContractViolation("Lamé parameters must be real")
        if not 0 < self.bounds[0] < self.bounds[1]:
            raise ContractViolation(f"Bounds must satisfy 0 < m < M, got {self.bounds}")
        return self

    @classmethod
    def constant(cls, grid: Grid, lam: float, mu: float) -> "LameParameters":
        return cls(lam=GridField(grid=grid, values=np.full(grid.shape, float(lam))),
                   mu=GridField(grid=grid, values=np.full(grid.shape, float(mu))))

    @property
    def grid(self) -> Grid:
        return self.mu.grid

    def check_positive(self, lam_too: bool = True) -> "LameParameters":
        """Positivity, then the admissible range m ≤ value ≤ M, of μ (and λ)."""
        m, big_m = self.bounds
        named = [("mu", self.mu.values)] + ([("lambda", self.lam.values)] if lam_too else [])
        for name, values in named:
            if np.any(values <= 0):
                raise PositivityError(f"{name} must be positive, min is {values.min():.3g}")
            if np.any((values < m) | (values > big_m)):
                raise PositivityError(f"{name} outside bounds [{m:.3g}, {big_m:.3g}]: "
                                      f"range is [{values.min():.3g}, {values.max():.3g}]")
        return self

    def within_bounds(self) -> bool:
        m, big_m = self.bounds
        return bool(np.all((self.lam.values >= m) & (self.lam.values <= big_m))
                    and np.all((self.mu.values >= m) & (self.mu.values <= big_m)))


class BoundaryData(BaseModel):
    """Dirichlet displacement on every boundary point, in grid boundary order."""

    model_config = _ARRAYS

    grid: Grid
    values: np.ndarray
    label: str = ""

    @model_validator(mode="after")
    def _check(self) -> "BoundaryData":
        expected = (len(self.grid.boundary_indices()), self.grid.dim)
        if self.values.shape != expected:
            raise ContractViolation(
                f"Boundary values of shape {self.values.shape}, expected {expected}")
        if not np.all(np.isfinite(self.values)):
            raise ContractViolation("Boundary values contain NaN or Inf")
        return self

    @classmethod
    def from_field(cls, field: GridField, label: str = "") -> "BoundaryData":
        field.require(Rank.VECTOR, field.grid.dim)
        values = field.flat_values()[field.grid.boundary_indices()]
        return cls(grid=field.grid, values=np.array(values), label=label)

    def to_field(self) -> GridField:
        """Full-grid field carrying the trace, zero in the interior."""
        full = np.zeros((self.grid.n_points, self.grid.dim), dtype=self.values.dtype)
        full[self.grid.boundary_indices()] = self.values
        return GridField(grid=self.grid, values=full.reshape(self.grid.shape + (self.grid.dim,)))


class LinearSystem(BaseModel):
    """Sparse interior system, unknowns ordered component-major."""

    model_config = _ARRAYS

    grid: Grid
    matrix: sp.csr_matrix
    rhs: np.ndarray
    ordering: np.ndarray
    boundary: BoundaryData

    @model_validator(mode="after")
    def _check(self) -> "LinearSystem":
        n = self.grid.dim * len(self.ordering)
        if self.matrix.shape != (n, n) or self.rhs.shape != (n,):
            raise ContractViolation(f"System shape {self.matrix.shape} does not match {n} unknowns")
        return self


class ForwardResult(BaseModel):
    model_config = _ARRAYS

    displacement: GridField
    condition_estimate: float


class ReductionBundle(BaseModel):
    """Per-solution (u♯, u♭, u*) for one variant."""

    model_config = _ARRAYS

    variant: Variant
    dim: int
    sharp: List[GridField]
    flat: List[GridField]
    star: List[GridField]
    source_labels: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self) -> "ReductionBundle":
        if not (len(self.sharp) == len(self.flat) == len(self.star)):
            raise ContractViolation("Bundle sharp/flat/star counts differ")
        if not self.sharp:
            raise ContractViolation("Empty bundle")
        check_same_grid(*[f.grid for f in self.sharp + self.flat + self.star])
        for f in self.sharp + self.flat:
            f.require(Rank.VECTOR, 2 * self.dim)
        return self

    @property
    def grid(self) -> Grid:
        return self.sharp[0].grid

    @property
    def count(self) -> int:
        return len(self.sharp)

    def sharp_array(self) -> np.ndarray:
        """(J, N, 2·dim) stack of sharp vectors."""
        return np.stack([f.flat_values() for f in self.sharp])

    def flat_array(self) -> np.ndarray:
        return np.stack([f.flat_values() for f in self.flat])

    def star_array(self) -> np.ndarray:
        """(J, N) stack of u* values."""
        return np.stack([f.values.ravel() for f in self.star])

    @classmethod
    def concat(cls, bundles: List["ReductionBundle"]) -> "ReductionBundle":
        first = bundles[0]
        for b in bundles[1:]:
            if b.variant != first.variant or b.dim != first.dim:
                raise ContractViolation("Cannot concatenate bundles of different variant/dim")
        return cls(variant=first.variant, dim=first.dim,
                   sharp=[f for b in bundles for f in b.sharp],
                   flat=[f for b in bundles for f in b.flat],
                   star=[f for b in bundles for f in b.star],
                   source_labels=[s for b in bundles for s in b.source_labels])


class EliminationPlan(BaseModel):
    """Per-point basis selection with its conditioning."""

    model_config = _ARRAYS

    variant: Variant
    dim: int
    basis_count: int
    target_count: int
    selection: np.ndarray
    targets: np.ndarray
    sigma_min: np.ndarray
    sigma_rel: np.ndarray
    mask: Mask

    @property
    def grid(self) -> Grid:
        return self.mask.grid

    def sigma_field(self) -> GridField:
        return GridField(grid=self.grid, values=self.sigma_min.reshape(self.grid.shape))


class ThetaField(BaseModel):
    """Θ coefficients annihilating one target, one component per basis slot."""

    model_config = _ARRAYS

    target_index: int
    coefficients: GridField
    mask: Mask


class CombinedFlat(BaseModel):
    """Eliminated flat combination v and its star right-hand side r*."""

    model_config = _ARRAYS

    target_index: int
    v: GridField
    rhs_star: GridField
    mask: Mask


class TransportSystem(BaseModel):
    """∇μ + Γμ = Φ on the masked points."""

    model_config = _ARRAYS

    gamma_vec: GridField
    phi: GridField
    beta: List[GridField]
    gamma: List[GridField]
    rhs: List[GridField]
    condition: np.ndarray
    mask: Mask

    @property
    def grid(self) -> Grid:
        return self.mask.grid


class RayResult(BaseModel):
    model_config = _ARRAYS

    mu: GridField
    reached: Mask
    nonpositive: Mask


class MuRecoveryResult(BaseModel):
    model_config = _ARRAYS

    mu: GridField
    recovered: Mask
    unreachable: Mask
    nonpositive: Mask
    disagreement: Optional[GridField] = None


class KappaSigma(BaseModel):
    """Per-target κ, σ and r* with the κ-nondegeneracy mask."""

    model_config = _ARRAYS

    kappa: List[GridField]
    sigma: List[GridField]
    rhs_star: List[GridField]
    scale: List[GridField]
    epsilon: float
    mask: Mask


class LambdaResult(BaseModel):
    model_config = _ARRAYS

    lam: GridField
    recovered: Mask
    negative: Mask
    extrapolated: Mask


class ComplexDirection(BaseModel):
    """ρ = τ(α + iβ) with orthonormal real α, β."""

    model_config = ConfigDict(frozen=True)

    alpha: Tuple[float, ...]
    beta: Tuple[float, ...]
    tau: float = 1.0

    @model_validator(mode="after")
    def _check(self) -> "ComplexDirection":
        a, b = np.asarray(self.alpha), np.asarray(self.beta)
        if a.shape != b.shape:
            raise ValueError("alpha and beta must have the same length")
        if abs(a @ b) > 1e-12 or abs(a @ a - 1) > 1e-12 or abs(b @ b - 1) > 1e-12:
            raise ValueError("alpha and beta must be orthonormal")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        return self

    @classmethod
    def axis_pair(cls, dim: int, p: int, q: int, tau: float = 1.0,
                  sign_p: float = 1.0, sign_q: float = 1.0) -> "ComplexDirection":
        alpha = [0.0] * dim
        beta = [0.0] * dim
        alpha[p] = float(sign_p)
        beta[q] = float(sign_q)
        return cls(alpha=tuple(alpha), beta=tuple(beta), tau=tau)

    @property
    def dim(self) -> int:
        return len(self.alpha)

    @property
    def theta(self) -> np.ndarray:
        return np.asarray(self.alpha) + 1j * np.asarray(self.beta)

    @property
    def rho(self) -> np.ndarray:
        return self.tau * self.theta

    def rotated(self) -> "ComplexDirection":
        """The direction iθ = −β + iα."""
        return ComplexDirection(alpha=tuple(-x for x in self.beta), beta=self.alpha, tau=self.tau)

    def with_tau(self, tau: float) -> "ComplexDirection":
        return ComplexDirection(alpha=self.alpha, beta=self.beta, tau=tau)


class V1Field(BaseModel):
    """(dim+1)×(dim+1) first-order coefficient of the reduced system."""

    model_config = _ARRAYS

    matrix: GridField

    @property
    def grid(self) -> Grid:
        return self.matrix.grid


class CgoAmplitude(BaseModel):
    """Leading-order amplitude (r, s) of a CGO solution."""

    model_config = _ARRAYS

    rs: GridField
    theta_derivative: GridField
    direction: ComplexDirection
    anchor: Tuple[int, ...]
    residual_norm: float
    status: AmplitudeStatus = AmplitudeStatus.OK

    @property
    def r(self) -> np.ndarray:
        return self.rs.values[..., :-1]

    @property
    def s(self) -> np.ndarray:
        return self.rs.values[..., -1]
