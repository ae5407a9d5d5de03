"""Spectral solver for θ·∇P = B(x)P on a padded periodic plane.

θ·∇ with θ = σ_α e_p + iσ_β e_q acts on the (p, q) plane as a ∂̄-type operator.
The coupling B is cut off smoothly outside the domain, and a constant source
in the outer padding frame absorbs the mean so the periodic inverse applies.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.fft import fft2, ifft2, fftfreq, next_fast_len
from scipy.sparse.linalg import LinearOperator, gmres

from ..config import settings
from ..errors import ContractViolation


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C∞ step: 0 for t ≤ 0, 1 for t ≥ 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)

    def bump(x):
        safe = np.where(x > 0, x, 1.0)
        return np.where(x > 0, np.exp(-1.0 / safe), 0.0)

    a, b = bump(t), bump(1.0 - t)
    return a / (a + b)


class PaddedPlane:
    """Periodic box around an (n_p, n_q) plane with cutoff and compensation profiles."""

    CUTOFF_END = 0.45
    FRAME_START = 0.5
    FRAME_END = 0.9

    def __init__(self, shape: Tuple[int, int], spacing: Tuple[float, float],
                 padding: Optional[float] = None):
        padding = padding if padding is not None else settings.dbar_padding
        self.shape = tuple(shape)
        self.offsets = []
        self.padded_shape = []
        distances = []
        wavenumbers = []
        for n, h in zip(shape, spacing):
            width = int(math.ceil(padding * n))
            total = next_fast_len(n + 2 * width)
            self.offsets.append(width)
            self.padded_shape.append(total)
            j = (np.arange(total) - width) % total
            d = np.where(j <= n - 1, 0, np.minimum(j - (n - 1), total - j)).astype(float)
            distances.append(d / d.max())
            wavenumbers.append(2.0 * np.pi * fftfreq(total, d=h))
        self.padded_shape = tuple(self.padded_shape)
        t = np.maximum.outer(distances[0], distances[1])
        self.cutoff = 1.0 - smooth_step(t / self.CUTOFF_END)
        self.frame = smooth_step((t - self.FRAME_START) / (self.FRAME_END - self.FRAME_START))
        self.k_p, self.k_q = np.meshgrid(wavenumbers[0], wavenumbers[1], indexing="ij")

    def extend(self, values: np.ndarray) -> np.ndarray:
        """Edge-extend (n_p, n_q, ...) values onto the padded plane."""
        pads = [(w, total - n - w) for w, total, n in zip(self.offsets, self.padded_shape, self.shape)]
        pads += [(0, 0)] * (values.ndim - 2)
        return np.pad(values, pads, mode="edge")

    def restrict(self, values: np.ndarray) -> np.ndarray:
        """Cut the domain back out of padded (..., P_p, P_q) values."""
        (wp, wq), (n_p, n_q) = self.offsets, self.shape
        return values[..., wp:wp + n_p, wq:wq + n_q]

    def symbol(self, sign_alpha: float, sign_beta: float) -> np.ndarray:
        """Fourier symbol of σ_α∂_p + iσ_β∂_q."""
        return 1j * sign_alpha * self.k_p - sign_beta * self.k_q


class DbarSolver:
    """Fundamental matrix of θ·∇P = BP, one column per constant mode."""

    def __init__(self, padding: Optional[float] = None, rtol: Optional[float] = None,
                 maxiter: Optional[int] = None):
        """Initialize the solver."""
        self.logger = logging.getLogger(__name__)
        self.padding = padding if padding is not None else settings.dbar_padding
        self.rtol = rtol if rtol is not None else settings.dbar_rtol
        self.maxiter = maxiter if maxiter is not None else settings.dbar_maxiter

    def plane(self, shape: Tuple[int, int], spacing: Tuple[float, float]) -> PaddedPlane:
        return PaddedPlane(shape, spacing, self.padding)

    def fundamental(self, coupling: np.ndarray, plane: PaddedPlane, sign_alpha: float,
                    sign_beta: float) -> Tuple[np.ndarray, np.ndarray, bool]:
        """Solve for P_j = e_j + T(χBP_j − η_jν), j = 1..m.

        `coupling` has shape (n_p, n_q, m, m). Returns C and θ·∇C on the plane,
        both (n_p, n_q, m, m) with column j the j-th solution, and whether
        every GMRES solve converged.
        """
        if coupling.shape[:2] != plane.shape or coupling.shape[2] != coupling.shape[3]:
            raise ContractViolation(f"Coupling of shape {coupling.shape} does not fit plane {plane.shape}")
        m = coupling.shape[-1]
        symbol = plane.symbol(sign_alpha, sign_beta)
        safe = np.where(symbol == 0, 1.0, symbol)
        chi_b = plane.extend(coupling) * plane.cutoff[..., None, None]
        frame = plane.frame
        frame_mean = frame.mean()
        padded = plane.padded_shape
        size = m * padded[0] * padded[1]

        def source(p: np.ndarray) -> np.ndarray:
            f = np.einsum("xyij,jxy->ixy", chi_b, p)
            eta = f.mean(axis=(1, 2)) / frame_mean
            return f - eta[:, None, None] * frame

        def inverse(f: np.ndarray) -> np.ndarray:
            spectrum = fft2(f, axes=(-2, -1)) / safe
            spectrum[..., symbol == 0] = 0.0
            return ifft2(spectrum, axes=(-2, -1))

        def matvec(x: np.ndarray) -> np.ndarray:
            p = x.reshape((m,) + padded)
            return (p - inverse(source(p))).ravel()

        operator = LinearOperator((size, size), matvec=matvec, dtype=complex)
        columns, derivatives = [], []
        converged = True
        for j in range(m):
            rhs = np.zeros((m,) + padded, dtype=complex)
            rhs[j] = 1.0
            x, info = gmres(operator, rhs.ravel(), rtol=self.rtol, atol=0.0,
                            restart=min(size, 80), maxiter=self.maxiter)
            if info < 0:
                raise ContractViolation(f"GMRES breakdown for column {j}")
            if info > 0:
                converged = False
                self.logger.warning(f"GMRES did not reach rtol {self.rtol:.1e} for column {j}")
            p = x.reshape((m,) + padded)
            dp = ifft2(fft2(p, axes=(-2, -1)) * symbol, axes=(-2, -1))
            columns.append(plane.restrict(p))
            derivatives.append(plane.restrict(dp))
        # (m_col, m_row, n_p, n_q) -> (n_p, n_q, m_row, m_col)
        basis = np.transpose(np.stack(columns), (2, 3, 1, 0))
        theta_basis = np.transpose(np.stack(derivatives), (2, 3, 1, 0))
        return basis, theta_basis, converged
