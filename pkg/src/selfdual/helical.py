"""
Explicit unit helical eigenvectors and the scalar/velocity correspondence.

For ``k' = (k1, k2) != 0`` the basis vector is built from
``d = (-k2, k1, 0)`` and ``g = i d - (k x d) / |k|`` as ``h = g / |g|``;
``|g| = sqrt(2) |k'|``.  On the ``k3`` axis ``g`` vanishes and we use
``h = (1, i sgn k3, 0) / sqrt(2)``, the unit +helical vector there.

A +helical field ``u_plus`` then has a single scalar degree of freedom per
mode: ``u_plus(k) = v(k) h(k)`` and ``v(k) = conj(h(k)) . u_plus(k)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DecompositionError
from .spectral import SpectralScalar, SpectralVector

AXIS_CONVENTION = "h(0,0,k3) = (1, i sgn(k3), 0)/sqrt(2)"


def helical_vector(k):
    """Unit +helical eigenvector for wavevectors ``k`` of shape (3, ...).

    Vectorised over trailing axes.  Returns 0 at ``k = 0``.
    """
    k = np.asarray(k, dtype=float)
    k1, k2, k3 = k
    kmag = np.sqrt(k1**2 + k2**2 + k3**2)
    kp = np.hypot(k1, k2)
    off = kp > 0
    on = (~off) & (k3 != 0)

    d = np.stack([-k2, k1, np.zeros_like(k1)])
    kxd = np.cross(k, d, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        g = 1j * d - kxd / np.where(off, kmag, 1.0)
        h = g / np.where(off, np.sqrt(2.0) * kp, 1.0)
    h = np.where(off, h, 0.0)
    axis = np.stack([np.ones_like(k3), 1j * np.sign(k3), np.zeros_like(k3)]) / np.sqrt(2.0)
    return np.where(on, axis, h)


@dataclass(frozen=True, eq=False)
class HelicalBasis:
    """Per-mode unit +helical eigenvector on a grid (Nyquist modes hold 0)."""

    grid: object
    h: np.ndarray
    axis_convention: str = AXIS_CONVENTION


def build_basis(grid):
    h = helical_vector(grid.k) * grid.retained
    return HelicalBasis(grid, h.astype(complex))


def reconstruct_plus(v, basis):
    """``u_plus(k) = v(k) h(k)``; an isometry from scalars to +helical fields."""
    return SpectralVector(basis.grid, basis.h * v.coef, divergence_free=True, helical_sign="+")


def decompose_plus(u_plus, basis, tol=1e-10):
    """Inverse of :func:`reconstruct_plus`: ``v(k) = conj(h(k)) . u_plus(k)``.

    Raises
    ------
    DecompositionError
        If ``u_plus`` is not a +helical field within ``tol``.
    """
    if np.abs(u_plus.coef[:, 0, 0, 0]).max() > tol * max(np.abs(u_plus.coef).max(), 1e-300):
        raise DecompositionError("u_plus has a nonzero mean")
    res = u_plus.helical_residual("+")
    if res > tol:
        raise DecompositionError(f"field is not +helical (relative residual {res:.2e})")
    vc = np.einsum("i...,i...->...", np.conj(basis.h), u_plus.coef)
    return SpectralScalar(basis.grid, vc, zero_mean=True)


def plus_coef(basis, vc):
    return basis.h * vc


def selfdual_velocity_coef(basis, vc):
    """Coefficients of ``u_plus - u_plus^r`` for a real scalar ``v``.

    For real fields the reflection is ``conj`` in coefficient space.
    """
    up = basis.h * vc
    return up - np.conj(up)
