"""
Periodic-box Fourier infrastructure.

Fields are stored as Fourier-series coefficients on a full complex FFT layout:
``f(x) = sum_k c(k) exp(i k.x)`` with ``c = fftn(f) / N``.  All nonlocal
operators (powers of ``Lambda = sqrt(-Laplacian)``, curl, Leray and helical
projections) are diagonal multipliers on that layout.

Nyquist modes (index ``n/2`` on any axis) are not retained: their wavevector
has no partner under ``k -> -k``, so every operator that mixes components or
depends on the sign of ``k`` zeroes them.  Plain transforms keep them so that
physical/spectral round trips are exact.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import InvalidGridError, ZeroModeError

_workers = 1


def set_fft_workers(n):
    """Set the thread count used by every transform in the package."""
    global _workers
    _workers = max(1, int(n))


@contextlib.contextmanager
def fft_workers(n):
    """Temporarily change the transform thread count."""
    global _workers
    old = _workers
    _workers = max(1, int(n))
    try:
        yield
    finally:
        _workers = old


def fftn3(a):
    """Forward transform over the last three axes, coefficient normalization."""
    return scipy.fft.fftn(a, axes=(-3, -2, -1), norm="forward", workers=_workers)


def ifftn3(a):
    """Inverse of :func:`fftn3`; returns a complex array."""
    return scipy.fft.ifftn(a, axes=(-3, -2, -1), norm="forward", workers=_workers)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform periodic grid with its wavevector map and 2/3-rule mask.

    Parameters
    ----------
    n : tuple of int
        Modes per axis; each even and at least 8.
    L : tuple of float
        Box side lengths.
    """

    n: tuple
    L: tuple

    def __post_init__(self):
        n = tuple(int(v) for v in np.broadcast_to(np.asarray(self.n), (3,)))
        L = tuple(float(v) for v in np.broadcast_to(np.asarray(self.L, dtype=float), (3,)))
        for ni in n:
            if ni % 2 or ni < 8:
                raise InvalidGridError(f"each resolution must be even and >= 8, got {n}")
        for Li in L:
            if not np.isfinite(Li) or Li <= 0:
                raise InvalidGridError(f"box size must be positive, got {L}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", L)

    def __eq__(self, other):
        return isinstance(other, Grid) and self.n == other.n and np.allclose(self.L, other.L, rtol=1e-15, atol=0)

    def __hash__(self):
        return hash((self.n, self.L))

    @property
    def shape(self):
        return self.n

    @property
    def size(self):
        return int(np.prod(self.n))

    @property
    def volume(self):
        return float(np.prod(self.L))

    @cached_property
    def freqs(self):
        """Integer frequencies per axis in FFT order."""
        return tuple(np.fft.fftfreq(ni, 1.0 / ni).astype(int) for ni in self.n)

    @cached_property
    def cutoff(self):
        """Largest integer frequency kept by the 2/3 rule, per axis.

        This is the largest ``K < n/3``, which guarantees that a product of
        two fields supported in ``|f| <= K`` aliases only outside the band.
        """
        return tuple((ni - 1) // 3 for ni in self.n)

    @cached_property
    def k(self):
        """Wavevector components, each a full-shape array."""
        scales = [2 * np.pi / Li for Li in self.L]
        k1d = [f * s for f, s in zip(self.freqs, scales)]
        return np.stack(np.meshgrid(*k1d, indexing="ij"))

    @cached_property
    def k2(self):
        return np.sum(self.k**2, axis=0)

    @cached_property
    def kmag(self):
        return np.sqrt(self.k2)

    @cached_property
    def inv_kmag(self):
        """``1/|k|`` with the zero mode set to 0."""
        out = np.zeros(self.n)
        nz = self.k2 > 0
        out[nz] = 1.0 / self.kmag[nz]
        return out

    @cached_property
    def retained(self):
        """Modes away from the Nyquist planes."""
        masks = [f != -ni // 2 for f, ni in zip(self.freqs, self.n)]
        return masks[0][:, None, None] & masks[1][None, :, None] & masks[2][None, None, :]

    @cached_property
    def dealias_mask(self):
        masks = [np.abs(f) <= c for f, c in zip(self.freqs, self.cutoff)]
        return masks[0][:, None, None] & masks[1][None, :, None] & masks[2][None, None, :]

    @cached_property
    def x(self):
        """Collocation coordinates ``j L / n`` as a (3, n1, n2, n3) array."""
        x1d = [np.arange(ni) * Li / ni for ni, Li in zip(self.n, self.L)]
        return np.stack(np.meshgrid(*x1d, indexing="ij"))

    @cached_property
    def x_centered(self):
        """Collocation coordinates wrapped into ``[-L/2, L/2)``."""
        x1d = [np.fft.fftfreq(ni, 1.0 / ni) * Li / ni for ni, Li in zip(self.n, self.L)]
        return np.stack(np.meshgrid(*x1d, indexing="ij"))

    @property
    def dx(self):
        return min(Li / ni for Li, ni in zip(self.L, self.n))

    def index_of(self, freq):
        """Array index of an integer frequency triple."""
        return tuple(int(f) % ni for f, ni in zip(freq, self.n))


def make_grid(n, L=2 * np.pi):
    """Build a :class:`Grid`; ``n`` and ``L`` may be scalars or triples."""
    if np.ndim(n) == 0:
        n = (n, n, n)
    if np.ndim(L) == 0:
        L = (L, L, L)
    if len(n) != 3 or len(L) != 3:
        raise InvalidGridError("grid needs three resolutions and three box sizes")
    if any(int(v) != v for v in n):
        raise InvalidGridError(f"resolutions must be integers, got {n}")
    return Grid(tuple(int(v) for v in n), tuple(float(v) for v in L))


def _reflect_coef(c):
    axes = (-3, -2, -1)
    return np.roll(np.flip(c, axis=axes), 1, axis=axes)


@dataclass(frozen=True, eq=False)
class SpectralScalar:
    """Fourier coefficients of a scalar field."""

    grid: Grid
    coef: np.ndarray
    zero_mean: bool = False

    def __post_init__(self):
        c = np.asarray(self.coef, dtype=complex)
        if c.shape != self.grid.n:
            raise ValueError(f"scalar coefficients must have shape {self.grid.n}, got {c.shape}")
        object.__setattr__(self, "coef", c)

    @classmethod
    def from_physical(cls, grid, values, **flags):
        return cls(grid, fftn3(np.asarray(values, dtype=float)), **flags)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n, dtype=complex), zero_mean=True)

    def to_physical(self):
        return ifftn3(self.coef).real

    def with_coef(self, coef, **flags):
        return replace(self, coef=coef, **flags)

    def norm(self):
        """L2 norm over the box (Parseval)."""
        return float(np.sqrt(self.grid.volume * np.sum(np.abs(self.coef) ** 2)))

    def inner(self, other):
        """Real L2 inner product over the box."""
        return float(self.grid.volume * np.sum(self.coef * np.conj(other.coef)).real)

    def reality_residual(self):
        """Max deviation from ``c(-k) = conj(c(k))`` over retained modes."""
        d = (_reflect_coef(self.coef) - np.conj(self.coef))[self.grid.retained]
        scale = max(np.max(np.abs(self.coef)), 1e-300)
        return float(np.max(np.abs(d)) / scale) if d.size else 0.0

    def __add__(self, other):
        return SpectralScalar(self.grid, self.coef + other.coef, self.zero_mean and other.zero_mean)

    def __sub__(self, other):
        return SpectralScalar(self.grid, self.coef - other.coef, self.zero_mean and other.zero_mean)

    def __neg__(self):
        return self.with_coef(-self.coef)

    def __mul__(self, a):
        return self.with_coef(a * self.coef)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralVector:
    """Fourier coefficients of a 3-vector field, shape ``(3, n1, n2, n3)``.

    ``helical_sign`` is ``"+"`` or ``"-"`` for curl eigen-sectors and
    ``None`` for mixed content.
    """

    grid: Grid
    coef: np.ndarray
    divergence_free: bool = False
    helical_sign: str | None = None

    def __post_init__(self):
        c = np.asarray(self.coef, dtype=complex)
        if c.shape != (3,) + self.grid.n:
            raise ValueError(f"vector coefficients must have shape {(3,) + self.grid.n}, got {c.shape}")
        if self.helical_sign not in (None, "+", "-"):
            raise ValueError(f"helical_sign must be '+', '-' or None, got {self.helical_sign!r}")
        object.__setattr__(self, "coef", c)

    @classmethod
    def from_physical(cls, grid, values, **flags):
        return cls(grid, fftn3(np.asarray(values, dtype=float)), **flags)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((3,) + grid.n, dtype=complex), divergence_free=True)

    def to_physical(self):
        return ifftn3(self.coef).real

    def with_coef(self, coef, **flags):
        return replace(self, coef=coef, **flags)

    def component(self, i):
        return SpectralScalar(self.grid, self.coef[i])

    def norm(self):
        return float(np.sqrt(self.grid.volume * np.sum(np.abs(self.coef) ** 2)))

    def inner(self, other):
        return float(self.grid.volume * np.sum(self.coef * np.conj(other.coef)).real)

    def divergence_residual(self):
        """``max |k.u(k)| / max |k||u(k)|`` over retained modes."""
        div = np.abs(np.einsum("i...,i...->...", self.grid.k, self.coef))[self.grid.retained]
        scale = np.max(self.grid.kmag * np.linalg.norm(self.coef, axis=0))
        return float(np.max(div) / scale) if scale > 0 else 0.0

    def helical_residual(self, sign):
        """Relative size of ``i k x u -/+ |k| u`` for the requested sector."""
        s = 1.0 if sign == "+" else -1.0
        r = 1j * np.cross(self.grid.k, self.coef, axis=0) - s * self.grid.kmag * self.coef
        scale = np.linalg.norm(self.grid.kmag * self.coef)
        return float(np.linalg.norm(r) / scale) if scale > 0 else 0.0

    def _combine(self, coef, other):
        sign = self.helical_sign if self.helical_sign == other.helical_sign else None
        return SpectralVector(self.grid, coef, self.divergence_free and other.divergence_free, sign)

    def __add__(self, other):
        return self._combine(self.coef + other.coef, other)

    def __sub__(self, other):
        return self._combine(self.coef - other.coef, other)

    def __neg__(self):
        return self.with_coef(-self.coef)

    def __mul__(self, a):
        return self.with_coef(a * self.coef)

    __rmul__ = __mul__


def _has_mean(c, tol=1e-12):
    mean = np.abs(c[..., 0, 0, 0])
    scale = max(np.max(np.abs(c)), 1e-300)
    return np.any(mean > tol * scale)


def lambda_pow(f, s):
    """Apply ``Lambda**s``: multiply each coefficient by ``|k|**s``.

    For ``s < 0`` the zero mode is singular, so the input must have zero mean
    and the output zero mode is 0.
    """
    g = f.grid
    if s == 0:
        return f.with_coef(f.coef.copy())
    if s < 0:
        if _has_mean(f.coef):
            raise ZeroModeError("negative power of Lambda applied to a field with nonzero mean")
        mult = np.zeros(g.n)
        nz = g.k2 > 0
        mult[nz] = g.kmag[nz] ** s
    else:
        mult = g.kmag**s
    return f.with_coef(f.coef * mult)


def curl_coef(grid, c):
    """Coefficientwise ``i k x c`` with Nyquist modes dropped."""
    return 1j * np.cross(grid.k, c, axis=0) * grid.retained


def curl(u):
    """Curl of a vector field; the result is divergence free."""
    return SpectralVector(u.grid, curl_coef(u.grid, u.coef), divergence_free=True,
                          helical_sign=u.helical_sign)


def leray_coef(grid, c):
    kdotc = np.einsum("i...,i...->...", grid.k, c)
    out = c - grid.k * (kdotc * grid.inv_kmag**2)
    zero = out[:, 0, 0, 0].copy()
    out *= grid.retained
    out[:, 0, 0, 0] = zero
    return out


def leray_project(u):
    """Project onto divergence-free fields; the zero mode passes through."""
    return SpectralVector(u.grid, leray_coef(u.grid, u.coef), divergence_free=True)


def helical_project(u, sign):
    """Curl eigen-sector ``(u +/- Lambda^{-1} curl u) / 2``.

    The two projections sum to ``u`` and are L2-orthogonal.
    """
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    if _has_mean(u.coef):
        raise ZeroModeError("helical projection needs a zero-mean field")
    if u.divergence_residual() > 1e-10:
        raise ValueError("helical projection needs a divergence-free field")
    g = u.grid
    s = 1.0 if sign == "+" else -1.0
    out = 0.5 * (u.coef + s * curl_coef(g, u.coef) * g.inv_kmag)
    out *= g.retained
    return SpectralVector(g, out, divergence_free=True, helical_sign=sign)


def reflect(f):
    """Point reflection ``f(x) -> f(-x)``: coefficient ``c(k) -> c(-k)``.

    Vector components are not flipped; this is the plain composition with
    ``x -> -x``.
    """
    return f.with_coef(_reflect_coef(f.coef))


def dealias(f):
    """Zero every coefficient outside the 2/3-rule mask."""
    return f.with_coef(f.coef * f.grid.dealias_mask)


def gradient(phi):
    """Gradient of a scalar as a vector field."""
    return SpectralVector(phi.grid, 1j * phi.grid.k * phi.coef * phi.grid.retained)
