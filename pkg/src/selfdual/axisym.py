"""
Axisymmetric form of the scalar equation in ``(r, x3)``.

Radial direction: Fourier-Bessel (Dirichlet at ``r = R``) collocation,

    f(r_i) = sum_m a_m J0(kr_m r_i),    kr_m = j_{0,m} / R,
    r_i = j_{0,i} R / j_{0,N+1},

so ``Lambda' = sqrt(-d_rr - d_r / r)`` is the exact multiplier ``kr``, and
``d_r`` maps the order-0 series to the order-1 series with coefficients
``-kr_m a_m``.  The ``x3`` direction is Fourier on period ``Lz``.

Notation used below: ``P = v + v^r`` (even in ``x3``), ``M = v - v^r``
(odd), ``K = sqrt(kr^2 + k3^2)`` is the symbol of ``Lambda``.

Each nonlinear term is a product of two factors of the form
``d^(r?) d3^(z?) Lambda'^a Lambda^b S`` (``S`` one of ``P``, ``M``) wrapped in
an outer multiplier ``Lambda'^a Lambda^b d3^dz``.  Two term tables are kept:

``"printed"``
    the reference ten-term expansion as written;
``"derived"``
    the same expansion re-derived from the three-dimensional equation.
    Terms 1, 2, 3, 4 and 8 carry the opposite sign and term 7 pairs
    ``[Lambda'^{-1} P]_r`` with ``[Lambda' P]_r`` instead of
    ``[Lambda' M]_r``.

Only the derived table reproduces the three-dimensional solver (see the
test suite); it is the default.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft
import scipy.special

from .errors import AssemblyError, ConfinementError, ConstraintError, DomainError

SQ2 = np.sqrt(2.0)
CONFINEMENT_TOL = 1e-8
TAIL_BAND = 0.2


@dataclass(frozen=True, eq=False)
class AxisymGrid:
    """Fourier-Bessel nodes on ``[0, R)`` times a uniform periodic ``x3`` grid."""

    nr: int
    nz: int
    R: float = 2 * np.pi
    Lz: float = 2 * np.pi

    def __post_init__(self):
        if self.nr < 4:
            raise ValueError("need at least 4 radial nodes")
        if self.nz < 8 or self.nz % 2:
            raise ValueError("nz must be even and >= 8")
        if not (self.R > 0 and self.Lz > 0):
            raise ValueError("R and Lz must be positive")

    @cached_property
    def zeros(self):
        return scipy.special.jn_zeros(0, self.nr + 1)

    @cached_property
    def r(self):
        return self.zeros[:-1] * self.R / self.zeros[-1]

    @cached_property
    def kr(self):
        return self.zeros[:-1] / self.R

    @cached_property
    def z(self):
        return np.arange(self.nz) * self.Lz / self.nz

    @cached_property
    def k3(self):
        return 2 * np.pi / self.Lz * np.fft.fftfreq(self.nz, 1.0 / self.nz)

    @cached_property
    def B0(self):
        """Order-0 synthesis matrix ``J0(kr_m r_i)``."""
        return scipy.special.j0(np.outer(self.r, self.kr))

    @cached_property
    def B1(self):
        """Order-1 synthesis matrix ``J1(kr_m r_i)``."""
        return scipy.special.j1(np.outer(self.r, self.kr))

    @cached_property
    def B0inv(self):
        return np.linalg.inv(self.B0)

    @cached_property
    def B1inv(self):
        return np.linalg.inv(self.B1)

    @cached_property
    def KR(self):
        return np.broadcast_to(self.kr[:, None], (self.nr, self.nz))

    @cached_property
    def K3(self):
        return np.broadcast_to(self.k3[None, :], (self.nr, self.nz))

    @cached_property
    def K(self):
        return np.sqrt(self.KR**2 + self.K3**2)

    @cached_property
    def weights(self):
        """Per-coefficient L2 weights: ``||f||^2 = sum w |c|^2``."""
        jw = scipy.special.j1(self.zeros[:-1]) ** 2 * self.R**2 / 2
        return 2 * np.pi * self.Lz * np.broadcast_to(jw[:, None], (self.nr, self.nz))

    @cached_property
    def zmask(self):
        q = np.fft.fftfreq(self.nz, 1.0 / self.nz)
        return np.abs(q) <= (self.nz - 1) // 3

    @property
    def shape(self):
        return (self.nr, self.nz)

    # transforms -------------------------------------------------------
    def analyse(self, values):
        """Values on nodes -> order-0 Fourier-Bessel/Fourier coefficients."""
        cz = scipy.fft.fft(values, axis=1, norm="forward")
        return self.B0inv @ cz

    def synth0(self, coef):
        return scipy.fft.ifft(self.B0 @ coef, axis=1, norm="forward").real

    def synth1(self, coef):
        """Order-1 synthesis: values of ``sum_m c_m J1(kr_m r)``."""
        return scipy.fft.ifft(self.B1 @ coef, axis=1, norm="forward").real

    def reflect_coef(self, coef):
        """``x3 -> -x3`` in coefficient space."""
        return np.roll(np.flip(coef, axis=1), 1, axis=1)

    def norm_coef(self, coef):
        return float(np.sqrt(np.sum(self.weights * np.abs(coef) ** 2)))


@dataclass(frozen=True, eq=False)
class AxisymScalar:
    """Real values on the ``(r_i, z_j)`` nodes."""

    grid: AxisymGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values must have shape {self.grid.shape}, got {v.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_coef(cls, grid, coef):
        return cls(grid, grid.synth0(coef))

    @classmethod
    def from_function(cls, grid, fn):
        rr, zz = np.meshgrid(grid.r, grid.z, indexing="ij")
        return cls(grid, fn(rr, zz))

    @cached_property
    def coef(self):
        return self.grid.analyse(self.values)

    def reflect(self):
        return AxisymScalar(self.grid, np.roll(np.flip(self.values, axis=1), 1, axis=1))

    def norm(self):
        return self.grid.norm_coef(self.coef)

    def __add__(self, other):
        return AxisymScalar(self.grid, self.values + other.values)

    def __sub__(self, other):
        return AxisymScalar(self.grid, self.values - other.values)

    def __mul__(self, a):
        return AxisymScalar(self.grid, a * self.values)

    __rmul__ = __mul__


def _finite(f):
    if not np.all(np.isfinite(f.values)):
        raise DomainError("non-finite values in axisymmetric field")


def tail_fraction(grid, coef):
    """Fraction of L2 energy in the top ``TAIL_BAND`` of radial modes."""
    e = grid.weights * np.abs(coef) ** 2
    total = e.sum()
    if total == 0:
        return 0.0
    cut = int(np.ceil((1 - TAIL_BAND) * grid.nr))
    return float(e[cut:].sum() / total)


def is_confined(f, tol=CONFINEMENT_TOL):
    """A profile counts as confined when its Fourier-Bessel tail is below ``tol``.

    A function that does not vanish smoothly before ``r = R`` has a slowly
    decaying Fourier-Bessel spectrum, so this detects both lack of decay
    and lack of radial resolution.
    """
    return tail_fraction(f.grid, f.coef) <= tol


def _check_confined(f, strict):
    frac = tail_fraction(f.grid, f.coef)
    if frac > CONFINEMENT_TOL:
        msg = f"profile not confined to r < R (radial tail fraction {frac:.2e})"
        if strict:
            raise ConfinementError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)


def lambda_prime_pow(f, s):
    """Apply ``Lambda'**s`` (multiplier ``kr**s``); all ``kr > 0`` on this grid."""
    _finite(f)
    return AxisymScalar.from_coef(f.grid, f.coef * f.grid.KR**s)


def lambda_3d_pow_axisym(f, s):
    """Apply ``Lambda**s`` (multiplier ``(kr^2 + k3^2)**(s/2)``).

    Raises
    ------
    ConfinementError
        If ``f`` is not confined (see :func:`is_confined`).
    """
    _finite(f)
    _check_confined(f, strict=True)
    return AxisymScalar.from_coef(f.grid, f.coef * f.grid.K**s)


def laplacian(f):
    """``d_rr + d_r / r + d_33``."""
    return AxisymScalar.from_coef(f.grid, -f.grid.K**2 * f.coef)


def radial_derivative(f):
    """``d_r f`` through the order-0 to order-1 chain."""
    return AxisymScalar(f.grid, f.grid.synth1(-f.grid.KR * f.coef))


# term tables -------------------------------------------------------------
# factor: (source, Lambda' power, Lambda power, derivatives)
# term:   (sign, (outer Lambda' power, outer Lambda power, outer d3 order), factor, factor)

PRINTED_TERMS = (
    (+1, (1, -1, 0), ("P", -1, 0, "r"), ("P", -1, 0, "rz")),
    (-1, (1, -1, 0), ("M", -1, -1, "rz"), ("M", -1, 1, "r")),
    (+1, (-1, -1, 1), ("M", 1, -1, "r"), ("M", -1, 1, "r")),
    (-1, (-1, -1, 1), ("M", 1, -1, ""), ("M", 1, 1, "")),
    (-1, (-1, 0, 0), ("M", 1, -1, "r"), ("P", -1, 0, "rz")),
    (+1, (-1, 0, 0), ("M", 1, -1, ""), ("P", 1, 0, "z")),
    (-1, (-1, -1, 1), ("P", -1, 0, "r"), ("M", 1, 0, "r")),
    (+1, (-1, -1, 1), ("P", 1, 0, ""), ("P", 1, 0, "")),
    (+1, (-1, 0, 0), ("M", -1, -1, "rz"), ("P", 1, 0, "r")),
    (-1, (-1, 0, 0), ("M", 1, -1, "z"), ("P", 1, 0, "")),
)

DERIVED_TERMS = (
    (-1, (1, -1, 0), ("P", -1, 0, "r"), ("P", -1, 0, "rz")),
    (+1, (1, -1, 0), ("M", -1, -1, "rz"), ("M", -1, 1, "r")),
    (-1, (-1, -1, 1), ("M", 1, -1, "r"), ("M", -1, 1, "r")),
    (+1, (-1, -1, 1), ("M", 1, -1, ""), ("M", 1, 1, "")),
    (-1, (-1, 0, 0), ("M", 1, -1, "r"), ("P", -1, 0, "rz")),
    (+1, (-1, 0, 0), ("M", 1, -1, ""), ("P", 1, 0, "z")),
    (+1, (-1, -1, 1), ("P", -1, 0, "r"), ("P", 1, 0, "r")),
    (-1, (-1, -1, 1), ("P", 1, 0, ""), ("P", 1, 0, "")),
    (+1, (-1, 0, 0), ("M", -1, -1, "rz"), ("P", 1, 0, "r")),
    (-1, (-1, 0, 0), ("M", 1, -1, "z"), ("P", 1, 0, "")),
)

TERM_TABLES = {"printed": PRINTED_TERMS, "derived": DERIVED_TERMS}

# One-based term indices feeding the (v - v^r) and (v + v^r) equations.
SECTORS = {
    "printed": ((1, 2, 3, 4, 8), (5, 6, 7, 9, 10)),
    "derived": ((1, 2, 3, 4, 7, 8), (5, 6, 9, 10)),
}


def _table(signs):
    if not isinstance(signs, str):
        return tuple(signs)
    if signs not in TERM_TABLES:
        raise ValueError(f"signs must be one of {tuple(TERM_TABLES)}, got {signs!r}")
    return TERM_TABLES[signs]


def _factor_values(grid, sources, spec):
    src, a, b, der = spec
    c = sources[src] * grid.KR**a * grid.K**b
    if "z" in der:
        c = c * 1j * grid.K3
    if "r" in der:
        return grid.synth1(-grid.KR * c)
    return grid.synth0(c)


def _product_coef(grid, sources, term, dealias):
    _, _, f1, f2 = term
    c = grid.analyse(_factor_values(grid, sources, f1) * _factor_values(grid, sources, f2))
    return c * grid.zmask if dealias else c


def _outer(grid, c, outer):
    oa, ob, oz = outer
    c = c * grid.KR**oa * grid.K**ob
    if oz:
        c = c * (1j * grid.K3) ** oz
    return c


def _term_coef(grid, sources, term, dealias):
    return _outer(grid, _product_coef(grid, sources, term, dealias), term[1])


def term_coefs(v, signs="derived", dealias=True, sources=None):
    """Coefficients of every signed nonlinear term (before the ``1/(2 sqrt 2)``).

    Each term is evaluated on its own.  Terms sharing an outer operator can
    have large cancelling far fields, so the assembled right-hand side sums
    their products first (see :func:`nonlinear_sum`).

    Raises
    ------
    AssemblyError
        Naming the first term (one-based) that is not finite.
    """
    grid = v.grid
    if sources is None:
        c = v.coef
        cr = grid.reflect_coef(c)
        sources = {"P": c + cr, "M": c - cr}
    out = []
    for idx, term in enumerate(_table(signs), start=1):
        with np.errstate(all="ignore"):
            t = term[0] * _term_coef(grid, sources, term, dealias)
        if not np.all(np.isfinite(t)):
            raise AssemblyError(f"term {idx} of the axisymmetric right-hand side is not finite", idx)
        out.append(t)
    return out


def nonlinear_sum(grid, sources, signs="derived", dealias=True, select=None):
    """Signed sum of the selected terms (one-based indices; default all).

    Products sharing an outer operator are added before that operator is
    applied.  This is algebraically the plain sum but avoids the far-field
    cancellation between individually slowly decaying terms.
    """
    groups = {}
    for idx, term in enumerate(_table(signs), start=1):
        if select is not None and idx not in select:
            continue
        with np.errstate(all="ignore"):
            p = term[0] * _product_coef(grid, sources, term, dealias)
        if not np.all(np.isfinite(p)):
            raise AssemblyError(f"term {idx} of the axisymmetric right-hand side is not finite", idx)
        key = term[1]
        groups[key] = groups.get(key, 0) + p
    total = np.zeros(grid.shape, dtype=complex)
    for outer, p in groups.items():
        total += _outer(grid, p, outer)
    return total


def _sources(grid, c):
    cr = grid.reflect_coef(c)
    return {"P": c + cr, "M": c - cr}


def axisym_rhs_coef(grid, c, nu, signs="derived", dealias=True):
    total = nonlinear_sum(grid, _sources(grid, c), signs, dealias)
    return -nu * grid.K**2 * c + total / (2 * SQ2)


def axisym_rhs(v, nu, signs="derived", dealias=True):
    """Right-hand side ``dv/dt`` of the axisymmetric scalar equation.

    Parameters
    ----------
    v : AxisymScalar
    nu : float
    signs : {"derived", "printed"}
        Term table to assemble (see the module docstring).
    dealias : bool
        Apply the 2/3 rule in ``x3`` to every product.
    """
    _finite(v)
    _check_confined(v, strict=False)
    return AxisymScalar.from_coef(v.grid, axisym_rhs_coef(v.grid, v.coef, nu, signs, dealias))


def odd_even_rhs(v, nu, signs="derived", dealias=True):
    """Right-hand sides of the equations for ``M = v - v^r`` and ``P = v + v^r``.

    Returns ``(dM/dt, dP/dt)``; half their sum is :func:`axisym_rhs`.
    """
    _finite(v)
    grid = v.grid
    odd_idx, even_idx = SECTORS[signs]
    src = _sources(grid, v.coef)
    lap = -nu * grid.K**2
    dm = lap * src["M"] + nonlinear_sum(grid, src, signs, dealias, odd_idx) / SQ2
    dp = lap * src["P"] + nonlinear_sum(grid, src, signs, dealias, even_idx) / SQ2
    return AxisymScalar.from_coef(grid, dm), AxisymScalar.from_coef(grid, dp)


def oddness_residual(f):
    n = f.norm()
    return (f + f.reflect()).norm() / n if n > 0 else 0.0


def swirl_free_rhs(V, nu, signs="derived", dealias=True):
    """Reduced right-hand side for ``V = v - v^r`` in the sector ``v + v^r = 0``.

    Only the three terms built from ``M`` alone survive there.

    Raises
    ------
    ConstraintError
        If ``V`` is not odd in ``x3`` to within ``1e-10``.
    """
    _finite(V)
    res = oddness_residual(V)
    if res > 1e-10:
        raise ConstraintError(f"V must be odd in x3 (relative residual {res:.2e})")
    grid = V.grid
    sources = {"P": np.zeros(grid.shape, complex), "M": V.coef}
    mm = [i for i, t in enumerate(_table(signs), start=1) if t[2][0] == "M" and t[3][0] == "M"]
    total = nonlinear_sum(grid, sources, signs, dealias, mm)
    return AxisymScalar.from_coef(grid, -nu * grid.K**2 * V.coef + total / SQ2)


# coupling with the 3D grid --------------------------------------------------

def lift_to_3d(f, grid3):
    """Evaluate an axisymmetric profile on a 3D grid centred on the ``x3`` axis.

    The Fourier-Bessel series is summed at ``r = sqrt(x1^2 + x2^2)`` and set
    to zero for ``r >= R``; the ``x3`` dependence is interpolated spectrally.
    The two ``x3`` periods must agree.
    """
    ag = f.grid
    if not np.isclose(grid3.L[2], ag.Lz):
        raise ValueError("x3 periods of the two grids differ")
    xc = grid3.x_centered
    r = np.hypot(xc[0, :, :, 0], xc[1, :, :, 0])
    inside = r < ag.R
    J = scipy.special.j0(np.outer(r[inside], ag.kr))
    coef = f.coef
    n3 = grid3.n[2]
    q = np.fft.fftfreq(ag.nz, 1.0 / ag.nz).astype(int)
    q3 = np.fft.fftfreq(n3, 1.0 / n3).astype(int)
    cz = np.zeros((ag.nr, n3), dtype=complex)
    for j, qq in enumerate(q):
        hit = np.nonzero(q3 == qq)[0]
        if hit.size and abs(qq) < n3 // 2:
            cz[:, hit[0]] = coef[:, j]
    prof = np.zeros(grid3.n[:2] + (n3,), dtype=complex)
    prof[inside] = J @ cz
    return scipy.fft.ifft(prof, axis=2, norm="forward").real


def sample_from_3d(vc, grid3, agrid):
    """Sample a 3D field (coefficients ``vc``) at ``(r_i, 0, z_j)`` nodes."""
    if not np.isclose(grid3.L[2], agrid.Lz):
        raise ValueError("x3 periods of the two grids differ")
    c = vc.sum(axis=1)  # x2 = 0
    k1 = grid3.k[0][:, 0, 0]
    E = np.exp(1j * np.outer(agrid.r, k1))
    cz3 = E @ c  # (nr, n3) over k3
    n3 = grid3.n[2]
    q = np.fft.fftfreq(agrid.nz, 1.0 / agrid.nz).astype(int)
    q3 = np.fft.fftfreq(n3, 1.0 / n3).astype(int)
    cz = np.zeros((agrid.nr, agrid.nz), dtype=complex)
    for j, qq in enumerate(q3):
        hit = np.nonzero(q == qq)[0]
        if hit.size:
            cz[:, hit[0]] += cz3[:, j]
    return AxisymScalar(agrid, scipy.fft.ifft(cz, axis=1, norm="forward").real)


def confined_profile(grid, amplitude=1.0, width=0.6, z_modes=((1, 1.0, 0.0), (2, 0.0, 0.5))):
    """``A * Lap'^2 exp(-r^2 / s) * sum(a cos(q x3) + b sin(q x3))``.

    The radial factor has zero radial mean and vanishes rapidly, so
    every ``Lambda'`` power of it stays confined.
    """
    s = width
    kz = 2 * np.pi / grid.Lz

    def fn(r, z):
        rad = 16.0 / s**4 * (r**4 - 4 * s * r**2 + 2 * s**2) * np.exp(-r**2 / s)
        ang = sum(a * np.cos(q * kz * z) + b * np.sin(q * kz * z) for q, a, b in z_modes)
        return amplitude * rad * ang

    return AxisymScalar.from_function(grid, fn)


def evolve_axisym(v0, nu, dt, t_end, signs="derived", dealias=True, scheme="rk4-integrating-factor",
                  output_every=None):
    """Integrate the axisymmetric equation; returns ``[(t, AxisymScalar), ...]``."""
    from .errors import DivergenceError
    from .integrators import make_stepper
    grid = v0.grid
    stepper = make_stepper(scheme, -nu * grid.K**2, dt)
    n = int(round(t_end / dt))
    every = output_every or max(n, 1)
    c = v0.coef
    out = [(0.0, v0)]

    def nonlin(y):
        return axisym_rhs_coef(grid, y, 0.0, signs, dealias)

    for i in range(1, n + 1):
        c, _ = stepper.step(c, nonlin)
        if not np.all(np.isfinite(c)):
            raise DivergenceError(f"non-finite axisymmetric state after t = {(i - 1) * dt:g}",
                                  t_last_good=(i - 1) * dt, trajectory=out)
        if i % every == 0 or i == n:
            out.append((i * dt, AxisymScalar.from_coef(grid, c)))
    return out
