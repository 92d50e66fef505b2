"""
Stationary axisymmetric solutions in the potential ``w``.

With ``v = Lambda Lambda' w`` a steady state of the axisymmetric equation
solves

    -2 sqrt2 nu Lap Lap Lap' w = N(w),

where ``N`` has ten quadratic terms in ``w + w^r`` and ``w - w^r``.  The
terms are tabulated here directly in ``w`` (factors
``d^(r?) d3^(z?) Lambda'^a Lambda^b W``, ``Lap' = -Lambda'^2``,
``Lap = -Lambda^2`` folded into the coefficients) and evaluated with the
axisymmetric operator pipeline.  As in :mod:`selfdual.axisym` a ``"printed"``
and a ``"derived"`` table are kept; only the derived one is consistent with
the evolution equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
import scipy.special

from .axisym import (SQ2, AxisymScalar, _check_confined, _finite, axisym_rhs_coef,
                     nonlinear_sum, tail_fraction)
from .errors import StationarySolverError

# (sign, outer (a, b, dz), factor 1, factor 2); factors (source, a, b, derivs)
# with sources "P" = w + w^r and "M" = w - w^r.
PRINTED_W_TERMS = (
    (+1, (2, 0, 0), ("P", 0, 1, "r"), ("P", 0, 1, "rz")),
    (-1, (2, 0, 0), ("M", 0, 0, "rz"), ("M", 0, 2, "r")),
    (+1, (0, 0, 1), ("M", 2, 0, "r"), ("M", 0, 2, "r")),
    (-1, (0, 0, 1), ("M", 2, 0, ""), ("M", 2, 2, "")),
    (-1, (0, 1, 0), ("M", 2, 0, "r"), ("P", 0, 1, "rz")),
    (+1, (0, 1, 0), ("M", 2, 0, ""), ("P", 2, 1, "z")),
    (-1, (0, 0, 1), ("P", 0, 1, "r"), ("M", 2, 1, "r")),
    (+1, (0, 0, 1), ("P", 2, 1, ""), ("P", 2, 1, "")),
    (+1, (0, 1, 0), ("M", 0, 0, "rz"), ("P", 2, 1, "r")),
    (-1, (0, 1, 0), ("M", 2, 0, "z"), ("P", 2, 1, "")),
)

DERIVED_W_TERMS = (
    (-1, (2, 0, 0), ("P", 0, 1, "r"), ("P", 0, 1, "rz")),
    (+1, (2, 0, 0), ("M", 0, 0, "rz"), ("M", 0, 2, "r")),
    (-1, (0, 0, 1), ("M", 2, 0, "r"), ("M", 0, 2, "r")),
    (+1, (0, 0, 1), ("M", 2, 0, ""), ("M", 2, 2, "")),
    (-1, (0, 1, 0), ("M", 2, 0, "r"), ("P", 0, 1, "rz")),
    (+1, (0, 1, 0), ("M", 2, 0, ""), ("P", 2, 1, "z")),
    (+1, (0, 0, 1), ("P", 0, 1, "r"), ("P", 2, 1, "r")),
    (-1, (0, 0, 1), ("P", 2, 1, ""), ("P", 2, 1, "")),
    (+1, (0, 1, 0), ("M", 0, 0, "rz"), ("P", 2, 1, "r")),
    (-1, (0, 1, 0), ("M", 2, 0, "z"), ("P", 2, 1, "")),
)

W_TERM_TABLES = {"printed": PRINTED_W_TERMS, "derived": DERIVED_W_TERMS}

# Iterates whose top radial band holds more than this energy fraction are
# treated as having left the confined class.
SOLVER_TAIL_LIMIT = 1e-3


def _w_table(signs):
    if signs not in W_TERM_TABLES:
        raise ValueError(f"signs must be one of {tuple(W_TERM_TABLES)}, got {signs!r}")
    return W_TERM_TABLES[signs]


def viscous_symbol(grid, nu):
    """Symbol of ``-2 sqrt2 nu Lap Lap Lap'``, i.e. ``2 sqrt2 nu K^4 kr^2``."""
    return 2 * SQ2 * nu * grid.K**4 * grid.KR**2


def _parts_coef(grid, c, nu, signs, dealias):
    cr = grid.reflect_coef(c)
    sources = {"P": c + cr, "M": c - cr}
    nonlin = nonlinear_sum(grid, sources, _w_table(signs), dealias)
    return viscous_symbol(grid, nu) * c, nonlin


def residual_parts(w, nu, signs="derived", dealias=True):
    """Viscous and nonlinear parts; the residual is their difference.

    The viscous part is linear in ``w`` and the nonlinear part quadratic.
    """
    _finite(w)
    vis, non = _parts_coef(w.grid, w.coef, nu, signs, dealias)
    return AxisymScalar.from_coef(w.grid, vis), AxisymScalar.from_coef(w.grid, non)


def stationary_residual(w, nu, signs="derived", dealias=True):
    """Left side minus right side of the stationary equation for ``w``.

    Raises
    ------
    AssemblyError
        If a term is not finite; the exception names the term.
    """
    _finite(w)
    _check_confined(w, strict=False)
    vis, non = _parts_coef(w.grid, w.coef, nu, signs, dealias)
    return AxisymScalar.from_coef(w.grid, vis - non)


def substitution_oracle(w, nu, signs="derived", dealias=True):
    """``-2 sqrt2 Lambda Lambda' F(Lambda Lambda' w)`` with ``F`` the evolution right-hand side.

    This maps the time-derivative functional of the axisymmetric equation
    through ``v = Lambda Lambda' w``; a stationary ``v`` makes it vanish.
    """
    g = w.grid
    s = g.K * g.KR
    rhs = axisym_rhs_coef(g, s * w.coef, nu, signs, dealias)
    return AxisymScalar.from_coef(g, -2 * SQ2 * s * rhs)


def velocity_from_potential(w):
    """``v = Lambda Lambda' w``."""
    g = w.grid
    return AxisymScalar.from_coef(g, g.K * g.KR * w.coef)


# BMO^{-1} chain ----------------------------------------------------------------

def _radial_derivative_dense(w, oversample=4):
    g = w.grid
    r = np.linspace(0.0, g.R, oversample * g.nr + 1)
    J1 = scipy.special.j1(np.outer(r, g.kr))
    cz = -g.KR * w.coef  # order-1 coefficients of w_r
    vals = np.fft.ifft(J1 @ cz, axis=1, norm="forward").real
    return r, vals


def _dyadic_oscillation(f, levels):
    """Largest mean oscillation over dyadic squares of a periodic 2D array."""
    best = 0.0
    ny, nx = f.shape
    for j in range(levels + 1):
        m = 2**j
        if ny % m or nx % m:
            break
        blocks = f.reshape(m, ny // m, m, nx // m).swapaxes(1, 2).reshape(m, m, -1)
        mean = blocks.mean(axis=2, keepdims=True)
        best = max(best, float(np.abs(blocks - mean).mean(axis=2).max()))
    return best


@dataclass(frozen=True)
class BMORecord:
    sup_w_r: float
    bmo_proxy: float


def bmo_diagnostic(w, levels=4, oversample=4):
    """``sup |w_r|`` and a dyadic mean-oscillation proxy for ``Lambda' w``.

    The proxy samples ``Lambda' w`` on the meridional slice
    ``x1 in (-R, R)``, ``x2 = 0`` and takes the largest mean oscillation
    over dyadic squares down to ``levels`` halvings.  It is a proxy for
    the BMO seminorm, not the norm itself.
    """
    g = w.grid
    _, wr = _radial_derivative_dense(w, oversample)
    sup = float(np.max(np.abs(wr))) if wr.size else 0.0

    n = 2 ** (levels + 2)
    x1 = (np.arange(n) + 0.5) / n * 2 * g.R - g.R
    z = np.arange(n) / n * g.Lz
    J0 = scipy.special.j0(np.outer(np.abs(x1), g.kr))
    E = np.exp(1j * np.outer(g.k3, z))
    lw = (J0 @ (g.KR * w.coef) @ E).real
    osc = _dyadic_oscillation(lw, levels)
    return BMORecord(sup_w_r=sup, bmo_proxy=osc)


def j1_bump_potential(grid, height=1.0, mode=1):
    """Potential ``w`` whose radial derivative is a ``J1`` bump of the given height."""
    k = grid.kr[mode - 1]
    x_star = scipy.optimize.minimize_scalar(lambda x: -scipy.special.j1(x), bounds=(1.0, 3.0),
                                            method="bounded").x
    peak = scipy.special.j1(x_star)
    return AxisymScalar.from_function(grid, lambda r, z: -height * scipy.special.j0(k * r) / (k * peak)
                                      + 0.0 * z)


# Newton-Krylov search ------------------------------------------------------------

@dataclass
class StationaryResult:
    """Outcome of :func:`solve_stationary`.

    ``converged`` is False when the iteration stopped at ``max_iter``;
    ``w`` then holds the last iterate and ``history`` the full log.
    """

    w: AxisymScalar
    residual_norm: float
    converged: bool
    iterations: int
    history: list = field(default_factory=list)
    message: str = ""


def solve_stationary(w0, nu, max_iter=50, tol=1e-10, signs="derived", dealias=True, verbose=False):
    """Damped Newton-Krylov search for a stationary ``w``.

    Solves ``w - L^{-1} N(w) = 0`` with ``L`` the viscous operator, which is
    the stationary equation preconditioned by its dominant linear part.
    The line search is Armijo backtracking.  ``history`` records the
    preconditioned residual norm after every accepted step.

    Raises
    ------
    StationarySolverError
        If an iterate becomes non-finite or leaves the confined class.
    """
    if nu <= 0:
        raise ValueError("nu must be positive for the viscous preconditioner")
    _finite(w0)
    g = w0.grid
    Linv = 1.0 / viscous_symbol(g, nu)
    shape = g.shape
    history = []

    def F(x):
        vals = x.reshape(shape)
        if not np.all(np.isfinite(vals)):
            raise StationarySolverError("non-finite stationary iterate")
        c = g.analyse(vals)
        if tail_fraction(g, c) > SOLVER_TAIL_LIMIT:
            raise StationarySolverError("stationary iterate is no longer confined")
        vis, non = _parts_coef(g, c, nu, signs, dealias)
        out = g.synth0(Linv * (vis - non))
        if not np.all(np.isfinite(out)):
            raise StationarySolverError("non-finite preconditioned residual")
        return out.ravel()

    def norm(x):
        return float(np.linalg.norm(x) / np.sqrt(x.size))

    x0 = np.asarray(w0.values, dtype=float).ravel()
    r0 = norm(F(x0))
    history.append(r0)
    if r0 <= tol:
        return StationaryResult(w0, r0, True, 0, history, "initial guess satisfies tolerance")

    def callback(x, fx):
        history.append(norm(fx))

    try:
        x = scipy.optimize.newton_krylov(F, x0, f_tol=tol * np.sqrt(x0.size), maxiter=max_iter,
                                         line_search="armijo", callback=callback, verbose=verbose)
        converged, msg = True, "converged"
    except scipy.optimize.NoConvergence as exc:
        x = np.asarray(exc.args[0], dtype=float).ravel()
        converged, msg = False, f"no convergence after {max_iter} iterations"
    w = AxisymScalar(g, x.reshape(shape))
    vis, non = _parts_coef(g, w.coef, nu, signs, dealias)
    return StationaryResult(w, g.norm_coef(vis - non), converged, len(history) - 1, history, msg)
