"""
The reduced scalar equation for self-dual flows.

Writing ``u_plus = v * h`` with the unit helical basis, a self-dual velocity
``u = u_plus - u_plus^r`` evolves exactly when the real scalar ``v`` solves

    v_t - nu Lap v = conj(h) . F[(u_plus - u_plus^r) x (Lambda u_plus + Lambda u_plus^r)].

Two evaluators of the right-hand side are provided.  :func:`scalar_rhs` forms
the cross product in physical space; :func:`scalar_rhs_direct` sums the four
triad kernels mode by mode and serves as an oracle on small grids.
"""

from __future__ import annotations

import numpy as np

from .diagnostics import compute_record, flux_rates
from .errors import GridTooLargeError
from .integrators import make_stepper
from .navier_stokes import check_cfl, integrate, linear_symbol
from .spectral import SpectralScalar, SpectralVector, fftn3, ifftn3

DIRECT_MAX_MODES = 16**3


def selfdual_coef(basis, vc):
    """Velocity coefficients ``u_plus - u_plus^r``; the reflection is a conjugation."""
    up = basis.h * vc
    return up - np.conj(up)


def scalar_nonlinear_coef(basis, vc, dealias=True):
    grid = basis.grid
    up = basis.h * vc
    upr = np.conj(up)
    a = ifftn3(up - upr).real
    b = ifftn3(grid.kmag * (up + upr)).real
    prod = fftn3(np.cross(a, b, axis=0))
    if dealias:
        prod *= grid.dealias_mask
    return np.einsum("i...,i...->...", np.conj(basis.h), prod)


def scalar_rhs(v, basis, nu, dealias=True):
    """Full right-hand side ``-nu |k|^2 v + N(v)`` of the scalar equation."""
    grid = basis.grid
    out = -nu * grid.k2 * v.coef + scalar_nonlinear_coef(basis, v.coef, dealias)
    return SpectralScalar(grid, out, zero_mean=True)


def _flat_index(freqs, n):
    return (freqs[..., 0] % n[0]) * (n[1] * n[2]) + (freqs[..., 1] % n[1]) * n[2] + freqs[..., 2] % n[2]


def _cross(a, b):
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1], axis=-1)


def scalar_rhs_direct(v, basis, nu, dealias=True, block=128):
    """Direct four-term triad sum for the scalar right-hand side.

    For every output mode ``xi`` the sum runs over all ``eta`` with
    ``zeta = xi - eta``:

        sum |eta| conj(h(xi)) . [ h(zeta)       x h(eta)       ] v(zeta)  v(eta)
      - sum |eta| conj(h(xi)) . [ conj h(zeta)  x h(eta)       ] v(-zeta) v(eta)
      + sum |eta| conj(h(xi)) . [ h(zeta)       x conj h(eta)  ] v(zeta)  v(-eta)
      - sum |eta| conj(h(xi)) . [ conj h(zeta)  x conj h(eta)  ] v(-zeta) v(-eta)

    Without dealiasing ``zeta`` is taken modulo the grid, which is the exact
    discrete convolution a collocation product computes.  With dealiasing
    only true triads are summed and the output is restricted to the 2/3 band.

    Raises
    ------
    GridTooLargeError
        For grids with more than ``16**3`` modes (the cost is quadratic in
        the mode count).
    """
    grid = basis.grid
    n = grid.n
    N = grid.size
    if N > DIRECT_MAX_MODES:
        raise GridTooLargeError(f"direct evaluation limited to 16^3 modes, grid has {n}")

    f = np.stack(np.meshgrid(*grid.freqs, indexing="ij"), axis=-1).reshape(N, 3)
    scale = np.array([2 * np.pi / L for L in grid.L])
    H = np.moveaxis(basis.h, 0, -1).reshape(N, 3)
    Hc = np.conj(H)
    V = v.coef.reshape(N)
    Vneg = V[_flat_index(-f, n)]
    kmag = np.linalg.norm(f * scale, axis=1)
    half = np.array(n) // 2

    out = np.zeros(N, dtype=complex)
    eta_w = kmag  # |eta| weights, indexed by eta
    for start in range(0, N, block):
        xi = f[start:start + block]
        if dealias:
            keep = np.all(np.abs(xi) <= np.array(grid.cutoff), axis=1)
        else:
            keep = np.ones(len(xi), bool)
        zf = xi[:, None, :] - f[None, :, :]
        if dealias:
            valid = np.all((zf >= -half) & (zf < half), axis=2)
        else:
            valid = np.ones(zf.shape[:2], bool)
        zi = _flat_index(zf, n)
        Hz, Hzc = H[zi], Hc[zi]
        Vz, Vzn = V[zi], Vneg[zi]
        hx = Hc[start:start + block][:, None, :]
        # a . (b x conj h(xi)) equals conj h(xi) . (a x b)
        ce = _cross(H[None], hx)
        cec = _cross(Hc[None], hx)
        t1 = np.sum(Hz * ce, axis=2) * Vz * V[None]
        t2 = np.sum(Hzc * ce, axis=2) * Vzn * V[None]
        t3 = np.sum(Hz * cec, axis=2) * Vz * Vneg[None]
        t4 = np.sum(Hzc * cec, axis=2) * Vzn * Vneg[None]
        terms = (t1 - t2 + t3 - t4) * eta_w[None] * valid
        out[start:start + block] = np.where(keep, terms.sum(axis=1), 0.0)

    out = out.reshape(n) - nu * grid.k2 * v.coef
    return SpectralScalar(grid, out, zero_mean=True)


def run_scalar(cfg, v0, basis, record=True):
    """Integrate the scalar equation from ``v0`` to ``cfg.t_end``.

    Returns ``[(t, v, record), ...]`` where each record describes the
    reconstructed self-dual velocity.
    """
    grid = basis.grid
    stepper = make_stepper(cfg.scheme, linear_symbol(grid, cfg.nu), cfg.dt)
    rates_u = flux_rates(grid, cfg.nu)
    check_cfl(ifftn3(selfdual_coef(basis, v0.coef)).real, grid, cfg.dt, cfg.cfl)

    def sample(t, vc, acc):
        v = SpectralScalar(grid, vc, zero_mean=True)
        rec = None
        if record:
            u = SpectralVector(grid, selfdual_coef(basis, vc), divergence_free=True)
            rec = compute_record(u, t, acc)
        return t, v, rec

    return integrate(v0.coef, stepper, lambda y: scalar_nonlinear_coef(basis, y, cfg.dealias),
                     (lambda y: rates_u(selfdual_coef(basis, y))) if record else None,
                     cfg.n_steps, cfg.dt, cfg.output_every, sample)


def reconstruct_velocity(v, basis):
    """Self-dual velocity ``u_plus - u_plus^r`` for a scalar profile."""
    return SpectralVector(basis.grid, selfdual_coef(basis, v.coef), divergence_free=True)
