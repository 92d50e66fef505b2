"""
Pseudo-spectral incompressible Navier-Stokes in rotational form.

The projected equation is ``du/dt = nu Lap u + P[u x omega]`` with ``P`` the
Leray projector; pressure and ``|u|^2/2`` are gradients and drop out.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .diagnostics import Accumulators, compute_record, flux_rates, write_csv
from .errors import DivergenceError, SnapshotKindError
from .integrators import make_stepper
from .spectral import (SpectralScalar, SpectralVector, _reflect_coef, curl_coef, fftn3, ifftn3,
                       leray_coef, make_grid)


@dataclass(frozen=True)
class NSState:
    t: float
    u: SpectralVector


def nonlinear_coef(grid, c, dealias=True):
    """Leray-projected ``u x omega`` for velocity coefficients ``c``."""
    u = ifftn3(c).real
    w = ifftn3(curl_coef(grid, c)).real
    prod = fftn3(np.cross(u, w, axis=0))
    if dealias:
        prod *= grid.dealias_mask
    out = leray_coef(grid, prod)
    out[:, 0, 0, 0] = 0.0
    return out


def nonlinear_rhs_ns(u, dealias=True):
    """``P[dealias(u x curl u)]`` evaluated with products in physical space."""
    return SpectralVector(u.grid, nonlinear_coef(u.grid, u.coef, dealias), divergence_free=True)


def linear_symbol(grid, nu):
    return -nu * grid.k2


def check_cfl(u_phys, grid, dt, cfl=0.5):
    umax = float(np.sqrt(np.max(np.sum(u_phys**2, axis=0))))
    if umax > 0 and dt > cfl * grid.dx / umax:
        warnings.warn(f"time step {dt:g} exceeds CFL bound {cfl * grid.dx / umax:.3g}",
                      RuntimeWarning, stacklevel=3)
    return umax


def step(state, cfg, stepper=None):
    """Advance an :class:`NSState` by one step of ``cfg.scheme``.

    Warns when ``dt`` violates the CFL bound and raises
    :class:`DivergenceError` when the new state is not finite.
    """
    grid = state.u.grid
    check_cfl(state.u.to_physical(), grid, cfg.dt, cfg.cfl)
    if stepper is None:
        stepper = make_stepper(cfg.scheme, linear_symbol(grid, cfg.nu), cfg.dt)
    c, _ = stepper.step(state.u.coef, lambda y: nonlinear_coef(grid, y, cfg.dealias))
    if not np.all(np.isfinite(c)):
        raise DivergenceError(f"non-finite velocity after t = {state.t:g}", t_last_good=state.t)
    return NSState(state.t + cfg.dt, SpectralVector(grid, c, divergence_free=True))


def selfdual_initial(v0, basis):
    """``u0 = u_plus - u_plus^r`` with ``u_plus`` reconstructed from ``v0``.

    The result is odd, ``u0(-x) = -u0(x)``, and has zero helicity.
    """
    up = basis.h * v0.coef
    return SpectralVector(v0.grid, up - _reflect_coef(up), divergence_free=True)


def dual_transform(u):
    """The helical duality ``u_pm(x) -> -u_mp(-x)`` acting on the full velocity."""
    return SpectralVector(u.grid, -_reflect_coef(u.coef), u.divergence_free,
                          {"+": "-", "-": "+", None: None}[u.helical_sign])


def _band_noise(grid, rng, ncomp, band):
    noise = rng.standard_normal((ncomp,) + grid.n)
    c = fftn3(noise) if ncomp > 1 else fftn3(noise[0])
    mask = (grid.kmag > 0) & (grid.kmag <= band) & grid.retained
    return c * mask


def random_velocity(grid, rng, band=4.0, amplitude=1.0):
    """Random divergence-free field with ``0 < |k| <= band`` and rms ``amplitude``."""
    c = leray_coef(grid, _band_noise(grid, rng, 3, band))
    c[:, 0, 0, 0] = 0.0
    rms = np.sqrt(np.sum(np.abs(c) ** 2))
    if rms > 0:
        c *= amplitude / rms
    return SpectralVector(grid, c, divergence_free=True)


def random_scalar(grid, rng, band=4.0, amplitude=1.0):
    """Random real zero-mean scalar with ``0 < |k| <= band`` and rms ``amplitude``."""
    c = _band_noise(grid, rng, 1, band)
    rms = np.sqrt(np.sum(np.abs(c) ** 2))
    if rms > 0:
        c *= amplitude / rms
    return SpectralScalar(grid, c, zero_mean=True)


def taylor_green(grid, amplitude=1.0):
    x1, x2, x3 = (2 * np.pi / L * x for L, x in zip(grid.L, grid.x))
    u = amplitude * np.stack([np.sin(x1) * np.cos(x2) * np.cos(x3),
                              -np.cos(x1) * np.sin(x2) * np.cos(x3),
                              np.zeros(grid.n)])
    return SpectralVector.from_physical(grid, u, divergence_free=True)


def beltrami_shell(grid, amplitude=1.0):
    """ABC flow ``A(sin x3 + cos x2, sin x1 + cos x3, sin x2 + cos x1)``; ``curl u = u``."""
    x1, x2, x3 = grid.x
    u = amplitude * np.stack([np.sin(x3) + np.cos(x2),
                              np.sin(x1) + np.cos(x3),
                              np.sin(x2) + np.cos(x1)])
    return SpectralVector.from_physical(grid, u, divergence_free=True)


def initial_velocity(cfg, grid, rng=None):
    init = cfg.initial
    if init.kind == "taylor-green":
        return taylor_green(grid, init.amplitude)
    if init.kind == "random-band":
        rng = rng if rng is not None else np.random.default_rng(init.seed)
        return random_velocity(grid, rng, init.band, init.amplitude)
    if init.kind == "file":
        from .snapshot import read_snapshot
        snap = read_snapshot(init.path)
        if snap.kind != "vector3d":
            raise SnapshotKindError(f"{init.path}: expected a vector3d snapshot, got {snap.kind}")
        return SpectralVector.from_physical(snap.grid, snap.values, divergence_free=True)
    raise ValueError(f"unknown initial kind {init.kind!r}")


def integrate(y0, stepper, nonlin, rates, n_steps, dt, output_every, sample, t0=0.0):
    """Generic driver shared by the 3D solvers.

    ``sample(t, y, acc)`` builds one output item; it is called at ``t0``,
    every ``output_every`` steps, and at the final step.
    """
    acc = Accumulators()
    traj = [sample(t0, y0, acc)]
    y, t = y0, t0
    stepper.reset()
    for i in range(1, n_steps + 1):
        y_new, inc = stepper.step(y, nonlin, rates)
        if not np.all(np.isfinite(y_new)) or (inc is not None and not np.all(np.isfinite(inc))):
            raise DivergenceError(f"non-finite state after t = {t:g}", t_last_good=t, trajectory=traj)
        y, t = y_new, t0 + i * dt
        acc.add(inc)
        if i % output_every == 0 or i == n_steps:
            traj.append(sample(t, y, acc))
    return traj


def evolve(u0, cfg, record=True):
    """Integrate from ``u0`` to ``cfg.t_end``; returns ``[(NSState, record), ...]``."""
    grid = u0.grid
    stepper = make_stepper(cfg.scheme, linear_symbol(grid, cfg.nu), cfg.dt)
    check_cfl(u0.to_physical(), grid, cfg.dt, cfg.cfl)

    def sample(t, c, acc):
        u = SpectralVector(grid, c, divergence_free=True)
        return NSState(t, u), (compute_record(u, t, acc) if record else None)

    return integrate(u0.coef, stepper, lambda y: nonlinear_coef(grid, y, cfg.dealias),
                     flux_rates(grid, cfg.nu) if record else None,
                     cfg.n_steps, cfg.dt, cfg.output_every, sample)


def run(cfg, output_dir=None, u0=None):
    """Run a configured simulation, writing CSV diagnostics and a final snapshot.

    On divergence the partial CSV is still written before the error propagates.
    """
    from .snapshot import write_snapshot
    grid = make_grid(cfg.resolution, cfg.box_size)
    if u0 is None:
        u0 = initial_velocity(cfg, grid)
    out = output_dir if output_dir is not None else cfg.output_dir
    try:
        traj = evolve(u0, cfg)
    except DivergenceError as exc:
        if out:
            os.makedirs(out, exist_ok=True)
            write_csv(os.path.join(out, "diagnostics.csv"), [r for _, r in exc.trajectory])
        raise
    if out:
        os.makedirs(out, exist_ok=True)
        write_csv(os.path.join(out, "diagnostics.csv"), [r for _, r in traj])
        final = traj[-1][0]
        write_snapshot(os.path.join(out, "final.sdns"), final.u.to_physical(), grid, kind="vector3d",
                       time=final.t, nu=cfg.nu, scheme=cfg.scheme)
    return traj


__all__ = ["NSState", "nonlinear_rhs_ns", "step", "selfdual_initial", "dual_transform", "run",
           "evolve", "random_velocity", "random_scalar", "taylor_green", "beltrami_shell"
           ]
