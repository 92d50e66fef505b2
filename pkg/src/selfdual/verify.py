"""
End-to-end checks shared by the command line and the acceptance suite.
"""

from __future__ import annotations

import numpy as np

from .axisym import (AxisymGrid, confined_profile, evolve_axisym, lift_to_3d, sample_from_3d)
from .config import SimConfig
from .helical import build_basis
from .integrators import make_stepper
from .navier_stokes import (dual_transform, evolve, random_scalar, random_velocity,
                            selfdual_initial)
from .scalar import reconstruct_velocity, run_scalar, scalar_nonlinear_coef
from .spectral import SpectralScalar, make_grid


def equivalence_check(resolution=32, nu=0.05, dt=1e-3, t_end=0.5, band=4.0, amplitude=1.0, seed=0,
                      scheme="rk4-integrating-factor", dealias=True, output_every=50):
    """Evolve self-dual data by the full solver and by the scalar equation.

    Returns ``{"max_rel_dev", "times", "deviations"}`` where deviations are
    ``||u_ns(t) - u_scalar(t)|| / ||u_ns(t)||`` at each output time.
    """
    cfg = SimConfig(resolution=(resolution,) * 3, nu=nu, dt=dt, t_end=t_end, scheme=scheme,
                    dealias=dealias, output_every=output_every)
    grid = make_grid(resolution)
    basis = build_basis(grid)
    v0 = random_scalar(grid, np.random.default_rng(seed), band, amplitude)
    u0 = selfdual_initial(v0, basis)
    ns = evolve(u0, cfg, record=False)
    sc = run_scalar(cfg, v0, basis, record=False)
    times, devs = [], []
    for (state, _), (t, v, _) in zip(ns, sc):
        u = reconstruct_velocity(v, basis)
        devs.append((state.u - u).norm() / state.u.norm())
        times.append(t)
    return {"max_rel_dev": float(max(devs)), "times": times, "deviations": devs}


def symmetry_check(resolution=32, nu=0.05, dt=1e-3, t_end=0.5, band=4.0, amplitude=1.0, seed=0,
                   scheme="rk4-integrating-factor", dealias=True, output_every=50):
    """Compare ``evolve(D u0)`` with ``D evolve(u0)`` for the helical duality ``D``."""
    cfg = SimConfig(resolution=(resolution,) * 3, nu=nu, dt=dt, t_end=t_end, scheme=scheme,
                    dealias=dealias, output_every=output_every)
    grid = make_grid(resolution)
    u0 = random_velocity(grid, np.random.default_rng(seed), band, amplitude)
    a = evolve(dual_transform(u0), cfg, record=False)
    b = evolve(u0, cfg, record=False)
    times, devs = [], []
    for (sa, _), (sb, _) in zip(a, b):
        db = dual_transform(sb.u)
        devs.append((sa.u - db).norm() / db.norm())
        times.append(sa.t)
    return {"max_rel_dev": float(max(devs)), "times": times, "deviations": devs}


def axisym_cross_check(nr=64, nz=16, R=2 * np.pi, n3d=192, box_factor=3.0, nu=0.05, dt=0.01,
                       t_end=0.1, amplitude=0.05, width=0.6, signs="derived"):
    """Evolve confined axisymmetric data with both the axisymmetric and 3D scalar solvers.

    The 3D solver runs on a periodic box of side ``box_factor * R`` around
    the axis; the final 3D state is sampled back at the axisymmetric nodes.
    Returns the relative L2 difference at ``t_end`` together with the
    relative change of the state, which shows the check is not trivial.
    """
    ag = AxisymGrid(nr, nz, R=R, Lz=2 * np.pi)
    g = make_grid((n3d, n3d, nz), (box_factor * R, box_factor * R, 2 * np.pi))
    basis = build_basis(g)
    v0 = confined_profile(ag, amplitude=amplitude, width=width)
    va = evolve_axisym(v0, nu, dt, t_end, signs=signs)[-1][1]
    V = SpectralScalar.from_physical(g, lift_to_3d(v0, g))
    stepper = make_stepper("rk4-integrating-factor", -nu * g.k2, dt)
    y = V.coef
    for _ in range(int(round(t_end / dt))):
        y, _ = stepper.step(y, lambda c: scalar_nonlinear_coef(basis, c, True))
    v3 = sample_from_3d(y, g, ag)
    v30 = sample_from_3d(V.coef, g, ag)
    return {"rel_dev": float((va - v3).norm() / v3.norm()),
            "rel_change": float((v3 - v30).norm() / v3.norm())}


def lifted_swirl_fraction(v, grid3):
    """``||u_theta|| / ||u||`` of the self-dual velocity built from ``v`` lifted to ``grid3``."""
    basis = build_basis(grid3)
    V = SpectralScalar.from_physical(grid3, lift_to_3d(v, grid3))
    u = reconstruct_velocity(V, basis).to_physical()
    x = grid3.x_centered
    r = np.hypot(x[0], x[1])
    safe = np.where(r > 0, r, 1.0)
    ut = np.where(r > 0, (-x[1] * u[0] + x[0] * u[1]) / safe, 0.0)
    un = np.linalg.norm(u)
    return float(np.linalg.norm(ut) / un) if un > 0 else 0.0
