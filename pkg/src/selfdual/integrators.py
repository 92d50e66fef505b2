"""
Time steppers for ``dy/dt = L y + N(y)`` with diagonal ``L``.

Both steppers optionally integrate auxiliary rates ``q(y)`` alongside the
state (dissipation, helicity flux and so on).  The rates are treated as extra
ODE components ``dQ/dt = q(y)`` advanced by the same scheme, so the running
integrals carry the scheme's own order of accuracy.
"""

import numpy as np

SCHEMES = ("rk4-integrating-factor", "imex-cn-ab2")


class IFRK4:
    """Integrating-factor (Lawson) fourth-order Runge-Kutta.

    The linear part is integrated exactly through ``exp(L dt)``.

    Parameters
    ----------
    lin : ndarray
        Diagonal symbol of ``L`` (real, nonpositive for dissipation).
    dt : float
        Step size.
    """

    name = "rk4-integrating-factor"

    def __init__(self, lin, dt):
        self.dt = float(dt)
        self.e_half = np.exp(0.5 * self.dt * lin)
        self.e_full = self.e_half**2

    def reset(self):
        pass

    def step(self, y, nonlin, rates=None):
        """Advance one step; returns ``(y_new, integral_increments)``."""
        dt, eh, ef = self.dt, self.e_half, self.e_full
        k1 = nonlin(y)
        y2 = eh * (y + 0.5 * dt * k1)
        k2 = nonlin(y2)
        y3 = eh * y + 0.5 * dt * k2
        k3 = nonlin(y3)
        y4 = ef * y + dt * eh * k3
        k4 = nonlin(y4)
        y_new = ef * y + dt / 6.0 * (ef * k1 + 2.0 * eh * (k2 + k3) + k4)
        if rates is None:
            return y_new, None
        q = [np.asarray(rates(s), dtype=float) for s in (y, y2, y3, y4)]
        return y_new, dt / 6.0 * (q[0] + 2.0 * q[1] + 2.0 * q[2] + q[3])


class IMEXCNAB2:
    """Crank-Nicolson on ``L`` with second-order Adams-Bashforth on ``N``.

    The first step uses forward Euler for ``N``.  Rate integrals use the
    trapezoid rule between step endpoints.
    """

    name = "imex-cn-ab2"

    def __init__(self, lin, dt):
        self.dt = float(dt)
        self.plus = 1.0 + 0.5 * self.dt * lin
        self.minus_inv = 1.0 / (1.0 - 0.5 * self.dt * lin)
        self._prev = None

    def reset(self):
        self._prev = None

    def step(self, y, nonlin, rates=None):
        dt = self.dt
        n_now = nonlin(y)
        if self._prev is None:
            explicit = n_now
        else:
            explicit = 1.5 * n_now - 0.5 * self._prev
        self._prev = n_now
        y_new = self.minus_inv * (self.plus * y + dt * explicit)
        if rates is None:
            return y_new, None
        q0 = np.asarray(rates(y), dtype=float)
        q1 = np.asarray(rates(y_new), dtype=float)
        return y_new, 0.5 * dt * (q0 + q1)


def make_stepper(scheme, lin, dt):
    if scheme == "rk4-integrating-factor":
        return IFRK4(lin, dt)
    if scheme == "imex-cn-ab2":
        return IMEXCNAB2(lin, dt)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
