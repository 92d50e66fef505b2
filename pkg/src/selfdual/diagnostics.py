"""
Energies, helicity, critical energies and blow-up monitors.

All quadratic quantities are evaluated spectrally through Parseval:
``int f g dx = vol * sum_k f(k) conj(g(k))``.  Running time integrals are
supplied by the steppers (see :mod:`selfdual.integrators`) through
:func:`flux_rates`, except the BKM integral which is accumulated by the
trapezoid rule at output cadence.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import InsufficientDataError, ScalingError
from .spectral import SpectralVector, _reflect_coef, curl_coef, ifftn3

CSV_COLUMNS = ("t", "E", "D", "H_inst", "H_visc", "Ec_plus", "Ec_minus",
               "max_vort", "bkm", "selfdual_res", "div_res", "tail_frac")

TAIL_FLAG = 0.01


@dataclass
class DiagnosticsRecord:
    t: float
    E: float
    D: float
    H_inst: float
    H_visc: float
    Ec_plus: float
    Ec_minus: float
    max_vort: float
    bkm: float
    selfdual_res: float
    div_res: float
    tail_frac: float

    def as_row(self):
        return [getattr(self, c) for c in CSV_COLUMNS]


@dataclass
class Accumulators:
    """Running time integrals carried between records.

    ``flux`` holds the integrals of :func:`flux_rates` in order
    ``(D, H_visc, Ec_plus, Ec_minus)``.
    """

    flux: np.ndarray = field(default_factory=lambda: np.zeros(4))
    bkm: float = 0.0
    last_t: float | None = None
    last_vort: float = 0.0

    def add(self, increments):
        if increments is not None:
            self.flux = self.flux + increments


def _coef(u):
    return u.coef if isinstance(u, SpectralVector) else np.asarray(u)


def helical_split_density(grid, c):
    """Per-mode ``|u_plus|^2`` and ``|u_minus|^2`` of a divergence-free field."""
    mag2 = np.sum(np.abs(c) ** 2, axis=0)
    w = curl_coef(grid, c) * grid.inv_kmag
    sigma = np.sum(c * np.conj(w), axis=0).real
    return 0.5 * (mag2 + sigma) * grid.retained, 0.5 * (mag2 - sigma) * grid.retained


def flux_rates(grid, nu):
    """Integrand rates ``(D, H_visc, Ec_plus, Ec_minus)`` as a function of coefficients."""
    vol = grid.volume
    k2, k3 = grid.k2, grid.kmag**3

    def rates(c):
        if nu == 0:
            return np.zeros(4)
        mag2 = np.sum(np.abs(c) ** 2, axis=0)
        p, m = helical_split_density(grid, c)
        return nu * vol * np.array([
            np.sum(k2 * mag2),
            np.sum(k3 * (p - m)),
            np.sum(k3 * p),
            np.sum(k3 * m),
        ])

    return rates


def energy(u):
    """``E = 1/2 ||u||^2``."""
    c = _coef(u)
    return 0.5 * u.grid.volume * float(np.sum(np.abs(c) ** 2))


def helicity(u):
    """Instantaneous helicity ``1/2 int u . curl u``."""
    c = _coef(u)
    w = curl_coef(u.grid, c)
    return 0.5 * u.grid.volume * float(np.sum(c * np.conj(w)).real)


def critical_energy(u):
    """Instantaneous ``1/2 ||Lambda^{1/2} u||^2``."""
    c = _coef(u)
    return 0.5 * u.grid.volume * float(np.sum(u.grid.kmag * np.abs(c) ** 2))


def critical_split(u):
    """Instantaneous critical energies of the two helical sectors."""
    p, m = helical_split_density(u.grid, _coef(u))
    vol, k = u.grid.volume, u.grid.kmag
    return 0.5 * vol * float(np.sum(k * p)), 0.5 * vol * float(np.sum(k * m))


def tail_fraction(grid, c):
    """Energy fraction in the top third of the resolved band.

    A mode counts as tail when ``max_i |f_i| / cutoff_i > 2/3`` where ``f`` is
    its integer frequency and ``cutoff`` the dealias limit.
    """
    mag2 = np.sum(np.abs(c) ** 2, axis=0) if c.ndim == 4 else np.abs(c) ** 2
    total = float(np.sum(mag2))
    if total == 0:
        return 0.0
    rho = np.zeros(grid.n)
    for ax, (f, cut) in enumerate(zip(grid.freqs, grid.cutoff)):
        shape = [1, 1, 1]
        shape[ax] = -1
        rho = np.maximum(rho, (np.abs(f) / cut).reshape(shape))
    return float(np.sum(mag2[rho > 2.0 / 3.0]) / total)


def max_vorticity(u):
    """Grid sup of ``|curl u|`` over the collocation points."""
    w = ifftn3(curl_coef(u.grid, _coef(u))).real
    return float(np.sqrt(np.max(np.sum(w**2, axis=0))))


def selfdual_residual(u):
    """``||u + u^r|| / ||u||``; zero for the zero field."""
    c = _coef(u)
    n = np.linalg.norm(c)
    return float(np.linalg.norm(c + _reflect_coef(c)) / n) if n > 0 else 0.0


def compute_record(u, t, acc):
    """Build a :class:`DiagnosticsRecord` for velocity ``u`` at time ``t``.

    ``acc`` must already hold the flux integrals up to ``t``; its BKM
    integral is advanced here by the trapezoid rule.
    """
    vort = max_vorticity(u)
    if acc.last_t is not None and t > acc.last_t:
        acc.bkm += 0.5 * (t - acc.last_t) * (vort + acc.last_vort)
    acc.last_t, acc.last_vort = t, vort
    ecp, ecm = critical_split(u)
    d, hv, fp, fm = (float(x) for x in acc.flux)
    return DiagnosticsRecord(
        t=float(t),
        E=energy(u),
        D=d,
        H_inst=helicity(u),
        H_visc=hv,
        Ec_plus=ecp + fp,
        Ec_minus=ecm + fm,
        max_vort=vort,
        bkm=acc.bkm,
        selfdual_res=selfdual_residual(u),
        div_res=u.divergence_residual(),
        tail_frac=tail_fraction(u.grid, _coef(u)),
    )


def _records(trajectory):
    out = []
    for item in trajectory:
        out.append(item if isinstance(item, DiagnosticsRecord) else item[-1])
    return out


def balance_drift(trajectory):
    """Leray-Hopf and helicity balance drifts over a trajectory.

    Returns the maximum over samples of ``|E + D - E(0)| / E(0)`` and of
    ``|H_inst + H_visc - H(0)| / Ec(0)``.  Helicity is normalised by the
    critical energy because ``H(0)`` may vanish while ``|H| <= Ec`` always.
    """
    recs = _records(trajectory)
    if len(recs) < 2:
        raise InsufficientDataError("balance drift needs at least two samples")
    r0 = recs[0]
    e_scale = r0.E
    h_scale = r0.Ec_plus + r0.Ec_minus
    e_dev = max(abs(r.E + r.D - r0.E - r0.D) for r in recs)
    h_dev = max(abs(r.H_inst + r.H_visc - r0.H_inst - r0.H_visc) for r in recs)
    return {
        "energy_drift": e_dev / e_scale if e_scale > 0 else e_dev,
        "helicity_drift": h_dev / h_scale if h_scale > 0 else h_dev,
    }


def scaling_transform(u, lam, target=None):
    """Rescale ``u(x) -> lam * u(lam x)`` by remapping coefficients.

    Parameters
    ----------
    u : SpectralVector
    lam : int
        Positive integer factor.
    target : Grid, optional
        Grid to place the result on.  Defaults to ``u.grid``, in which case
        frequency ``f`` moves to ``lam f``.  In general ``f`` moves to
        ``m f`` with ``m = lam * L_target / L``, which must be a positive
        integer per axis (``m = 1`` for the box shrunk by ``lam``).

    Raises
    ------
    ScalingError
        If the remapped support leaves the resolvable band of the target.
    """
    if int(lam) != lam or lam < 1:
        raise ScalingError(f"scale factor must be a positive integer, got {lam}")
    lam = int(lam)
    src = u.grid
    dst = src if target is None else target
    mult = []
    for Ls, Ld in zip(src.L, dst.L):
        m = lam * Ld / Ls
        if abs(m - round(m)) > 1e-12 or round(m) < 1:
            raise ScalingError(f"target box incompatible with scale factor {lam}")
        mult.append(int(round(m)))
    c = _coef(u)
    out = np.zeros((3,) + dst.n, dtype=complex)
    idx = np.nonzero(np.any(c != 0, axis=0))
    for ax in range(3):
        f = src.freqs[ax][idx[ax]] * mult[ax]
        if f.size and np.max(np.abs(f)) >= dst.n[ax] // 2:
            raise ScalingError(
                f"rescaled frequency {int(np.max(np.abs(f)))} exceeds the band of axis {ax} "
                f"(n={dst.n[ax]})")
    new_idx = tuple((src.freqs[ax][idx[ax]] * mult[ax]) % dst.n[ax] for ax in range(3))
    out[(slice(None),) + new_idx] = lam * c[(slice(None),) + idx]
    return SpectralVector(dst, out, u.divergence_free, u.helical_sign)


def blowup_monitors(trajectory):
    """Time series of vorticity indicators with a resolution-loss flag.

    The flag is raised at the first sample whose tail fraction exceeds 1%;
    samples from that time on are not trustworthy.
    """
    recs = _records(trajectory)
    t = np.array([r.t for r in recs])
    tail = np.array([r.tail_frac for r in recs])
    bad = np.nonzero(tail > TAIL_FLAG)[0]
    return {
        "t": t,
        "max_vort": np.array([r.max_vort for r in recs]),
        "bkm": np.array([r.bkm for r in recs]),
        "tail_frac": tail,
        "resolution_loss": bool(bad.size),
        "untrusted_from": float(t[bad[0]]) if bad.size else None,
    }


def write_csv(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([repr(float(x)) for x in r.as_row()])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected CSV header")
    return [DiagnosticsRecord(*(float(x) for x in row)) for row in rows[1:]]
