"""
Simulation configuration and its ``key = value`` text format.

Example file::

    # comments start with '#'
    resolution = 32          # or "32 32 64"
    box_size = 6.283185307179586
    nu = 0.05
    dt = 1e-3
    t_end = 0.5
    scheme = rk4-integrating-factor
    dealias = true
    initial.kind = random-band
    initial.band = 4
    initial.amplitude = 1.0
    initial.seed = 7
    output.dir = out
    output.every = 50

Every problem in a file is reported at once, each tagged with its line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .integrators import SCHEMES

INITIAL_KINDS = ("taylor-green", "random-band", "file")


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "random-band"
    band: float = 4.0
    amplitude: float = 1.0
    seed: int = 0
    path: str | None = None


@dataclass(frozen=True)
class SimConfig:
    """Run parameters.

    ``nu = 0`` selects the Euler equations and requires dealiasing.  The
    number of steps is ``round(t_end / dt)``.
    """

    resolution: tuple = (32, 32, 32)
    box_size: tuple = (2 * math.pi,) * 3
    nu: float = 0.05
    dt: float = 1e-3
    t_end: float = 1.0
    scheme: str = "rk4-integrating-factor"
    dealias: bool = True
    output_every: int = 10
    output_dir: str = "out"
    initial: InitialSpec = field(default_factory=InitialSpec)
    cfl: float = 0.5

    def __post_init__(self):
        errs = validate(self)
        if errs:
            raise ConfigError(errs)

    @property
    def seed(self):
        return self.initial.seed

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    def with_updates(self, **kw):
        init_kw = {k[len("initial_"):]: kw.pop(k) for k in list(kw) if k.startswith("initial_")}
        init = replace(self.initial, **init_kw) if init_kw else self.initial
        return replace(self, initial=init, **kw)


def validate(cfg):
    errs = []
    if len(cfg.resolution) != 3 or any(int(n) != n or n < 8 or n % 2 for n in cfg.resolution):
        errs.append(f"resolution must be even integers >= 8, got {cfg.resolution}")
    if len(cfg.box_size) != 3 or any(not (L > 0 and math.isfinite(L)) for L in cfg.box_size):
        errs.append(f"box_size must be positive, got {cfg.box_size}")
    if not (cfg.nu >= 0 and math.isfinite(cfg.nu)):
        errs.append("constraint violated: nu >= 0")
    if cfg.nu == 0 and not cfg.dealias:
        errs.append("constraint violated: nu = 0 requires dealias = true")
    if not (cfg.dt > 0 and math.isfinite(cfg.dt)):
        errs.append("constraint violated: dt > 0")
    if not (cfg.t_end >= 0 and math.isfinite(cfg.t_end)):
        errs.append("constraint violated: t_end >= 0")
    if cfg.scheme not in SCHEMES:
        errs.append(f"scheme must be one of {', '.join(SCHEMES)}")
    if cfg.output_every < 1:
        errs.append("constraint violated: output.every >= 1")
    if not cfg.cfl > 0:
        errs.append("constraint violated: cfl > 0")
    init = cfg.initial
    if init.kind not in INITIAL_KINDS:
        errs.append(f"initial.kind must be one of {', '.join(INITIAL_KINDS)}")
    if not init.band > 0:
        errs.append("constraint violated: initial.band > 0")
    if not init.amplitude >= 0:
        errs.append("constraint violated: initial.amplitude >= 0")
    if init.kind == "file" and not init.path:
        errs.append("initial.kind = file requires initial.path")
    return errs


def _as_bool(s):
    low = s.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _as_int(s):
    f = float(s)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {s!r}")
    return int(f)


def _triple(conv):
    def parse(s):
        parts = s.replace(",", " ").split()
        if len(parts) == 1:
            parts = parts * 3
        if len(parts) != 3:
            raise ValueError(f"expected one or three values, got {s!r}")
        return tuple(conv(p) for p in parts)
    return parse


# key -> (field name, converter, type label)
KEYS = {
    "resolution": ("resolution", _triple(_as_int), "integer"),
    "box_size": ("box_size", _triple(float), "number"),
    "nu": ("nu", float, "number"),
    "dt": ("dt", float, "number"),
    "t_end": ("t_end", float, "number"),
    "scheme": ("scheme", str, "string"),
    "dealias": ("dealias", _as_bool, "boolean"),
    "cfl": ("cfl", float, "number"),
    "initial.kind": ("initial_kind", str, "string"),
    "initial.band": ("initial_band", float, "number"),
    "initial.amplitude": ("initial_amplitude", float, "number"),
    "initial.seed": ("initial_seed", _as_int, "integer"),
    "initial.path": ("initial_path", str, "string"),
    "output.dir": ("output_dir", str, "string"),
    "output.every": ("output_every", _as_int, "integer"),
}


def parse_config(text, base=None):
    """Parse configuration text into a :class:`SimConfig`.

    Parameters
    ----------
    text : str
    base : SimConfig, optional
        Defaults for keys the text omits.

    Raises
    ------
    ConfigError
        Carrying every error found, each prefixed with ``line N``.
    """
    errors = []
    seen = {}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errors.append(f"line {lineno}: duplicate key {key!r} (first set on line {seen[key]})")
            continue
        seen[key] = lineno
        name, conv, label = KEYS[key]
        try:
            values[name] = conv(val)
        except ValueError:
            errors.append(f"line {lineno}: {key} expects a {label}, got {val!r}")
    if errors:
        raise ConfigError(errors)

    base = base or SimConfig()
    fields_ = {k: getattr(base, k) for k in ("resolution", "box_size", "nu", "dt", "t_end", "scheme",
                                             "dealias", "output_every", "output_dir", "cfl")}
    init = {k: getattr(base.initial, k) for k in ("kind", "band", "amplitude", "seed", "path")}
    for name, v in values.items():
        if name.startswith("initial_"):
            init[name[len("initial_"):]] = v
        else:
            fields_[name] = v
    try:
        probe = SimConfig.__new__(SimConfig)
        for k, v in fields_.items():
            object.__setattr__(probe, k, v)
        object.__setattr__(probe, "initial", InitialSpec(**init))
        errs = validate(probe)
    except TypeError as exc:  # pragma: no cover
        errs = [str(exc)]
    if errs:
        tagged = []
        for e in errs:
            key = _key_for_error(e)
            tagged.append(f"line {seen[key]}: {e}" if key in seen else e)
        raise ConfigError(tagged)
    return SimConfig(initial=InitialSpec(**init), **fields_)


def _key_for_error(msg):
    for key in sorted(KEYS, key=len, reverse=True):
        if key in msg or KEYS[key][0] in msg:
            return key
    if "nu" in msg:
        return "nu"
    return None


def load_config(path, base=None):
    with open(path) as fh:
        return parse_config(fh.read(), base=base)
