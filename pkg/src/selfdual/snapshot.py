"""
Binary snapshot container.

Layout (little-endian)::

    offset  size  field
    0       4     magic b"SDNS"
    4       2     format version
    6       2     kind (0 vector3d, 1 scalar3d, 2 axisym)
    8       4     number of components
    12      12    grid dims, three uint32 (axisym: nr, nz, 1)
    24      24    box sizes, three float64 (axisym: R, Lz, 0)
    48      8     time
    56      8     nu
    64      4     scheme id (0 unknown, 1 rk4-integrating-factor, 2 imex-cn-ab2)
    68      4     reserved
    72      ...   float64 payload, component-major, x-fastest within a component

Payloads are physical-space values; coefficients are recomputed on load.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SnapshotFormatError, SnapshotKindError, SnapshotTruncatedError

MAGIC = b"SDNS"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHHI3I3dddII")
KINDS = ("vector3d", "scalar3d", "axisym")
SCHEME_IDS = {None: 0, "rk4-integrating-factor": 1, "imex-cn-ab2": 2}
SCHEME_NAMES = {v: k for k, v in SCHEME_IDS.items()}


@dataclass
class Snapshot:
    kind: str
    grid: object
    values: np.ndarray
    time: float = 0.0
    nu: float = 0.0
    scheme: str | None = None
    version: int = FORMAT_VERSION


def _grid_header(grid, kind):
    if kind == "axisym":
        return (grid.nr, grid.nz, 1), (grid.R, grid.Lz, 0.0)
    return tuple(grid.n), tuple(grid.L)


def write_snapshot(path, values, grid, kind="vector3d", time=0.0, nu=0.0, scheme=None):
    """Write physical-space ``values`` on ``grid`` to ``path``.

    ``values`` has shape ``(3, n1, n2, n3)`` for ``vector3d``,
    ``(n1, n2, n3)`` for ``scalar3d`` and ``(nr, nz)`` for ``axisym``.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if scheme not in SCHEME_IDS:
        raise ValueError(f"unknown scheme {scheme!r}")
    dims, box = _grid_header(grid, kind)
    ncomp = 3 if kind == "vector3d" else 1
    arr = np.asarray(values, dtype="<f8")
    expect = ((3,) if ncomp == 3 else ()) + (tuple(dims[:2]) if kind == "axisym" else tuple(dims))
    if arr.shape != expect:
        raise ValueError(f"values have shape {arr.shape}, expected {expect} for {kind}")
    head = HEADER.pack(MAGIC, FORMAT_VERSION, KINDS.index(kind), ncomp, *dims, *box,
                       float(time), float(nu), SCHEME_IDS[scheme], 0)
    comps = arr if ncomp == 3 else arr[None]
    with open(path, "wb") as fh:
        fh.write(head)
        for c in comps:
            fh.write(np.ravel(c, order="F").astype("<f8").tobytes())


def read_snapshot(path, expect_kind=None):
    """Read a snapshot written by :func:`write_snapshot`.

    Raises
    ------
    SnapshotFormatError
        Bad magic or header.
    SnapshotTruncatedError
        Payload shorter than the header promises.
    SnapshotKindError
        ``expect_kind`` given and different from the stored kind.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < HEADER.size:
        raise SnapshotFormatError(f"{path}: file too short for a snapshot header ({len(data)} bytes)")
    magic, version, kind_id, ncomp, d1, d2, d3, b1, b2, b3, time, nu, scheme_id, _ = \
        HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if kind_id >= len(KINDS):
        raise SnapshotFormatError(f"{path}: unknown kind id {kind_id}")
    kind = KINDS[kind_id]
    if version != FORMAT_VERSION:
        warnings.warn(f"{path}: snapshot format version {version}, reader is version {FORMAT_VERSION}",
                      UserWarning, stacklevel=2)
    if expect_kind is not None and kind != expect_kind:
        raise SnapshotKindError(f"{path}: expected a {expect_kind} snapshot, got {kind}")
    dims = (d1, d2) if kind == "axisym" else (d1, d2, d3)
    if ncomp != (3 if kind == "vector3d" else 1):
        raise SnapshotFormatError(f"{path}: {ncomp} components is inconsistent with kind {kind}")
    if min(dims) < 1:
        raise SnapshotFormatError(f"{path}: empty grid dimensions {dims}")
    count = ncomp * int(np.prod(dims))
    expected = HEADER.size + 8 * count
    if len(data) < expected:
        raise SnapshotTruncatedError(expected, len(data))
    flat = np.frombuffer(data, dtype="<f8", count=count, offset=HEADER.size)
    comps = [flat[i * (count // ncomp):(i + 1) * (count // ncomp)].reshape(dims, order="F")
             for i in range(ncomp)]
    values = np.stack(comps) if ncomp > 1 else comps[0].copy()
    values = values.astype(float)

    if kind == "axisym":
        from .axisym import AxisymGrid
        grid = AxisymGrid(d1, d2, R=b1, Lz=b2)
    else:
        from .spectral import make_grid
        grid = make_grid(dims, (b1, b2, b3))
    return Snapshot(kind, grid, values, time, nu, SCHEME_NAMES.get(scheme_id), version)
