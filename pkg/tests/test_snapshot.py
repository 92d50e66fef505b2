import struct

import numpy as np
import pytest

from selfdual.axisym import AxisymGrid
from selfdual.config import SimConfig
from selfdual.errors import (SnapshotFormatError, SnapshotKindError, SnapshotTruncatedError)
from selfdual.navier_stokes import run
from selfdual.snapshot import HEADER, read_snapshot, write_snapshot
from selfdual.spectral import make_grid


@pytest.fixture
def fields(rng):
    g = make_grid((8, 10, 12), (1.0, 2.0, 3.0))
    a = AxisymGrid(12, 8, R=3.0, Lz=5.0)
    return {"vector3d": (g, rng.standard_normal((3, 8, 10, 12))),
            "scalar3d": (g, rng.standard_normal((8, 10, 12))),
            "axisym": (a, rng.standard_normal((12, 8)))}


class TestRoundTrip:
    @pytest.mark.parametrize("kind", ["vector3d", "scalar3d", "axisym"])
    def test_bit_exact(self, tmp_path, fields, kind):
        grid, vals = fields[kind]
        p = tmp_path / "s.sdns"
        write_snapshot(p, vals, grid, kind=kind, time=1.25, nu=0.01, scheme="imex-cn-ab2")
        snap = read_snapshot(p)
        assert snap.kind == kind and snap.time == 1.25 and snap.nu == 0.01
        assert snap.scheme == "imex-cn-ab2"
        assert np.array_equal(snap.values, vals)
        if kind == "axisym":
            assert (snap.grid.nr, snap.grid.nz, snap.grid.R, snap.grid.Lz) == (12, 8, 3.0, 5.0)
        else:
            assert tuple(snap.grid.n) == (8, 10, 12) and tuple(snap.grid.L) == (1.0, 2.0, 3.0)

    def test_size(self, tmp_path, fields):
        grid, vals = fields["vector3d"]
        p = tmp_path / "s.sdns"
        write_snapshot(p, vals, grid)
        assert p.stat().st_size == HEADER.size + 8 * vals.size

    def test_bad_shape(self, tmp_path, fields):
        grid, vals = fields["vector3d"]
        with pytest.raises(ValueError):
            write_snapshot(tmp_path / "s.sdns", vals[0], grid)


class TestErrors:
    def test_truncated(self, tmp_path, fields):
        grid, vals = fields["scalar3d"]
        p = tmp_path / "s.sdns"
        write_snapshot(p, vals, grid, kind="scalar3d")
        data = p.read_bytes()
        p.write_bytes(data[:-100])
        with pytest.raises(SnapshotTruncatedError) as exc:
            read_snapshot(p)
        assert exc.value.expected == len(data) and exc.value.actual == len(data) - 100
        assert str(len(data)) in str(exc.value)

    def test_bad_magic(self, tmp_path, fields):
        grid, vals = fields["scalar3d"]
        p = tmp_path / "s.sdns"
        write_snapshot(p, vals, grid, kind="scalar3d")
        p.write_bytes(b"XXXX" + p.read_bytes()[4:])
        with pytest.raises(SnapshotFormatError, match="magic"):
            read_snapshot(p)

    def test_short_header(self, tmp_path):
        p = tmp_path / "s.sdns"
        p.write_bytes(b"SDNS")
        with pytest.raises(SnapshotFormatError):
            read_snapshot(p)

    def test_version_warning(self, tmp_path, fields):
        grid, vals = fields["axisym"]
        p = tmp_path / "s.sdns"
        write_snapshot(p, vals, grid, kind="axisym")
        data = bytearray(p.read_bytes())
        struct.pack_into("<H", data, 4, 99)
        p.write_bytes(bytes(data))
        with pytest.warns(UserWarning, match="version 99"):
            snap = read_snapshot(p)
        assert np.array_equal(snap.values, vals)

    def test_kind_mismatch(self, tmp_path, fields):
        grid, vals = fields["axisym"]
        p = tmp_path / "s.sdns"
        write_snapshot(p, vals, grid, kind="axisym")
        with pytest.raises(SnapshotKindError):
            read_snapshot(p, expect_kind="vector3d")

    def test_solver_rejects_axisym_snapshot(self, tmp_path, fields):
        grid, vals = fields["axisym"]
        p = tmp_path / "s.sdns"
        write_snapshot(p, vals, grid, kind="axisym")
        cfg = SimConfig(resolution=(8, 8, 8), t_end=0.01, dt=0.01).with_updates(
            initial_kind="file", initial_path=str(p))
        with pytest.raises(SnapshotKindError):
            run(cfg)

    def test_component_count(self, tmp_path, fields):
        grid, vals = fields["scalar3d"]
        p = tmp_path / "s.sdns"
        write_snapshot(p, vals, grid, kind="scalar3d")
        data = bytearray(p.read_bytes())
        struct.pack_into("<I", data, 8, 0)
        p.write_bytes(bytes(data))
        with pytest.raises(SnapshotFormatError, match="components"):
            read_snapshot(p)
