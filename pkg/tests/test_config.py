import math

import pytest
from hypothesis import given, strategies as st

from selfdual.config import SimConfig, load_config, parse_config
from selfdual.errors import ConfigError


class TestParse:
    def test_minimal_fills_defaults(self):
        cfg = parse_config("nu = 0.1\n")
        assert cfg.nu == 0.1
        assert cfg.resolution == (32, 32, 32)
        assert cfg.scheme == "rk4-integrating-factor"
        assert cfg.dealias is True

    def test_full_file(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("resolution = 16 16 32  # anisotropic\nbox_size = 6.283185307179586\n"
                     "dealias = false\ninitial.kind = taylor-green\ninitial.seed = 7\n"
                     "output.every = 5\nscheme = imex-cn-ab2\n")
        cfg = load_config(p)
        assert cfg.resolution == (16, 16, 32)
        assert cfg.box_size == (2 * math.pi,) * 3
        assert not cfg.dealias and cfg.seed == 7 and cfg.output_every == 5
        assert cfg.initial.kind == "taylor-green" and cfg.scheme == "imex-cn-ab2"

    def test_negative_nu(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("dt = 0.01\nnu = -1\n")
        assert exc.value.errors == ["line 2: constraint violated: nu >= 0"]

    def test_duplicate_key(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("nu = 0.1\ndt = 0.01\nnu = 0.2\n")
        (msg,) = exc.value.errors
        assert "line 3" in msg and "line 1" in msg and "nu" in msg

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key 'viscosity'"):
            parse_config("viscosity = 0.1")

    def test_type_mismatch(self):
        with pytest.raises(ConfigError, match="line 1: dt expects a number"):
            parse_config("dt = fast")

    def test_all_errors_reported(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("bogus = 1\ndt = x\nresolution = 12 q 12\nno equals sign\n")
        assert [e.split(":")[0] for e in exc.value.errors] == ["line 1", "line 2", "line 3", "line 4"]

    def test_euler_requires_dealias(self):
        with pytest.raises(ConfigError, match="dealias"):
            parse_config("nu = 0\ndealias = false\n")

    def test_odd_resolution(self):
        with pytest.raises(ConfigError, match="line 1: resolution"):
            parse_config("resolution = 15")

    def test_file_requires_path(self):
        with pytest.raises(ConfigError, match="initial.path"):
            parse_config("initial.kind = file")

    @given(st.floats(min_value=0, max_value=1e3), st.floats(min_value=1e-6, max_value=1.0))
    def test_numbers_round_trip(self, nu, dt):
        cfg = parse_config(f"nu = {nu!r}\ndt = {dt!r}\n")
        assert cfg.nu == nu and cfg.dt == dt


class TestSimConfig:
    def test_direct_validation(self):
        with pytest.raises(ConfigError):
            SimConfig(dt=0.0)

    def test_with_updates(self):
        cfg = SimConfig().with_updates(nu=0.2, initial_seed=3)
        assert cfg.nu == 0.2 and cfg.seed == 3

    def test_with_updates_validates(self):
        with pytest.raises(ConfigError):
            SimConfig().with_updates(nu=-0.5)

    def test_n_steps(self):
        assert SimConfig(dt=0.1, t_end=1.0).n_steps == 10
