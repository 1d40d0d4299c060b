import numpy as np
import pytest

from mgspectral.config import load_config, parse_config_text
from mgspectral.errors import ConfigError
from mgspectral.fields import GridSpec, random_field
from mgspectral.snapshots import read_mgsf, write_mgsf


def test_mgsf_roundtrip(tmp_path):
    grid = GridSpec(N=5)
    f = random_field(grid, beta=1.0, amplitude=1.0, seed=1)
    path = tmp_path / "snap.mgsf"
    write_mgsf(f, path, meta={"time": 0.25, "line": [1, 1, 1]})
    back, meta = read_mgsf(path)
    assert back.grid.N == 5
    assert np.array_equal(back.coeffs, f.coeffs)
    assert meta["time"] == 0.25
    assert meta["N"] == 5


def test_mgsf_header_layout(tmp_path):
    grid = GridSpec(N=2)
    f = random_field(grid, beta=1.0, amplitude=1.0, seed=2)
    path = tmp_path / "snap.mgsf"
    write_mgsf(f, path)
    blob = path.read_bytes()
    assert blob[:4] == b"MGSF"
    assert int.from_bytes(blob[4:6], "little") == 1
    assert int.from_bytes(blob[6:10], "little") == 2
    assert len(blob) == 10 + 5 ** 3 * 16
    # first payload value is the coefficient at k = (-2, -2, -2)
    re = np.frombuffer(blob[10:18], dtype="<f8")[0]
    im = np.frombuffer(blob[18:26], dtype="<f8")[0]
    assert complex(re, im) == f.get((-2, -2, -2))


def test_mgsf_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.mgsf"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(ValueError):
        read_mgsf(path)


def test_config_parse_sections_and_comments():
    cfg = parse_config_text("""
# a comment
[grid]
N = 16          # trailing comment
pad = 1.5

[time]
dt = 0.01
""")
    assert cfg.get_int("grid.N") == 16
    assert cfg.get_float("grid.pad") == 1.5
    assert cfg.get_float("time.dt") == 0.01
    assert cfg.get_float("time.t_end", 2.0) == 2.0


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        parse_config_text("[grid]\nM = 3\n")


def test_config_rejects_duplicates_and_garbage():
    with pytest.raises(ConfigError):
        parse_config_text("[grid]\nN = 1\nN = 2\n")
    with pytest.raises(ConfigError):
        parse_config_text("[grid]\njust words\n")


def test_config_typed_accessor_errors():
    cfg = parse_config_text("[grid]\nN = abc\n")
    with pytest.raises(ConfigError):
        cfg.get_int("grid.N")
    cfg = parse_config_text("[line]\nq = 1,2\n")
    with pytest.raises(ConfigError):
        cfg.get_rational_triple("line.q")


def test_config_hash_stable_under_reordering():
    a = parse_config_text("[grid]\nN = 16\npad = 1.5\n")
    b = parse_config_text("[grid]\npad = 1.5\nN = 16\n")
    assert a.hash() == b.hash()
    c = parse_config_text("[grid]\nN = 17\npad = 1.5\n")
    assert a.hash() != c.hash()


def test_config_write_reparses(tmp_path):
    cfg = parse_config_text("[grid]\nN = 16\n[time]\ndt = 0.01\nt_end = 1.0\n")
    path = tmp_path / "run.cfg"
    cfg.write(path)
    again = load_config(path)
    assert again.entries == cfg.entries
    assert again.hash() == cfg.hash()


def test_config_rational_triple():
    cfg = parse_config_text("[line]\nq = 2/3, 4/3, 2/3\n")
    from fractions import Fraction
    assert cfg.get_rational_triple("line.q") == (Fraction(2, 3), Fraction(4, 3),
                                                 Fraction(2, 3))
