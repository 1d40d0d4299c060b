import math

import numpy as np
import pytest

from mgspectral.errors import DegenerateLineError, TruncationOverflowError
from mgspectral.fields import (
    GridSpec,
    LineField,
    SpectralField,
    embed_line,
    from_physical,
    random_field,
    random_line_data,
    restrict_line,
    sobolev_norm,
    to_physical,
)
from mgspectral.lattice import canonicalize_line

LINE_111 = canonicalize_line((1, 1, 1))


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(N=1)
    with pytest.raises(ValueError):
        GridSpec(N=8, pad=0.5)
    grid = GridSpec(N=32)
    assert grid.phys_size >= 3 * 32 + 1
    assert grid.dealiased


def test_sobolev_norm_mode_pair():
    grid = GridSpec(N=4)
    f = SpectralField.from_modes(grid, {(1, 1, 1): 0.5})
    assert sobolev_norm(f, 0.0) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert sobolev_norm(f, 1.0, homogeneous=True) == pytest.approx(
        math.sqrt(3) / math.sqrt(2), abs=1e-15)
    assert sobolev_norm(SpectralField.zeros(grid), 2.51) == 0.0


def test_sobolev_norm_line_field_matches_embedding():
    grid = GridSpec(N=12)
    lf = random_line_data(LINE_111, 4, 1.5, seed=8)
    emb = embed_line(lf, grid)
    for s in (0.0, 1.0, 2.51):
        for hom in (False, True):
            assert sobolev_norm(lf, s, hom) == pytest.approx(
                sobolev_norm(emb, s, hom), rel=1e-14)


def test_embed_restrict_roundtrip():
    grid = GridSpec(N=8)
    lf = random_line_data(LINE_111, 8, 2.0, seed=1)
    emb = embed_line(lf, grid)
    assert np.count_nonzero(emb.coeffs) == 16
    back, leakage = restrict_line(emb, LINE_111)
    assert leakage == 0.0
    assert np.array_equal(back.coeffs, lf.coeffs)


def test_embed_overflow():
    with pytest.raises(TruncationOverflowError):
        embed_line(random_line_data(LINE_111, 9, 2.0, seed=1), GridSpec(N=8))


def test_embed_empty_line_field():
    grid = GridSpec(N=4)
    emb = embed_line(LineField.zeros(LINE_111, 0), grid)
    assert np.all(emb.coeffs == 0)


def test_leakage_half_energy():
    grid = GridSpec(N=4)
    f = SpectralField.from_modes(grid, {(1, 1, 1): 0.5, (1, 0, 1): 0.5})
    _, leakage = restrict_line(f, LINE_111)
    assert leakage == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    _, leakage = restrict_line(SpectralField.zeros(grid), LINE_111)
    assert leakage == 0.0


def test_line_field_invariants():
    with pytest.raises(DegenerateLineError):
        LineField.zeros(canonicalize_line((1, 1, 0)), 3)
    lf = random_line_data(LINE_111, 5, 2.0, seed=2)
    lf.validate()
    assert lf.get(0) == 0
    assert lf.get(-3) == complex(np.conj(lf.get(3)))


def test_random_line_data_deterministic_and_spectrum():
    a = random_line_data(LINE_111, 4, 2.0, seed=7)
    b = random_line_data(LINE_111, 4, 2.0, seed=7)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert abs(a.get(2)) / abs(a.get(1)) == pytest.approx(0.25, rel=1e-12)
    assert random_line_data(LINE_111, 0, 2.0, seed=7).energy() == 0.0


def test_random_field_invariants():
    grid = GridSpec(N=6)
    f = random_field(grid, beta=2.0, amplitude=1.0, seed=3)
    f.validate()
    assert f.vertical_mean_defect() == 0.0
    assert np.array_equal(f.coeffs, random_field(grid, 2.0, 1.0, 3).coeffs)


def test_transform_roundtrip():
    grid = GridSpec(N=6)
    f = random_field(grid, beta=1.0, amplitude=1.0, seed=4)
    back = from_physical(to_physical(f), grid)
    scale = np.max(np.abs(f.coeffs))
    assert np.max(np.abs(back.coeffs - f.coeffs)) <= 1e-12 * scale


def test_transform_convention_cosine():
    grid = GridSpec(N=4)
    f = SpectralField.from_modes(grid, {(0, 1, 1): 0.5})
    size = 16
    phys = to_physical(f, size=size)
    x = 2 * np.pi * np.arange(size) / size
    x2, x3 = np.meshgrid(x, x, indexing="ij")
    assert np.max(np.abs(phys[0] - np.cos(x2 + x3))) < 1e-13
    assert np.max(np.abs(to_physical(SpectralField.zeros(grid)))) == 0.0


def test_parseval():
    grid = GridSpec(N=5)
    f = random_field(grid, beta=1.5, amplitude=0.7, seed=5)
    phys = to_physical(f)
    rms = math.sqrt(float(np.mean(phys ** 2)))
    assert rms == pytest.approx(sobolev_norm(f, 0.0), rel=1e-12)


def test_projection_enforces_invariants():
    grid = GridSpec(N=3)
    raw = SpectralField(grid=grid, coeffs=np.random.default_rng(6).standard_normal(
        grid.shape()) + 1j * np.random.default_rng(7).standard_normal(grid.shape()))
    proj = raw.project()
    proj.validate()
    # projection is idempotent
    again = proj.project()
    assert np.allclose(again.coeffs, proj.coeffs, atol=0, rtol=0)
