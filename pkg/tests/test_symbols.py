import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import rational_M

from mgspectral.errors import (
    DegenerateLineError,
    InsufficientSweepError,
    NonpositiveApertureError,
    VerticalZeroModeError,
    ZeroFrequencyError,
)
from mgspectral.lattice import ConeSpec, canonicalize_line, sample_cone_directions
from mgspectral.symbols import (
    asymptotic_probe,
    build_symbol_table,
    cone_bounds,
    eval_A,
    eval_M,
    eval_M_exact,
    eval_b_multiplier,
    eval_sqrtM3,
    k1_sweep,
    line_constants,
    multiplier_cube,
    sampled_cone_supremum,
)


def test_eval_M_hand_values():
    assert eval_M_exact((0, 1, 1)) == (Fraction(2, 3), Fraction(-1, 3), Fraction(1, 3))
    assert eval_M_exact((1, 1, 1)) == (Fraction(1, 2), Fraction(-1), Fraction(1, 2))
    assert eval_M((5, 3, 0)) == (0.0, 0.0, 0.0)
    assert eval_M((0, 1, 1)) == pytest.approx((2 / 3, -1 / 3, 1 / 3), abs=1e-15)


def test_eval_M_matches_rational_oracle():
    rng = np.random.default_rng(0)
    for _ in range(200):
        k = tuple(int(c) for c in rng.integers(-20, 21, size=3))
        expect = rational_M(k)
        got = eval_M(k)
        for g, e in zip(got, expect):
            assert g == pytest.approx(float(e), rel=1e-14, abs=1e-300)


def test_divergence_evenness_homogeneity_exact():
    rng = np.random.default_rng(1)
    for _ in range(200):
        k = tuple(int(c) for c in rng.integers(-20, 21, size=3))
        m = eval_M_exact(k)
        assert k[0] * m[0] + k[1] * m[1] + k[2] * m[2] == 0
        assert eval_M_exact(tuple(-c for c in k)) == m
        n = int(rng.integers(1, 5))
        assert eval_M_exact(tuple(n * c for c in k)) == m


def test_M3_positivity():
    rng = np.random.default_rng(2)
    for _ in range(200):
        k = tuple(int(c) for c in rng.integers(-15, 16, size=3))
        m3 = eval_M_exact(k)[2]
        if k[2] == 0 or k[1] == 0:
            assert m3 == 0
        else:
            assert m3 > 0


def test_sqrtM3():
    assert eval_sqrtM3((1, 1, 1)) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert eval_sqrtM3((0, 1, 1)) == pytest.approx(math.sqrt(1 / 3), abs=1e-15)
    assert eval_sqrtM3((2, 7, 0)) == 0.0


def test_eval_A():
    assert eval_A((0, 0, 1)) == pytest.approx(-1j, abs=1e-15)
    assert eval_A((0, 1, 1)) == pytest.approx(-1j * (math.sqrt(2) + 1) / 5, abs=1e-12)
    with pytest.raises(VerticalZeroModeError):
        eval_A((1, 1, 0))
    # purely imaginary everywhere it is defined
    rng = np.random.default_rng(3)
    for _ in range(50):
        k = tuple(int(c) for c in rng.integers(-10, 11, size=3))
        if k[2] == 0:
            continue
        assert eval_A(k).real == 0.0


def test_eval_b_multiplier():
    b = eval_b_multiplier((0, 1, 1))
    assert b[2] == pytest.approx(1j / 6, abs=1e-15)
    b = eval_b_multiplier((1, 1, 1))
    assert b[1] == pytest.approx(-1j / 3, abs=1e-15)
    assert np.all(eval_b_multiplier((4, -2, 0)) == 0)
    with pytest.raises(ZeroFrequencyError):
        eval_b_multiplier((0, 0, 0))


def test_line_constants():
    c = line_constants(canonicalize_line((1, 1, 1)))
    assert (c.m_lower, c.m_upper) == (0.5, 1.0)
    assert c.components == (0.5, -1.0, 0.5)
    c = line_constants(canonicalize_line((0, 1, 1)))
    assert c.m_lower == pytest.approx(1 / 3, abs=1e-15)
    assert c.m_upper == pytest.approx(2 / 3, abs=1e-15)
    # homogeneity: scaled direction gives identical constants
    assert line_constants(canonicalize_line((2, 2, 2))) == line_constants(
        canonicalize_line((1, 1, 1)))
    with pytest.raises(DegenerateLineError):
        line_constants(canonicalize_line((1, 1, 0)))


def test_cone_bounds():
    b = cone_bounds(1)
    assert (b.m_lower, b.m_upper) == (0.25, 4.0)
    with pytest.raises(NonpositiveApertureError):
        cone_bounds(0)
    # blow-up / vanishing with the aperture
    big = cone_bounds(100)
    assert big.m_upper > 1e6 and big.m_lower < 1e-6


def test_cone_sandwich_sampled():
    cone = ConeSpec(Fraction(1))
    bounds = cone_bounds(cone)
    lo, hi = sampled_cone_supremum(cone, n_samples=100, seed=4)
    assert bounds.m_lower <= lo
    assert hi <= bounds.m_upper


def test_line_constants_within_cone_bounds():
    cone = ConeSpec(Fraction(5, 2))
    bounds = cone_bounds(cone)
    for q in sample_cone_directions(cone, 100, seed=5):
        c = line_constants(canonicalize_line(q))
        assert bounds.m_lower <= c.m_lower <= c.m_upper <= bounds.m_upper


def test_asymptotic_probe_r_half():
    fit = asymptotic_probe(0.5, k1_sweep(64, 4096))
    assert fit.slopes[0] == pytest.approx(0.5, abs=0.05)
    assert fit.slopes[1] == pytest.approx(1.0, abs=0.05)
    assert fit.slopes[2] == pytest.approx(1.0, abs=0.05)


def test_asymptotic_probe_r_quarter():
    fit = asymptotic_probe(0.25, k1_sweep(64, 4096))
    assert fit.slopes[0] == pytest.approx(0.25, abs=0.05)
    assert fit.slopes[1] == pytest.approx(1.0, abs=0.05)
    assert fit.slopes[2] == pytest.approx(0.5, abs=0.05)


def test_asymptotic_probe_rejects_short_sweep():
    with pytest.raises(InsufficientSweepError):
        asymptotic_probe(0.5, [64, 128, 256])


def test_multiplier_cube_matches_pointwise():
    m1, m2, m3, s3, ksq = multiplier_cube(5)
    rng = np.random.default_rng(6)
    for _ in range(50):
        k = tuple(int(c) for c in rng.integers(-5, 6, size=3))
        i = tuple(c + 5 for c in k)
        assert (m1[i], m2[i], m3[i]) == eval_M(k)
        assert s3[i] == eval_sqrtM3(k)
    assert np.all(m3 >= 0)
    # sqrt then square costs two roundings: a few ulp of the value
    assert np.max(np.abs(s3 ** 2 - m3) / (1.0 + m3)) < 5e-16


def test_symbol_table_csv(tmp_path):
    table = build_symbol_table(3)
    path = tmp_path / "symbols.csv"
    table.write_csv(path, k3_slices=[0, 1])
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "k1,k2,k3,M1,M2,M3,sqrtM3"
    assert len(lines) == 1 + 7 * 7 * 2
    # the {k3 = 0} rows are identically zero
    for row in lines[1:]:
        cells = row.split(",")
        if cells[2] == "0":
            assert cells[3:6] == ["0.0", "0.0", "0.0"]
