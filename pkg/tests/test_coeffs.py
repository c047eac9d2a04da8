"""Coefficient layer: exact values, scaling, quadrature oracle, cache."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import gauss_coefficient, ordered_monomial_integral

from itolegendre.coeffs import (
    CacheIntegrityError,
    DegreeCapError,
    Interval,
    WeightSpec,
    basis_phi,
    coefficient_table,
    fourier_coefficient,
    kernel_norm,
    load_table,
    save_table,
)

F = Fraction
UNIT = Interval.from_length(1)


# --- domain types ------------------------------------------------------------


def test_interval_validation_and_length():
    iv = Interval(F(1, 2), F(2))
    assert iv.length == F(3, 2)
    assert Interval.from_length("0.25").length == F(1, 4)
    with pytest.raises(ValueError):
        Interval(1, 1)


def test_weight_spec_validation():
    assert WeightSpec.unit(3).exponents == (0, 0, 0)
    assert WeightSpec((1, 0)).k == 2
    with pytest.raises(ValueError):
        WeightSpec(())
    with pytest.raises(ValueError):
        WeightSpec((0,) * 9)
    with pytest.raises(ValueError):
        WeightSpec((-1,))


# --- basis -------------------------------------------------------------------


def test_basis_constant_mode():
    assert basis_phi(0, UNIT)(0.37) == pytest.approx(1.0)
    assert basis_phi(0, Interval.from_length(4))(1.0) == pytest.approx(0.5)


def test_basis_mode_one_at_right_endpoint():
    # sqrt(3 / 1) * P_1(1)
    assert basis_phi(1, UNIT)(1.0) == pytest.approx(math.sqrt(3))


@pytest.mark.parametrize("i", range(4))
@pytest.mark.parametrize("j", range(4))
def test_basis_orthonormal_by_quadrature(i, j):
    iv = Interval(F(1, 4), F(7, 4))
    x, wts = np.polynomial.legendre.leggauss(24)
    s = float(iv.t) + (x + 1.0) * float(iv.length) / 2.0
    inner = float(iv.length) / 2.0 * float(
        wts @ (basis_phi(i, iv)(s) * basis_phi(j, iv)(s)))
    assert inner == pytest.approx(1.0 if i == j else 0.0, abs=1e-12)


def test_basis_rejects_negative_mode():
    with pytest.raises(ValueError):
        basis_phi(-1, UNIT)


# --- single coefficients -----------------------------------------------------


def test_coefficient_k1_constant_mode():
    cv = fourier_coefficient((0,), WeightSpec.unit(1))
    assert (cv.core, cv.sqrt_factors, cv.half_power, cv.two_power) == \
        (F(2), (1,), 1, 1)
    assert cv.value(UNIT) == pytest.approx(1.0)
    assert cv.value(Interval.from_length(4)) == pytest.approx(2.0)


@pytest.mark.parametrize("mode", [1, 2, 5])
def test_coefficient_k1_higher_modes_vanish(mode):
    assert fourier_coefficient((mode,), WeightSpec.unit(1)).core == 0


def test_coefficient_k3_all_zero_modes():
    # simplex volume on [-1, 1]^3 is 2^3 / 3!
    cv = fourier_coefficient((0, 0, 0), WeightSpec.unit(3))
    assert cv.core == ordered_monomial_integral((0, 0, 0), 2) == F(4, 3)
    assert cv.value(UNIT) == pytest.approx(1.0 / 6.0)


def test_coefficient_k2_leading_term():
    # leading coefficient is half the interval length
    cv = fourier_coefficient((0, 0), WeightSpec.unit(2))
    assert cv.value(UNIT) == pytest.approx(0.5)
    assert cv.value(Interval.from_length(3)) == pytest.approx(1.5)


def test_coefficient_scale_factor_bookkeeping():
    for exponents, j in [((0, 0), (1, 2)), ((1, 0), (0, 0)),
                         ((2, 1, 0), (3, 0, 1))]:
        w = WeightSpec(exponents)
        cv = fourier_coefficient(j, w)
        assert cv.half_power == w.k + 2 * sum(exponents)
        assert cv.two_power == w.k + sum(exponents)
        assert cv.sqrt_factors == tuple(2 * m + 1 for m in j)


def test_coefficient_reconstruction_matches_split():
    # k=3 values scale as sqrt(prod(2j+1)) / 8 * L^(3/2) * core
    w = WeightSpec.unit(3)
    for j in [(0, 0, 0), (1, 0, 2), (2, 2, 1)]:
        cv = fourier_coefficient(j, w)
        expected = (math.sqrt(math.prod(2 * m + 1 for m in j)) / 8.0
                    * 2.0 ** 1.5 * float(cv.core))
        assert cv.value(Interval.from_length(2)) == pytest.approx(expected)


def test_coefficient_validates_arguments():
    with pytest.raises(ValueError):
        fourier_coefficient((0,), WeightSpec.unit(2))
    with pytest.raises(ValueError):
        fourier_coefficient((-1, 0), WeightSpec.unit(2))
    with pytest.raises(DegreeCapError):
        fourier_coefficient((31, 0), WeightSpec.unit(2))
    with pytest.raises(DegreeCapError):
        fourier_coefficient((0,), WeightSpec((6,)))


# --- kernel norm -------------------------------------------------------------


@pytest.mark.parametrize("k,expected", [(1, 1.0), (2, 0.5), (3, 1.0 / 6.0)])
def test_kernel_norm_unit_weights(k, expected):
    assert kernel_norm(WeightSpec.unit(k)).value(UNIT) == pytest.approx(expected)
    assert kernel_norm(WeightSpec.unit(k)).value(Interval.from_length(2)) == \
        pytest.approx(expected * 2.0 ** k)


@pytest.mark.parametrize("exponents", [(1,), (1, 0), (0, 2, 1), (1, 1, 1)])
def test_kernel_norm_matches_monomial_oracle(exponents):
    w = WeightSpec(exponents)
    length = F(3, 2)
    oracle = ordered_monomial_integral(tuple(2 * q for q in exponents), length)
    got = kernel_norm(w).value(Interval(0, length))
    assert got == pytest.approx(float(oracle), rel=1e-13)


# --- quadrature cross-check --------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3])
def test_quadrature_cross_check(k):
    import itertools

    iv = Interval(F(1, 4), F(5, 4))
    for exponents in [(0,) * k, (1,) + (0,) * (k - 1)]:
        w = WeightSpec(exponents)
        if k <= 2:
            modes = list(itertools.product(range(5), repeat=k))
        else:
            modes = [(0,) * k, (1,) * k, tuple(range(k)),
                     (4,) + (2,) * (k - 1), (3, 0, 4)]
        for j in modes:
            exact = fourier_coefficient(j, w).value(iv)
            quad = gauss_coefficient(j, w, iv)
            assert exact == pytest.approx(quad, abs=1e-10)


# --- tables ------------------------------------------------------------------


def test_table_size_and_order():
    w = WeightSpec.unit(2)
    table = coefficient_table(w, 2)
    assert len(table) == 9
    assert list(table) == sorted(table)
    single = coefficient_table(WeightSpec.unit(1), 2)
    assert [cv.core for cv in single.values()] == [F(2), 0, 0]


def test_table_reproduces_antisymmetric_pair_structure():
    # nonzero off-diagonal pattern: adjacent modes with opposite signs
    table = coefficient_table(WeightSpec.unit(2), 1)
    assert table[(0, 1)].core == F(2, 3)
    assert table[(1, 0)].core == F(-2, 3)
    assert table[(0, 1)].value(UNIT) == pytest.approx(1 / (2 * math.sqrt(3)))
    assert table[(1, 0)].value(UNIT) == -table[(0, 1)].value(UNIT)
    assert table[(1, 1)].core == 0


def test_pair_table_is_tridiagonal_with_known_band():
    # the unit-weight pair kernel projects onto adjacent modes only:
    # value(i-1, i) = (L/2) / sqrt(4 i^2 - 1), its mirror is the negative,
    # and everything farther from the diagonal vanishes
    table = coefficient_table(WeightSpec.unit(2), 6)
    for i in range(1, 7):
        band = 0.5 / math.sqrt(4 * i * i - 1)
        assert table[(i - 1, i)].value(UNIT) == pytest.approx(band, rel=1e-13)
        assert table[(i, i - 1)].value(UNIT) == -table[(i - 1, i)].value(UNIT)
    for a in range(7):
        for b in range(7):
            if abs(a - b) > 1 or (a == b and a > 0):
                assert table[(a, b)].core == 0
    assert table[(0, 0)].value(UNIT) == pytest.approx(0.5)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_parseval_partial_sums(k):
    w = WeightSpec.unit(k)
    norm = kernel_norm(w)
    norm_scaled = norm.core * F(1, 2 ** norm.two_power)
    table = coefficient_table(w, 6)
    previous = F(0)
    for p in range(7):
        captured = F(0)
        for j, cv in table.items():
            if max(j) <= p:
                captured += (cv.core ** 2 * math.prod(cv.sqrt_factors)
                             * F(1, 4 ** cv.two_power))
        assert previous <= captured <= norm_scaled
        previous = captured


@pytest.mark.parametrize("lam", [F(1, 4), 4])
def test_scale_covariance(lam):
    for exponents in [(0, 0), (1, 0, 2)]:
        w = WeightSpec(exponents)
        power = (w.k + 2 * sum(exponents)) / 2
        base = Interval.from_length(F(5, 8))
        scaled = Interval.from_length(F(5, 8) * lam)
        for j in [(0,) * w.k, (1, 0) + (2,) * (w.k - 2)]:
            cv = fourier_coefficient(j, w)
            if cv.core == 0:
                continue
            ratio = cv.value(scaled) / cv.value(base)
            assert ratio == pytest.approx(float(lam) ** power, rel=1e-12)


# --- cache -------------------------------------------------------------------


def test_cache_round_trip(tmp_path):
    w = WeightSpec((0, 1))
    table = coefficient_table(w, 3)
    path = tmp_path / "table.json"
    save_table(path, w, 3, table)
    w2, p2, reloaded = load_table(path)
    assert (w2, p2) == (w, 3)
    assert reloaded == table


def test_coefficient_table_uses_cache_dir(tmp_path, monkeypatch):
    w = WeightSpec.unit(2)
    first = coefficient_table(w, 2, cache_dir=tmp_path)
    files = list(tmp_path.glob("*.json"))
    assert len(files) == 1
    again = coefficient_table(w, 2, cache_dir=tmp_path)
    assert again == first

    monkeypatch.setenv("COEFF_CACHE_DIR", str(tmp_path))
    from_env = coefficient_table(w, 2)
    assert from_env == first


def test_cache_detects_corruption(tmp_path):
    w = WeightSpec.unit(2)
    coefficient_table(w, 1, cache_dir=tmp_path)
    path = next(tmp_path.glob("*.json"))
    text = path.read_text()
    corrupted = text.replace('"core": "2/3"', '"core": "2/5"', 1)
    assert corrupted != text
    path.write_text(corrupted)
    with pytest.raises(CacheIntegrityError):
        load_table(path)


def test_cache_rejects_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(CacheIntegrityError):
        load_table(path)


def test_cache_rejects_checksum_field_tampering(tmp_path):
    w = WeightSpec.unit(1)
    coefficient_table(w, 1, cache_dir=tmp_path)
    path = next(tmp_path.glob("*.json"))
    doc = json.loads(path.read_text())
    doc["checksum"] = "0" * 64
    path.write_text(json.dumps(doc))
    with pytest.raises(CacheIntegrityError):
        load_table(path)
