import math

import numpy as np
import pytest

from nodalcount import specfun
from nodalcount.specfun import (BesselZeroTable, ConvergenceError, RangeError, bessel_j,
                                bessel_j_each, bessel_j_prime, bessel_zero, read_zero_fixture)
from oracles import series_bessel, series_zero

J01 = 2.404825557695773


def test_small_argument_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert bessel_j_prime(0, 0.0) == 0.0
    assert bessel_j_prime(1, 0.0) == 0.5


def test_first_zero_of_j0():
    assert abs(bessel_j(0, J01)) <= 1e-10
    assert abs(bessel_zero(0, 1) - J01) <= 1e-10
    assert abs(bessel_zero(1, 1) - 3.8317059702075125) <= 1e-10


def test_derivative_at_first_zero_is_minus_j1():
    d = bessel_j_prime(0, J01)
    ref, bound = series_bessel(1, J01)
    assert d < 0
    assert abs(d + float(ref)) <= 1e-12


@pytest.mark.parametrize("m", [1, 2, 7, 40])
def test_derivative_identity(m):
    x = np.linspace(0.3, 90.0, 37)
    expect = 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x))
    assert np.array_equal(bessel_j_prime(m, x), expect)


def test_against_series_oracle_on_full_range():
    rng = np.random.default_rng(7)
    ms = np.concatenate([[0, 1, 200, 200, 150], rng.integers(0, 201, 55)])
    xs = np.concatenate([[200.0, 0.37, 200.0, 150.0, 151.3], rng.uniform(0, 200, 55)])
    worst = 0.0
    for m, x in zip(ms, xs):
        ref, bound = series_bessel(int(m), float(x))
        assert bound < 1e-20
        worst = max(worst, abs(bessel_j(int(m), float(x)) - float(ref)))
    assert worst <= 1e-12


def test_against_series_oracle_near_transitions():
    # Miller start buckets and the series crossover
    for m in (0, 3, 17):
        for x in (0.999999, 1.0, 1.000001, 15.999, 16.0, 16.001, 47.9, 48.1):
            ref, _ = series_bessel(m, x)
            assert abs(bessel_j(m, x) - float(ref)) <= 1e-13


def test_large_argument_matches_reference():
    mpmath = pytest.importorskip("mpmath")
    for m, x in [(0, 1500.0), (5, 2000.0), (30, 50000.0)]:
        assert abs(bessel_j(m, x) - float(mpmath.besselj(m, x))) <= 1e-13


def test_recurrence_identity():
    xs = np.geomspace(0.1, 150.0, 60)
    for m in range(1, 101):
        resid = bessel_j(m - 1, xs) + bessel_j(m + 1, xs) - (2 * m / xs) * bessel_j(m, xs)
        assert np.max(np.abs(resid)) <= 1e-10


def test_vectorized_matches_scalar():
    xs = np.array([0.0, 0.5, 3.0, 77.0, 180.0])
    vec = bessel_j(4, xs)
    assert np.array_equal(vec, np.array([bessel_j(4, float(x)) for x in xs]))
    each = bessel_j_each(np.array([4, 4, 9, 0, 1]), xs)
    assert np.allclose(each, [bessel_j(4, 0.0), vec[1], bessel_j(9, 3.0), bessel_j(0, 77.0),
                              bessel_j(1, 180.0)], rtol=0, atol=1e-14)


@pytest.mark.parametrize("bad", [(-1, 1.0), (specfun.MAX_ORDER + 1, 1.0), (2, -0.5),
                                 (2, float("nan")), (2, float("inf")), (1.5, 1.0)])
def test_range_errors(bad):
    with pytest.raises(RangeError):
        bessel_j(*bad)


def test_zero_lookup_errors():
    with pytest.raises(RangeError):
        bessel_zero(0, 0)
    with pytest.raises(RangeError):
        bessel_zero(-2, 1)


def test_zero_table_invariants():
    table = BesselZeroTable(max_order=61)
    zeros = {}
    for m in range(61):
        for k in range(1, 41):
            zeros[(m, k)] = table.zero(m, k)
    ms = np.array([m for m, _ in zeros])
    js = np.array(list(zeros.values()))
    assert np.max(np.abs(bessel_j_each(ms, js))) <= 1e-10
    for m in range(60):
        for k in range(1, 40):
            assert zeros[(m, k)] < zeros[(m + 1, k)] < zeros[(m, k + 1)]
    for m in range(61):
        gaps = np.diff([zeros[(m, k)] for k in range(20, 41)])
        assert np.all(gaps > 0.9 * math.pi)


def test_zero_lookup_is_deterministic():
    a = BesselZeroTable(max_order=30).zero(17, 12)
    b = BesselZeroTable(max_order=30).zero(17, 12)
    assert a == b == bessel_zero(17, 12)
    assert bessel_zero(17, 12) == bessel_zero(17, 12)


def test_zeros_against_golden_fixture(data_dir):
    golden = read_zero_fixture(data_dir / "golden_zeros.csv")
    assert len(golden) >= 100
    for (m, k), ref in golden.items():
        assert abs(bessel_zero(m, k) - ref) <= 1e-12 * max(1.0, ref)


def test_golden_fixture_reproduces_from_oracle(data_dir):
    golden = read_zero_fixture(data_dir / "golden_zeros.csv")
    for m, k in [(0, 1), (1, 1), (7, 3)]:
        ref = golden[(m, k)]
        assert abs(series_zero(m, ref - 0.01, ref + 0.01) - ref) <= 1e-13 * ref


def test_fixture_roundtrip(tmp_path):
    zeros = {(0, 1): bessel_zero(0, 1), (3, 2): bessel_zero(3, 2)}
    path = tmp_path / "z.csv"
    specfun.write_zero_fixture(path, zeros)
    assert path.read_text().splitlines()[0] == "m,k,j_mk"
    back = read_zero_fixture(path)
    for key, val in zeros.items():
        assert abs(back[key] - val) <= 1e-14 * val


def test_zeros_upto_covers_interval():
    zs = specfun.default_table().zeros_upto(2, 40.0)
    assert zs[-1] <= 40.0
    assert bessel_zero(2, len(zs) + 1) > 40.0


def test_convergence_error_is_runtime_error():
    assert issubclass(ConvergenceError, RuntimeError)
