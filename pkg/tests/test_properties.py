import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from nodalcount.domain import Disk, SpectralWindow, TrigPolynomial, enumerate_modes, mode_count
from nodalcount.ensemble import CoefficientVector, WaveModel
from nodalcount.kacrice import expected_zero_count
from nodalcount.specfun import bessel_j
from nodalcount.zerocount import PeriodicFunction, count_zeros, regularized_count

TWO_PI = 2 * math.pi
FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@FAST
@given(st.integers(1, 150), st.floats(0.05, 200.0))
def test_three_term_recurrence(m, x):
    resid = bessel_j(m - 1, x) + bessel_j(m + 1, x) - (2 * m / x) * bessel_j(m, x)
    assert abs(resid) <= 1e-10 * max(1.0, 2 * m / x)


@FAST
@given(st.integers(0, 200), st.floats(0.0, 200.0))
def test_bessel_bounded(m, x):
    assert abs(bessel_j(m, x)) <= 1.0 + 1e-15


@FAST
@given(st.floats(3.0, 60.0), st.floats(0.0, 20.0))
def test_long_window_count_monotone_and_additive(lam, extra):
    disk = Disk(1.0)
    lo = mode_count(disk, SpectralWindow("long", lam))
    hi = mode_count(disk, SpectralWindow("long", lam + extra))
    # modes in (lam, lam+extra] are exactly those added
    added = [md for md in enumerate_modes(disk, SpectralWindow("long", lam + extra))
             if md.eigenvalue > lam]
    assert hi == lo + len(added)


@FAST
@given(st.integers(1, 12), st.integers(0, 2**31), st.integers(0, 500))
def test_pair_window_realizations_have_2m_zeros(m, seed, trial):
    model = WaveModel(TrigPolynomial((m,)), None)
    assert count_zeros(model.draw(seed, trial)).count == 2 * m


@FAST
@given(st.integers(1, 12))
def test_pair_window_expected_count(m):
    assert expected_zero_count(TrigPolynomial((m,)), grid_n=64).z == pytest.approx(2 * m, abs=1e-9)


@FAST
@given(st.integers(0, 2**31), st.integers(0, 200), st.floats(12.0, 26.0))
def test_disk_zero_count_even(seed, trial, lam):
    model = WaveModel(Disk(1.0), SpectralWindow("short", lam))
    if model.size:
        zs = count_zeros(model.draw(seed, trial))
        assert zs.count % 2 == 0


@FAST
@given(st.integers(0, 2**31), st.floats(-3.0, 3.0).filter(lambda c: abs(c) > 1e-3),
       st.floats(0.0, TWO_PI))
def test_wave_linear_and_periodic(seed, scale, theta):
    model = WaveModel(Disk(1.0), SpectralWindow("long", 14.0))
    a = model.draw(seed, 0)
    b = model.wave(CoefficientVector(scale * a.coefficients.values, seed, 0))
    va = a.trace_at(theta)
    assert b.trace_at(theta) == pytest.approx(scale * va, rel=1e-12, abs=1e-12)
    assert a.trace_at(theta + TWO_PI) == pytest.approx(va, abs=1e-11)
    # scaling never changes the zero set
    assert count_zeros(b).count == count_zeros(a).count


@FAST
@given(st.floats(0.1, 10.0), st.integers(1, 9), st.floats(0.0, TWO_PI), st.floats(1e-4, 0.999))
def test_regularized_count_of_sinusoid(amp, k, phase, rel_eps):
    f = PeriodicFunction(TWO_PI, lambda t: amp * np.sin(k * t + phase),
                         lambda t: amp * k * np.cos(k * t + phase), None, float(k), 16)
    assert regularized_count(f, rel_eps * amp, 16 * k) == pytest.approx(2 * k, abs=1e-9)
