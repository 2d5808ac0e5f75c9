import math

import numpy as np
import pytest

from nodalcount import domain as D
from nodalcount.domain import Disk, Rectangle, SpectralWindow, TrigPolynomial
from nodalcount.ensemble import CoefficientVector, WaveModel, sample_coefficients
from nodalcount.kacrice import compute_cij


def test_same_key_same_draw():
    a = sample_coefficients(50, 42, 7)
    b = sample_coefficients(50, 42, 7)
    assert np.array_equal(a.values, b.values)
    assert (a.master_seed, a.trial) == (42, 7)


def test_empty_draw():
    assert len(sample_coefficients(0, 1, 0)) == 0


def test_neighbouring_trials_uncorrelated():
    a = sample_coefficients(10_000, 42, 3).values
    b = sample_coefficients(10_000, 42, 4).values
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


def test_draw_is_prefix_stable():
    # a trial's stream does not depend on how many deviates are requested later
    assert np.array_equal(sample_coefficients(5, 9, 1).values, sample_coefficients(20, 9, 1).values[:5])


def test_pooled_moments():
    pooled = np.concatenate([sample_coefficients(10_000, 2024, t).values for t in range(100)])
    n = pooled.size
    assert abs(pooled.mean()) <= 4 / math.sqrt(n)
    # the sample variance of N(0,1) has standard deviation sqrt(2/n)
    assert abs(pooled.var() - 1.0) <= 4 * math.sqrt(2 / n)


def test_negative_inputs():
    with pytest.raises(ValueError):
        sample_coefficients(-1, 0, 0)
    with pytest.raises(ValueError):
        sample_coefficients(3, 0, -1)


@pytest.fixture(scope="module")
def short_model():
    return WaveModel(Disk(1.0), SpectralWindow("short", 20.0))


def test_zero_coefficients(short_model):
    wave = short_model.wave(CoefficientVector(np.zeros(short_model.size), 0, 0))
    theta = np.linspace(0, 7, 30)
    assert np.all(wave.trace_at(theta) == 0)
    assert np.all(wave.trace_derivative_at(theta) == 0)
    assert wave.interior_value([0.1, 0.2]) == 0


def test_single_mode_wave_equals_mode():
    disk = Disk(1.0)
    md = D.enumerate_modes(disk, SpectralWindow("long", 12.0))[9]
    model = WaveModel(disk, None, [md])
    wave = model.wave(CoefficientVector(np.array([1.0]), 0, 0))
    theta = np.linspace(0, 2 * math.pi, 25)
    assert np.allclose(wave.trace_at(theta), D.trace_value(md, disk, theta), rtol=1e-12, atol=1e-12)
    assert np.allclose(wave.trace_derivative_at(theta), D.trace_derivative(md, disk, theta),
                       rtol=1e-12, atol=1e-11)
    p = [0.3, -0.2]
    assert wave.interior_value(p) == pytest.approx(D.eigenfunction_value(md, disk, p), rel=1e-12)


def test_single_mode_rectangle():
    r = Rectangle(1.5, 1.0)
    md = D.enumerate_modes(r, SpectralWindow("long", 10.0))[3]
    wave = WaveModel(r, None, [md]).wave(CoefficientVector(np.array([1.0]), 0, 0))
    theta = np.linspace(0.01, r.boundary_length - 0.01, 33)
    assert np.allclose(wave.trace_at(theta), D.trace_value(md, r, theta), atol=1e-12)
    assert np.allclose(wave.trace_derivative_at(theta), D.trace_derivative(md, r, theta), atol=1e-11)


@pytest.mark.parametrize("domain", [Disk(1.0), Rectangle(1.0, 1.7)])
def test_linearity(domain):
    model = WaveModel(domain, SpectralWindow("long", 15.0))
    a = sample_coefficients(model.size, 1, 0)
    b = sample_coefficients(model.size, 1, 1)
    ab = CoefficientVector(a.values + b.values, 1, -1)
    theta = np.random.default_rng(0).uniform(0, domain.boundary_length, 100)
    lhs = model.wave(ab).trace_at(theta)
    rhs = model.wave(a).trace_at(theta) + model.wave(b).trace_at(theta)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.max(np.abs(rhs)))


@pytest.mark.parametrize("domain", [Disk(1.0), Rectangle(1.0, 1.7)])
def test_derivative_matches_difference(domain):
    model = WaveModel(domain, SpectralWindow("short", 18.0))
    wave = model.draw(5, 2)
    h = 1e-6
    theta = np.random.default_rng(1).uniform(0, domain.boundary_length, 40)
    if isinstance(domain, Rectangle):
        theta = theta[np.min(np.abs(theta[:, None] - domain.corners[None, :]), axis=1) > 1e-3]
    fd = (wave.trace_at(theta + h) - wave.trace_at(theta - h)) / (2 * h)
    scale = np.max(np.abs(wave.trace_on_grid(4 * model.min_grid())[1])) * 19.0
    assert np.allclose(fd, wave.trace_derivative_at(theta), rtol=1e-5, atol=1e-6 * scale)


def test_periodicity_exact(short_model):
    wave = short_model.draw(3, 3)
    theta = np.linspace(0, 2 * math.pi, 17, endpoint=False)
    ell = short_model.boundary_length
    assert np.array_equal(wave.trace_at(theta + ell), wave.trace_at(np.mod(theta + ell, ell)))
    assert np.allclose(wave.trace_at(theta + ell), wave.trace_at(theta), rtol=0, atol=1e-12)


def test_grid_values_match_pointwise(short_model):
    wave = short_model.draw(8, 0)
    t, v = wave.trace_on_grid(300)
    assert np.allclose(v, wave.trace_at(t), rtol=0, atol=1e-11 * np.max(np.abs(v)))


def test_interior_vanishes_on_boundary(short_model):
    wave = short_model.draw(4, 1)
    pts = D.boundary_point(Disk(1.0), np.linspace(0, 6, 13))
    assert np.max(np.abs(wave.interior_value(pts))) <= 1e-10 * np.max(np.abs(wave.trace_at(np.linspace(0, 6, 13))))


def test_offset_series_matches_interior(short_model):
    wave = short_model.draw(4, 1)
    theta = np.linspace(0.1, 6.0, 11)
    pts = D.offset_point(Disk(1.0), theta, 0.003)
    assert np.allclose(wave.offset_series(0.003).value(theta), wave.interior_value(pts), atol=1e-12)


def test_variance_equals_c11():
    model = WaveModel(Disk(1.0), SpectralWindow("short", 12.0))
    theta = np.array([0.4, 2.0])
    v, _ = model.basis.trace_matrix(theta)
    coeffs = np.stack([sample_coefficients(model.size, 99, t).values for t in range(50_000)])
    samples = coeffs @ v
    c11 = compute_cij(model, grid_n=64).c11.mean()
    assert np.allclose(samples.var(axis=0), c11, rtol=0.05)


def test_coefficient_length_checked(short_model):
    with pytest.raises(ValueError):
        short_model.wave(CoefficientVector(np.zeros(3), 0, 0))


def test_min_grid_floor():
    assert WaveModel(Disk(1.0), SpectralWindow("short", 30.0)).min_grid() == math.ceil(8 * 32)
    assert WaveModel(Disk(2.0), SpectralWindow("long", 10.0)).min_grid() == math.ceil(8 * 11 * 2)
    assert WaveModel(TrigPolynomial((3,)), None).min_grid() == 32
