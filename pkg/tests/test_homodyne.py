import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize
from scipy.special import erf, erfinv

from cvtele.fock_core import basis_state
from cvtele.homodyne import (
    DatasetFormatError,
    QuadratureDataset,
    TimeTrace,
    gamma_from_fwhm,
    hermite_functions,
    mode_energy_fraction,
    mode_function_quadrature,
    mode_function_weights,
    quadrature_pdf,
    read_dataset,
    sample_quadratures,
    write_dataset,
)
from cvtele.states import model3_state, photon_subtracted_sv, squeezed_vacuum

from conftest import random_density, seeds


def test_hermite_functions_orthonormal():
    xs = np.linspace(-12, 12, 6001)
    psi = hermite_functions(20, xs)
    gram = integrate.trapezoid(psi[:, None, :] * psi[None, :, :], xs, axis=-1)
    assert np.allclose(gram, np.eye(21), atol=1e-10)


def test_pdf_examples():
    xs = np.linspace(-4, 4, 81)
    assert np.allclose(quadrature_pdf(basis_state(0).dm(), 0.7, xs), np.exp(-xs ** 2) / math.sqrt(math.pi))
    one = quadrature_pdf(basis_state(1).dm(), 1.1, xs)
    assert np.allclose(one, 2 * xs ** 2 * np.exp(-xs ** 2) / math.sqrt(math.pi))
    assert one[40] == 0.0
    with pytest.raises(ValueError):
        quadrature_pdf(basis_state(0).dm(), 0.0, [np.nan])


def test_pdf_of_squeezed_vacuum_along_p():
    xs = np.linspace(-5, 5, 41)
    v = math.exp(0.56) / 2
    expected = np.exp(-xs ** 2 / (2 * v)) / math.sqrt(2 * math.pi * v)
    assert np.allclose(quadrature_pdf(squeezed_vacuum(0.28, 30).dm(), math.pi / 2, xs), expected, atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(0.0, 2 * math.pi))
def test_pdf_periodic_and_normalized(seed, theta):
    rho = random_density(seed)
    xs = np.linspace(-8, 8, 1601)
    a = quadrature_pdf(rho, theta, xs)
    b = quadrature_pdf(rho, theta + 2 * math.pi, xs)
    assert np.max(np.abs(a - b)) < 1e-12
    assert integrate.trapezoid(a, xs) == pytest.approx(1.0, abs=1e-8)
    assert np.min(a) > -1e-12


def test_sampling_matches_exact_inverse_cdf_for_vacuum():
    data = sample_quadratures(basis_state(0).dm(), 500, seed=42)
    rng = np.random.default_rng(42)
    thetas = rng.uniform(0, 2 * math.pi, 500)
    us = rng.uniform(0, 1, 500)
    assert np.array_equal(data.thetas, thetas)
    # Gaussian with variance 1/2: CDF (1 + erf x)/2
    assert np.max(np.abs(data.xs - erfinv(2 * us - 1))) < 1e-4


def test_sampling_matches_exact_inverse_cdf_for_one_photon():
    data = sample_quadratures(basis_state(1).dm(), 50, seed=3)
    rng = np.random.default_rng(3)
    rng.uniform(0, 2 * math.pi, 50)
    us = rng.uniform(0, 1, 50)

    def cdf(x):
        return 0.5 * (1 + math.erf(x)) - x * math.exp(-x * x) / math.sqrt(math.pi)

    exact = [optimize.brentq(lambda x: cdf(x) - u, -7, 7, xtol=1e-12) for u in us]
    assert np.max(np.abs(data.xs - exact)) < 1e-4


def test_sampling_statistics():
    vac = sample_quadratures(basis_state(0).dm(), 100_000, seed=1)
    assert np.var(vac.xs) == pytest.approx(0.5, abs=0.01)
    one = sample_quadratures(basis_state(1).dm(), 100_000, seed=2)
    assert np.mean(np.abs(one.xs) < 0.1) < 0.002


def test_sampling_deterministic():
    rho = model3_state()
    a = sample_quadratures(rho, 3000, seed=9)
    b = sample_quadratures(rho, 3000, seed=9)
    assert np.array_equal(a.xs, b.xs) and np.array_equal(a.thetas, b.thetas)
    c = sample_quadratures(rho, 3000, seed=10)
    assert not np.array_equal(a.xs, c.xs)
    with pytest.raises(ValueError):
        sample_quadratures(rho, 0, seed=1)


def test_phase_averaged_variance_identity():
    rho = photon_subtracted_sv(0.28).dm()
    data = sample_quadratures(rho, 200_000, seed=5)
    x2 = data.xs ** 2
    se = np.std(x2) / math.sqrt(len(x2))
    assert abs(np.mean(x2) - (rho.mean_photon + 0.5)) < 3 * se


def test_histogram_l1_convergence_rate():
    edges = np.linspace(-6, 6, 241)
    ref = np.diff(0.5 * (1 + erf(edges)))
    rho = basis_state(0).dm()

    def mean_l1(n):
        return np.mean([np.sum(np.abs(np.histogram(sample_quadratures(rho, n, s).xs, edges)[0] / n - ref))
                        for s in range(100, 108)])

    ratio = mean_l1(10_000) / mean_l1(100_000)
    assert math.sqrt(10) * 0.8 <= ratio <= math.sqrt(10) * 1.2


def test_dataset_validation_and_rotation():
    with pytest.raises(ValueError):
        QuadratureDataset([], [])
    with pytest.raises(ValueError):
        QuadratureDataset([0.1, 0.2], [0.0])
    with pytest.raises(ValueError):
        QuadratureDataset([7.0], [0.0])
    d = QuadratureDataset([0.1, 6.2], [1.0, 2.0]).rotated(0.5)
    assert np.allclose(d.thetas, [0.6, (6.7) % (2 * math.pi)])


def test_dataset_round_trip(tmp_path):
    data = sample_quadratures(model3_state(), 1000, seed=4, source="test")
    write_dataset(data, tmp_path / "d.csv")
    back = read_dataset(tmp_path / "d.csv")
    assert np.array_equal(back.thetas, data.thetas) and np.array_equal(back.xs, data.xs)
    assert back.meta["seed"] == 4 and back.meta["source"] == "test" and back.meta["n"] == 1000


@pytest.mark.parametrize("content, message", [
    ("", "empty file"),
    ("theta,x\n", "no records"),
    ("a,b\n0.1,0.2\n", "expected header"),
    ("theta,x\n0.1,0.2\n0.1\n", ":3:"),
    ("theta,x\n0.1,zz\n", "non-numeric"),
    ("theta,x\n9.0,0.2\n", "out of range"),
])
def test_dataset_format_errors(tmp_path, content, message):
    p = tmp_path / "bad.csv"
    p.write_text(content)
    with pytest.raises(DatasetFormatError, match=message):
        read_dataset(p)


def test_mode_quadrature_constant_trace():
    rate, gamma, c = 1e9, gamma_from_fwhm(12.3e6), 0.3
    trace = TimeTrace(np.full(500, c), rate)
    f, dt = mode_function_weights(500, rate, 250, gamma)
    expected = c * f.sum() * dt / math.sqrt(np.sum(f ** 2) * dt)
    q = mode_function_quadrature(trace, gamma)
    assert q.value == pytest.approx(expected, rel=1e-12)
    assert q.contained
    assert mode_function_quadrature(trace, gamma).value == q.value


def test_mode_quadrature_containment_flag():
    q = mode_function_quadrature(TimeTrace(np.zeros(100), 1e9, center_index=50), 1e6)
    assert not q.contained
    with pytest.raises(ValueError):
        mode_function_quadrature(TimeTrace(np.zeros(10), 1e9, 5), 0.0)
    with pytest.raises(ValueError):
        TimeTrace(np.zeros(10), 1e9, 10)
    with pytest.raises(ValueError):
        TimeTrace(np.zeros(10), 0.0, 5)


def test_white_noise_gives_unit_variance():
    rate, gamma = 1e9, gamma_from_fwhm(12.3e6)
    rng = np.random.default_rng(2024)
    dt = 1 / rate
    values = [mode_function_quadrature(TimeTrace(rng.normal(0, 1 / math.sqrt(dt), 500), rate), gamma).value
              for _ in range(10_000)]
    assert np.var(values) == pytest.approx(1.0, abs=0.05)


def test_mode_energy_fraction():
    assert mode_energy_fraction(500, 1e9, 250, gamma_from_fwhm(12.3e6)) >= 0.99
    # analytic continuous-time value 1 - exp(-2 gamma T/2) as an independent cross-check
    g = gamma_from_fwhm(12.3e6)
    cont = 1 - math.exp(-2 * g * 250e-9)
    assert mode_energy_fraction(500, 1e9, 250, g) == pytest.approx(cont, abs=2e-3)
    assert gamma_from_fwhm(1.0) == pytest.approx(math.pi)
