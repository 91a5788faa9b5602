import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from hypothesis import given, settings, strategies as st

from cvtele.fock_core import DensityMatrix, basis_state, fidelity_pure, validate_density
from cvtele.homodyne import quadrature_pdf
from cvtele.states import (
    CatModelParams,
    coherent,
    dark_count_mix,
    loss_channel,
    mixture_model1,
    model3_state,
    odd_cat,
    photon_subtracted_sv,
    squeezed_vacuum,
)
from cvtele.wigner import wigner_origin_parity

from conftest import random_density, seeds


def test_coherent_examples():
    assert np.allclose(coherent(0).amplitudes, basis_state(0).amplitudes)
    assert coherent(1.0).dm().mean_photon == pytest.approx(1.0, abs=1e-6)
    assert coherent(0.99).dm().populations[0] == pytest.approx(math.exp(-0.99 ** 2), abs=1e-9)
    with pytest.raises(ValueError):
        coherent(3.0, 15)


def test_coherent_phase():
    c = coherent(0.5j, 15).amplitudes
    assert c[1] / c[0] == pytest.approx(0.5j)


def test_squeezed_vacuum_examples():
    assert np.allclose(squeezed_vacuum(0).amplitudes, basis_state(0).amplitudes)
    sv = squeezed_vacuum(0.28)
    assert sv.dm().mean_photon == pytest.approx(math.sinh(0.28) ** 2, abs=1e-6)
    xs = np.linspace(-8, 8, 4001)
    pdf = quadrature_pdf(sv.dm(), 0.0, xs)
    var = trapezoid(xs ** 2 * pdf, xs)
    assert var == pytest.approx(math.exp(-0.56) / 2, abs=1e-6)
    with pytest.raises(ValueError):
        squeezed_vacuum(-0.1)


def test_photon_subtracted_examples():
    psv = photon_subtracted_sv(0.28)
    assert psv.dm().mean_photon == pytest.approx(1 + 3 * math.sinh(0.28) ** 2, abs=1e-5)
    assert np.all(np.abs(psv.amplitudes[0::2]) <= 1e-12)
    assert fidelity_pure(basis_state(1), photon_subtracted_sv(1e-4).dm()) > 1 - 1e-7
    with pytest.raises(ValueError):
        photon_subtracted_sv(0.0)


def test_photon_subtracted_mean_from_sv_moments():
    # <n> after subtraction = (<n^2> - <n>)/<n> evaluated on the squeezed vacuum
    p = squeezed_vacuum(0.28, 40).dm().populations
    n = np.arange(41)
    expected = (p @ n ** 2 - p @ n) / (p @ n)
    assert photon_subtracted_sv(0.28, 40).dm().mean_photon == pytest.approx(expected, abs=1e-10)


def test_odd_cat_examples():
    cat = odd_cat(1.0)
    assert np.sum(np.abs(cat.amplitudes[1::2]) ** 2) == pytest.approx(1.0, abs=1e-12)
    assert fidelity_pure(basis_state(1), odd_cat(0.01).dm()) > 0.9999
    a2 = 0.99 ** 2
    closed = a2 * (1 + math.exp(-2 * a2)) / (1 - math.exp(-2 * a2))
    assert odd_cat(0.99, 25).dm().mean_photon == pytest.approx(closed, abs=1e-8)
    assert closed == pytest.approx(1.3014, abs=1e-4)
    with pytest.raises(ValueError):
        odd_cat(0.0)


def test_mixture_model1_examples():
    assert np.allclose(mixture_model1(1.0).entries, basis_state(1).dm().entries)
    assert mixture_model1(0.77).mean_photon == pytest.approx(0.77)
    assert wigner_origin_parity(mixture_model1(0.5)) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        mixture_model1(1.2)


def test_loss_on_one_photon_is_model1():
    for eta in (0.0, 0.3, 0.77, 1.0):
        out = loss_channel(basis_state(1).dm(), eta)
        assert np.allclose(out.entries, mixture_model1(eta).entries, atol=1e-14)


def test_loss_identity_and_range():
    rho = random_density(5)
    assert np.allclose(loss_channel(rho, 1.0).entries, rho.entries)
    with pytest.raises(ValueError):
        loss_channel(rho, -0.1)


def test_model3_origin():
    rho = model3_state(0.28, 0.79)
    assert wigner_origin_parity(rho) == pytest.approx(-0.171, abs=1e-3)


def test_dark_count_examples():
    one, zero = basis_state(1).dm(), basis_state(0).dm()
    assert dark_count_mix(one, zero, math.inf) is one
    assert np.allclose(dark_count_mix(one, zero, 0.0).entries, zero.entries)
    assert dark_count_mix(one, zero, 66).mean_photon == pytest.approx(66 / 67, abs=1e-12)
    with pytest.raises(ValueError):
        dark_count_mix(one, zero, -1)


def test_cat_params_validation():
    CatModelParams()
    with pytest.raises(ValueError):
        CatModelParams(eta=1.5)
    with pytest.raises(ValueError):
        CatModelParams(alpha=-1)


@pytest.mark.parametrize("factory", [lambda: squeezed_vacuum(0.5), lambda: squeezed_vacuum(0.28)])
def test_squeezed_parity(factory):
    assert np.all(np.abs(factory().amplitudes[1::2]) <= 1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.5), st.floats(0.0, 1.0))
def test_odd_parity_families(s, alpha_frac):
    assert np.all(np.abs(photon_subtracted_sv(s).amplitudes[0::2]) <= 1e-12)
    alpha = 0.05 + 2.0 * alpha_frac
    assert np.all(np.abs(odd_cat(alpha).amplitudes[0::2]) <= 1e-12)


@settings(max_examples=25, deadline=None)
@given(seeds, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_loss_semigroup(seed, e1, e2):
    rho = random_density(seed)
    a = loss_channel(loss_channel(rho, e1), e2)
    b = loss_channel(rho, e1 * e2)
    assert np.max(np.abs(a.entries - b.entries)) < 1e-8


@settings(max_examples=25, deadline=None)
@given(seeds, st.floats(0.0, 1.0))
def test_loss_scales_mean_photon(seed, eta):
    rho = random_density(seed)
    out = loss_channel(rho, eta)
    assert abs(out.mean_photon - eta * rho.mean_photon) < 1e-8
    validate_density(out.entries)


def test_cat_premise():
    psv = photon_subtracted_sv(0.28).dm()
    alphas = np.linspace(0.5, 1.5, 1001)
    # the cat axis is p for an x-squeezed parent state
    best = max(fidelity_pure(_p_cat(a), psv) for a in alphas)
    assert best >= 0.99


def _p_cat(alpha):
    cat = odd_cat(alpha)
    return type(cat)(cat.amplitudes * np.exp(0.5j * np.pi * np.arange(16)))
