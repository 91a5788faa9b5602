import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvtele.fock_core import TruncationWarning, basis_state, fidelity_pure
from cvtele.states import coherent, mixture_model1, model3_state, odd_cat, squeezed_vacuum
from cvtele.teleport import (
    TeleporterParams,
    added_noise_db,
    fit_eta_model1,
    fit_eta_model3,
    gaussian_fidelity,
    output_negativity_model1,
    output_negativity_model3,
    squeezing_db_to_r,
    teleport_fock,
    teleport_wigner,
)
from cvtele.wigner import PhaseSpaceGrid, model3_wigner, wigner_from_rho, wigner_origin_parity

R_PAPER = squeezing_db_to_r(6.9)
BIG = PhaseSpaceGrid(-7, 7, -7, 7, 281, 281)


def test_squeezing_db_to_r_examples():
    assert squeezing_db_to_r(0.0) == 0.0
    assert R_PAPER == pytest.approx(0.795, abs=1e-3)
    assert math.exp(-2 * squeezing_db_to_r(10 * math.log10(2))) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        squeezing_db_to_r(-1.0)


def test_gaussian_fidelity_examples():
    assert gaussian_fidelity(0.0) == 0.5
    assert gaussian_fidelity(math.inf) == 1.0
    assert gaussian_fidelity(R_PAPER) == pytest.approx(0.8304, abs=1e-4)


def test_added_noise_examples():
    assert added_noise_db(0.0) == pytest.approx(4.771, abs=1e-3)
    assert added_noise_db(0.7944) == pytest.approx(1.487, abs=1e-3)
    assert added_noise_db(math.inf) == 0.0


def test_params_derived_quantities():
    p = TeleporterParams(0.5)
    assert p.noise_var == pytest.approx(math.exp(-1))
    assert p.sigma == pytest.approx(math.exp(-0.5))
    assert p.g_r == pytest.approx(1 + 2 * math.exp(-1))
    assert TeleporterParams.from_db(6.9).r == pytest.approx(R_PAPER)
    with pytest.raises(ValueError):
        TeleporterParams(-0.1)


def test_teleport_wigner_infinite_r_is_identity():
    w = wigner_from_rho(basis_state(1).dm())
    assert np.array_equal(teleport_wigner(w, TeleporterParams(math.inf)).values, w.values)


def test_one_photon_classical_limit():
    w = teleport_wigner(wigner_from_rho(basis_state(1).dm(), BIG), TeleporterParams(0.0))
    assert w.at_origin() == pytest.approx(1 / (9 * math.pi), abs=1e-6)
    assert w.at_origin() > 0


def test_model1_grid_convolution():
    eta = fit_eta_model1(-0.171)
    assert eta == pytest.approx(0.7686, abs=1e-4)
    w = teleport_wigner(wigner_from_rho(mixture_model1(eta), BIG), TeleporterParams(R_PAPER))
    assert w.at_origin() == pytest.approx(-0.0208, abs=5e-4)
    assert output_negativity_model1(eta, R_PAPER) == pytest.approx(w.at_origin(), abs=1e-6)


def test_model1_closed_form_examples():
    assert output_negativity_model1(1.0, math.inf) == pytest.approx(-1 / math.pi)
    for r in (0.0, 0.4, 1.5):
        e = math.exp(-2 * r)
        v = output_negativity_model1(0.5, r)
        assert v == pytest.approx(2 * e / (math.pi * (1 + 2 * e) ** 2)) and v > 0


def test_model3_closed_form_examples():
    assert output_negativity_model3(0.79, 0.28, 0.7944) == pytest.approx(-0.0247, abs=2e-4)
    assert output_negativity_model3(0.79, 0.28, math.inf) == pytest.approx(-0.1708, abs=1e-4)
    for eta in (0.2, 0.79, 1.0):
        for r in (0.0, 0.8, math.inf):
            assert output_negativity_model3(eta, 0.0, r) == pytest.approx(
                output_negativity_model1(eta, r), abs=1e-12)


def test_model3_closed_form_matches_grid():
    w = teleport_wigner(model3_wigner(0.28, 0.79, BIG), TeleporterParams(R_PAPER))
    assert w.at_origin() == pytest.approx(output_negativity_model3(0.79, 0.28, R_PAPER), abs=1e-6)


def test_fit_eta_inverts_forward_model():
    assert fit_eta_model3(-0.171, 0.28) == pytest.approx(0.79, abs=5e-3)
    eta = fit_eta_model3(-0.12, 0.5)
    assert output_negativity_model3(eta, 0.5, math.inf) == pytest.approx(-0.12, abs=1e-10)


def test_no_cloning_threshold_exact():
    for r in (0.2, 0.3466, 0.5, 0.34657359 - 1e-4, 0.34657359 + 1e-4):
        negative = output_negativity_model1(1.0, r) < 0
        assert negative == (gaussian_fidelity(r) > 2 / 3)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.51, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_negativity_shrinks_as_r_decreases(eta, s, r1, r2):
    lo, hi = sorted((r1, r2))
    neg_lo = max(-output_negativity_model3(eta, s, lo), 0.0)
    neg_hi = max(-output_negativity_model3(eta, s, hi), 0.0)
    assert neg_lo <= neg_hi + 1e-15


@settings(max_examples=8, deadline=None)
@given(st.floats(0.4, 2.0), st.floats(0.4, 2.0))
def test_teleport_wigner_composes(r1, r2):
    w = wigner_from_rho(basis_state(1).dm(), BIG)
    twice = teleport_wigner(teleport_wigner(w, TeleporterParams(r1)), TeleporterParams(r2))
    r_eff = -0.5 * math.log(math.exp(-2 * r1) + math.exp(-2 * r2))
    once = teleport_wigner(w, TeleporterParams(r_eff))
    assert np.max(np.abs(twice.values - once.values)) < 1e-4


def test_teleport_fock_near_identity():
    rho = model3_state()
    out = teleport_fock(rho, TeleporterParams(-math.log(0.01)))
    assert fidelity_pure(basis_state(1), out) == pytest.approx(fidelity_pure(basis_state(1), rho), abs=1e-3)
    psi = squeezed_vacuum(0.28)
    assert fidelity_pure(psi, teleport_fock(psi.dm(), TeleporterParams(-math.log(0.01)))) > 0.999
    assert teleport_fock(rho, TeleporterParams(math.inf)) is rho


def test_teleport_fock_vacuum_photon_gain():
    out = teleport_fock(basis_state(0).dm(), TeleporterParams(0.7944))
    assert out.mean_photon == pytest.approx(math.exp(-2 * 0.7944), abs=2e-3)


def test_teleport_fock_rejects_bad_settings():
    with pytest.raises(ValueError):
        teleport_fock(basis_state(0).dm(), TeleporterParams(1.0), n_quad=5)
    with pytest.raises(ValueError):
        teleport_fock(basis_state(0).dm(), TeleporterParams(1.0), n_work=3)


CROSS = {
    "one_photon": (lambda: basis_state(1).dm(), lambda r: output_negativity_model1(1.0, r)),
    "model1": (lambda: mixture_model1(0.7686), lambda r: output_negativity_model1(0.7686, r)),
    "model3": (lambda: model3_state(0.28, 0.79), lambda r: output_negativity_model3(0.79, 0.28, r)),
    "vacuum": (lambda: basis_state(0).dm(), lambda r: 1 / (math.pi * (1 + 2 * math.exp(-2 * r)))),
    "coherent": (lambda: coherent(0.6 - 0.2j).dm(),
                 lambda r: math.exp(-2 * 0.4 / (1 + 2 * math.exp(-2 * r)))
                 / (math.pi * (1 + 2 * math.exp(-2 * r)))),
    "squeezed": (lambda: squeezed_vacuum(0.28).dm(),
                 lambda r: 1 / (math.pi * math.sqrt((math.exp(-0.56) + 2 * math.exp(-2 * r))
                                                     * (math.exp(0.56) + 2 * math.exp(-2 * r))))),
    "cat": (lambda: odd_cat(0.99).dm(), None),
}


@pytest.mark.parametrize("name", sorted(CROSS))
@pytest.mark.parametrize("r", [0.3, 0.7944, 1.5])
def test_cross_representation(name, r):
    make, closed = CROSS[name]
    rho = make()
    grid = teleport_wigner(wigner_from_rho(rho, BIG), TeleporterParams(r)).at_origin()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        fock = wigner_origin_parity(teleport_fock(rho, TeleporterParams(r)))
    assert abs(grid - fock) < 1e-3
    if closed is not None:
        assert abs(closed(r) - grid) < 1e-3
        assert abs(closed(r) - fock) < 1e-3
