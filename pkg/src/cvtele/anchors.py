"""Deterministic regression table of the published figures (no Monte Carlo)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .homodyne import gamma_from_fwhm, mode_energy_fraction
from .spectra import (
    ChannelResponse,
    SqueezerSpec,
    teleporter_noise_spectrum,
    usable_bandwidth,
)
from .states import mixture_model1, photon_subtracted_sv
from .teleport import (
    TeleporterParams,
    added_noise_db,
    fit_eta_model1,
    fit_eta_model3,
    gaussian_fidelity,
    output_negativity_model1,
    output_negativity_model3,
    squeezing_db_to_r,
    teleport_wigner,
)
from .tomography import nearest_cat_fidelity
from .wigner import PhaseSpaceGrid, wigner_from_rho

W_IN = -0.171
S_INPUT = 0.28
DB_EPR = 6.9


@dataclass(frozen=True)
class Row:
    id: str
    description: str
    expected: str
    compute: Callable[[], float]
    check: Callable[[float], bool]


@dataclass(frozen=True)
class RowResult:
    id: str
    description: str
    expected: str
    computed: float
    passed: bool


def _near(target: float, tol: float) -> Callable[[float], bool]:
    return lambda v: abs(v - target) <= tol


def _r() -> float:
    return squeezing_db_to_r(DB_EPR)


def _model1_convolved() -> float:
    eta = fit_eta_model1(W_IN)
    grid = PhaseSpaceGrid(-7, 7, -7, 7, 281, 281)
    w = teleport_wigner(wigner_from_rho(mixture_model1(eta), grid), TeleporterParams(_r()))
    return w.at_origin()


def _s0_reduction_gap() -> float:
    gaps = [abs(output_negativity_model3(eta, 0.0, r) - output_negativity_model1(eta, r))
            for eta in (0.3, 0.7686, 1.0) for r in (0.0, 0.5, _r(), 2.0)]
    return max(gaps)


def _no_cloning_violations() -> float:
    """Count of r values where sign(W_out(0,0)) disagrees with F > 2/3 for |1>."""
    bad = 0
    for r in (0.2, 0.3466, 0.5):
        negative = output_negativity_model1(1.0, r) < 0
        bad += negative != (gaussian_fidelity(r) > 2.0 / 3.0)
    return float(bad)


ROWS: tuple[Row, ...] = (
    Row("r_from_db", "EPR correlation r from 6.9 dB", "0.795 +/- 0.001",
        _r, _near(0.795, 1e-3)),
    Row("f_tele_classical", "Gaussian fidelity at r = 0", "0.5 exactly",
        lambda: gaussian_fidelity(0.0), lambda v: v == 0.5),
    Row("f_tele", "Gaussian fidelity at 6.9 dB", "0.830 +/- 0.001",
        lambda: gaussian_fidelity(_r()), _near(0.830, 1e-3)),
    Row("added_noise_classical", "added noise without entanglement [dB]", "4.77 +/- 0.01",
        lambda: added_noise_db(0.0), _near(4.77, 0.01)),
    Row("added_noise_quantum", "added noise at r = 0.7944 [dB]", "1.49 +/- 0.01",
        lambda: added_noise_db(0.7944), _near(1.49, 0.01)),
    Row("spectrum_1mhz", "teleported-vacuum noise at 1 MHz [dB]", "in [1.3, 1.6]",
        lambda: float(teleporter_noise_spectrum(SqueezerSpec(), ChannelResponse(), 1e6)),
        lambda v: 1.3 <= v <= 1.6),
    Row("spectrum_classical", "classical-limit spectrum, max deviation from 4.77 dB", "<= 0.01",
        lambda: float(np.max(np.abs(teleporter_noise_spectrum(
            SqueezerSpec(0.0), ChannelResponse(), np.linspace(0, 20e6, 401)) - 4.77))),
        lambda v: v <= 0.01),
    Row("eta_model1", "mixture weight fitted to W_in(0,0) = -0.171", "0.77 +/- 0.005",
        lambda: fit_eta_model1(W_IN), _near(0.77, 5e-3)),
    Row("eta_model3", "loss parameter fitted to W_in(0,0) = -0.171 at s = 0.28", "0.79 +/- 0.005",
        lambda: fit_eta_model3(W_IN, S_INPUT), _near(0.79, 5e-3)),
    Row("model3_in", "model-3 origin value, r -> inf", "-0.171 +/- 0.001",
        lambda: output_negativity_model3(0.79, S_INPUT, np.inf), _near(-0.171, 1e-3)),
    Row("model3_out", "model-3 teleported origin value", "-0.0247 +/- 0.0002",
        lambda: output_negativity_model3(0.79, S_INPUT, _r()), _near(-0.0247, 2e-4)),
    Row("model1_out", "model-1 teleported origin value (closed form)", "-0.0208 +/- 0.0005",
        lambda: output_negativity_model1(fit_eta_model1(W_IN), _r()), _near(-0.0208, 5e-4)),
    Row("model1_out_grid", "model-1 teleported origin value (grid convolution)",
        "-0.0208 +/- 0.0005", _model1_convolved, _near(-0.0208, 5e-4)),
    Row("model1_closed_vs_grid", "closed form minus grid convolution", "|gap| <= 1e-6",
        lambda: output_negativity_model1(fit_eta_model1(W_IN), _r()) - _model1_convolved(),
        lambda v: abs(v) <= 1e-6),
    Row("s0_reduction", "model-3 closed form at s = 0 minus model-1 closed form", "<= 1e-12",
        _s0_reduction_gap, lambda v: v <= 1e-12),
    Row("no_cloning", "one-photon negativity survives iff F > 2/3 (violations)", "0",
        _no_cloning_violations, lambda v: v == 0),
    Row("bandwidth", "usable bandwidth at the 2/3 floor [Hz]", ">= 1e7",
        lambda: usable_bandwidth(SqueezerSpec(), ChannelResponse(), 2.0 / 3.0),
        lambda v: v >= 10e6),
    Row("mode_energy", "mode energy inside 500 samples at 1 GHz (12.3 MHz FWHM)", ">= 0.99",
        lambda: mode_energy_fraction(500, 1e9, 250, gamma_from_fwhm(12.3e6)),
        lambda v: v >= 0.99),
    Row("cat_premise", "nearest-cat fidelity of the photon-subtracted state", ">= 0.99",
        lambda: nearest_cat_fidelity(photon_subtracted_sv(S_INPUT).dm()).fidelity,
        lambda v: v >= 0.99),
)

ROW_IDS = tuple(r.id for r in ROWS)


def reproduce_paper(only: str | None = None) -> list[RowResult]:
    rows = ROWS
    if only is not None:
        rows = tuple(r for r in ROWS if r.id == only)
        if not rows:
            raise KeyError(only)
    results = []
    for row in rows:
        v = float(row.compute())
        results.append(RowResult(row.id, row.description, row.expected, v, bool(row.check(v))))
    return results


def format_table(results: list[RowResult]) -> str:
    lines = [f"{'id':<22} {'computed':>14}  {'expected':<20} result"]
    for r in results:
        lines.append(f"{r.id:<22} {r.computed:>14.6g}  {r.expected:<20} {'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)
