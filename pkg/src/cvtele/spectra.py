"""Frequency-domain model of the broadband teleporter.

The EPR source is modelled as a below-threshold OPO with Lorentzian squeezing
spectra; the pump ratio is solved so that the zero-frequency squeezing
matches the requested dB level. Classical-channel imperfections leak
anti-squeezing into the output.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq


@dataclass(frozen=True)
class SqueezerSpec:
    low_freq_squeezing_db: float = 6.9
    cavity_fwhm_hz: float = 24e6
    detection_efficiency: float = 1.0

    def __post_init__(self):
        if self.cavity_fwhm_hz <= 0:
            raise ValueError("cavity FWHM must be > 0")
        if self.low_freq_squeezing_db < 0:
            raise ValueError("squeezing must be >= 0 dB")
        if not 0 < self.detection_efficiency <= 1:
            raise ValueError("detection efficiency must lie in (0, 1]")

    def pump_ratio(self) -> float:
        """Normalized pump amplitude ``x`` reproducing the zero-frequency squeezing."""
        target = 10.0 ** (-self.low_freq_squeezing_db / 10.0)
        k = (1.0 - target) / self.detection_efficiency  # 4x/(1+x)^2 at f = 0
        if k >= 1.0:
            raise ValueError(
                f"{self.low_freq_squeezing_db} dB of squeezing is unattainable at "
                f"detection efficiency {self.detection_efficiency}"
            )
        if k == 0.0:
            return 0.0
        return ((2.0 - k) - 2.0 * np.sqrt(1.0 - k)) / k


@dataclass(frozen=True)
class ChannelResponse:
    gain: float = 1.0
    delay_s: float = 0.0
    gain_ripple_db: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.gain <= 0:
            raise ValueError("gain must be > 0")

    def transfer(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        ripple = 0.0 if self.gain_ripple_db is None else np.asarray(self.gain_ripple_db(f))
        return self.gain * 10.0 ** (ripple / 20.0) * np.exp(-2j * np.pi * f * self.delay_s)


def squeezed_variance_spectrum(spec: SqueezerSpec, f):
    """Return ``(v_sq, v_anti)`` quadrature variances at frequency ``f`` (shot noise = 1/2)."""
    f = np.asarray(f, dtype=float)
    x = spec.pump_ratio()
    om2 = (f / (0.5 * spec.cavity_fwhm_hz)) ** 2
    eta = spec.detection_efficiency
    v_sq = 0.5 * (1.0 - eta * 4.0 * x / ((1.0 + x) ** 2 + om2))
    v_anti = 0.5 * (1.0 + eta * 4.0 * x / ((1.0 - x) ** 2 + om2))
    return v_sq, v_anti


def added_noise(spec: SqueezerSpec, chan: ChannelResponse, f) -> np.ndarray:
    """Variance the teleporter adds to each quadrature; ``exp(-2r)`` for an ideal channel."""
    v_sq, v_anti = squeezed_variance_spectrum(spec, f)
    H = chan.transfer(f)
    return 2 * v_sq * np.abs(1 + H) ** 2 / 4 + 2 * v_anti * np.abs(1 - H) ** 2 / 4


def teleporter_noise_spectrum(spec: SqueezerSpec, chan: ChannelResponse, f) -> np.ndarray:
    """Teleported-vacuum noise in dB above shot noise."""
    return 10.0 * np.log10((0.5 + added_noise(spec, chan, f)) / 0.5)


def effective_fidelity(spec: SqueezerSpec, chan: ChannelResponse, f) -> np.ndarray:
    return 1.0 / (1.0 + added_noise(spec, chan, f))


def usable_bandwidth(spec: SqueezerSpec, chan: ChannelResponse, fidelity_floor: float,
                     f_max: float = 1e10, n_scan: int = 20001) -> float:
    """Largest ``f`` with effective fidelity >= floor on all of ``[0, f]``.

    Returns ``inf`` when the floor is never crossed below ``f_max``.
    """
    if not fidelity_floor < 1:
        raise ValueError("fidelity floor must be < 1")

    def margin(f):
        return effective_fidelity(spec, chan, f) - fidelity_floor

    if margin(0.0) < 0:
        raise ValueError(f"fidelity floor {fidelity_floor} is not reached even at f = 0")
    fs = np.concatenate([[0.0], np.geomspace(1.0, f_max, n_scan)])
    m = margin(fs)
    bad = np.nonzero(m < 0)[0]
    if bad.size == 0:
        return float("inf")
    i = bad[0]
    return float(brentq(margin, fs[i - 1], fs[i], xtol=1e-6))


def write_spectrum_csv(path, spec: SqueezerSpec, chan: ChannelResponse,
                       f_min: float = 0.0, f_max: float = 20e6, n: int = 401) -> np.ndarray:
    """Write ``f_hz,quantum_db,classical_db,shot_db`` rows; returns the table."""
    fs = np.linspace(f_min, f_max, n)
    quantum = teleporter_noise_spectrum(spec, chan, fs)
    classical_spec = SqueezerSpec(0.0, spec.cavity_fwhm_hz, spec.detection_efficiency)
    classical = teleporter_noise_spectrum(classical_spec, chan, fs)
    table = np.column_stack([fs, quantum, classical, np.zeros_like(fs)])
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f_hz", "quantum_db", "classical_db", "shot_db"])
        for row in table:
            w.writerow([repr(float(v)) for v in row])
    return table
