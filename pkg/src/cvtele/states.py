"""Factories for the single-mode states used throughout the package.

Squeezing convention: ``S(s)`` with ``s > 0`` squeezes the x quadrature, so the
squeezed vacuum has ``Var(x) = exp(-2s)/2`` and ``Var(p) = exp(2s)/2``.
The opposite sign is just as common elsewhere; keep this in mind when
comparing against other libraries.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma

import numpy as np

from .fock_core import (
    DEFAULT_N_MAX,
    DensityMatrix,
    PureState,
    apply_kraus_channel,
    check_n_max,
)


@dataclass(frozen=True)
class CatModelParams:
    alpha: float = 0.99
    s: float = 0.28
    eta: float = 0.79
    gamma: float = np.pi * 12.3e6  # OPO1 half-width in rad/s from its 12.3 MHz FWHM

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.s < 0:
            raise ValueError("s must be >= 0")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")


def _log_factorials(d: int) -> np.ndarray:
    return np.array([lgamma(n + 1) for n in range(d)])


def coherent(alpha: complex, n_max: int = DEFAULT_N_MAX) -> PureState:
    d = check_n_max(n_max) + 1
    if abs(alpha) ** 2 > n_max / 3:
        raise ValueError(
            f"|alpha|^2 = {abs(alpha) ** 2:.3g} is too large for n_max = {n_max} (limit n_max/3)"
        )
    n = np.arange(d)
    if alpha == 0:
        c = (n == 0).astype(complex)
    else:
        logmag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * _log_factorials(d)
        c = np.exp(logmag + 1j * n * np.angle(alpha))
    return PureState.from_unnormalized(c, total_norm=1.0, what="coherent state")


def _squeezed_amplitudes(s: float, d: int) -> np.ndarray:
    """Untruncated-normalization amplitudes of ``S(s)|0>`` on ``d`` levels."""
    c = np.zeros(d, dtype=complex)
    if s == 0:
        c[0] = 1.0
        return c
    t = np.tanh(s)
    k = np.arange((d + 1) // 2)
    lf = _log_factorials(d)
    logmag = k * np.log(t) + 0.5 * lf[2 * k] - k * np.log(2.0) - lf[k] - 0.5 * np.log(np.cosh(s))
    c[2 * k] = (-1.0) ** k * np.exp(logmag)
    return c


def squeezed_vacuum(s: float, n_max: int = DEFAULT_N_MAX) -> PureState:
    if s < 0:
        raise ValueError("s must be >= 0")
    d = check_n_max(n_max) + 1
    return PureState.from_unnormalized(_squeezed_amplitudes(s, d), total_norm=1.0,
                                       what="squeezed vacuum")


def photon_subtracted_sv(s: float, n_max: int = DEFAULT_N_MAX) -> PureState:
    """Normalized ``a S(s)|0>``, which equals ``-S(s)|1>`` up to a global sign."""
    if s <= 0:
        raise ValueError("photon subtraction from s = 0 annihilates the vacuum")
    d = check_n_max(n_max) + 1
    sv = _squeezed_amplitudes(s, d + 1)
    c = np.sqrt(np.arange(1, d + 1)) * sv[1:]
    # <S0|a^dag a|S0> = sinh^2 s
    return PureState.from_unnormalized(c, total_norm=np.sinh(s) ** 2,
                                       what="photon-subtracted squeezed vacuum")


def odd_cat(alpha: float, n_max: int = DEFAULT_N_MAX) -> PureState:
    """``(|alpha> - |-alpha>)/sqrt(N)`` with ``N = 2(1 - exp(-2 alpha^2))``."""
    if alpha <= 0:
        raise ValueError("odd cat needs alpha > 0 (use the one-photon state for the limit)")
    d = check_n_max(n_max) + 1
    if alpha ** 2 > n_max / 3:
        raise ValueError(f"alpha^2 = {alpha ** 2:.3g} is too large for n_max = {n_max}")
    n = np.arange(d)
    logmag = -0.5 * alpha ** 2 + n * np.log(alpha) - 0.5 * _log_factorials(d)
    c = np.where(n % 2 == 1, 2.0 * np.exp(logmag), 0.0)
    return PureState.from_unnormalized(c, total_norm=2.0 * (1.0 - np.exp(-2.0 * alpha ** 2)),
                                       what="odd cat")


def mixture_model1(eta: float, n_max: int = DEFAULT_N_MAX) -> DensityMatrix:
    """``eta |1><1| + (1 - eta)|0><0|``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    d = check_n_max(n_max) + 1
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0 - eta
    rho[1, 1] = eta
    return DensityMatrix(rho)


def loss_kraus(eta: float, n_max: int) -> list[np.ndarray]:
    """Beam-splitter loss Kraus operators ``K_k = sqrt((1-eta)^k / k!) eta^(n/2) a^k``.

    Complete on the truncated space: loss never populates levels above the input.
    """
    d = n_max + 1
    lf = _log_factorials(d)
    kraus = []
    for k in range(d):
        K = np.zeros((d, d), dtype=complex)
        n = np.arange(k, d)
        # <n-k| K_k |n> = sqrt(C(n, k)) eta^((n-k)/2) (1-eta)^(k/2)
        if eta == 1.0:
            vals = np.full(n.size, 1.0 if k == 0 else 0.0)
        elif eta == 0.0:
            vals = np.where(n == k, 1.0, 0.0)
        else:
            logv = 0.5 * (lf[n] - lf[k] - lf[n - k]) + 0.5 * (n - k) * np.log(eta) \
                + 0.5 * k * np.log1p(-eta)
            vals = np.exp(logv)
        K[n - k, n] = vals
        kraus.append(K)
    return kraus


def loss_channel(rho: DensityMatrix, eta: float) -> DensityMatrix:
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if eta == 1.0:
        return rho
    return apply_kraus_channel(rho, loss_kraus(eta, rho.n_max))


def dark_count_mix(signal: DensityMatrix, background: DensityMatrix,
                   event_to_dark_ratio: float) -> DensityMatrix:
    """Convex mixture with signal weight ``ratio / (1 + ratio)``."""
    if event_to_dark_ratio < 0:
        raise ValueError("event-to-dark ratio must be >= 0")
    if signal.entries.shape != background.entries.shape:
        raise ValueError("signal and background dimensions differ")
    if np.isinf(event_to_dark_ratio):
        return signal
    w = event_to_dark_ratio / (1.0 + event_to_dark_ratio)
    return DensityMatrix(w * signal.entries + (1.0 - w) * background.entries,
                         max(signal.leakage, background.leakage))


def model3_state(s: float = 0.28, eta: float = 0.79, n_max: int = DEFAULT_N_MAX) -> DensityMatrix:
    """Photon-subtracted squeezed vacuum after beam-splitter loss ``1 - eta``."""
    return loss_channel(photon_subtracted_sv(s, n_max).dm(), eta)
