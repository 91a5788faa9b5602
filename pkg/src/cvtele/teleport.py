"""Unity-gain continuous-variable teleportation as an additive Gaussian noise channel.

With EPR correlation ``r`` the output Wigner function is the input convolved
with an isotropic Gaussian of standard deviation ``exp(-r)`` per quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .fock_core import DensityMatrix, displacement_matrix
from .wigner import WignerGrid, gauss_convolve


@dataclass(frozen=True)
class TeleporterParams:
    r: float

    def __post_init__(self):
        if not self.r >= 0:
            raise ValueError("r must be >= 0")

    @classmethod
    def from_db(cls, db: float) -> "TeleporterParams":
        return cls(squeezing_db_to_r(db))

    @property
    def noise_var(self) -> float:
        return float(np.exp(-2.0 * self.r))

    @property
    def sigma(self) -> float:
        return float(np.exp(-self.r))

    @property
    def g_r(self) -> float:
        return 1.0 + 2.0 * self.noise_var


def squeezing_db_to_r(db: float) -> float:
    """Convert a positive squeezing level in dB to ``r`` (``exp(-2r) = 10^(-db/10)``)."""
    if db < 0:
        raise ValueError("squeezing in dB must be >= 0")
    return db * np.log(10.0) / 20.0


def gaussian_fidelity(r: float) -> float:
    if r < 0:
        raise ValueError("r must be >= 0")
    return 1.0 / (1.0 + np.exp(-2.0 * r))


def added_noise_db(r: float) -> float:
    """Teleported-vacuum variance ``1/2 + exp(-2r)`` relative to shot noise, in dB."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return 10.0 * np.log10(1.0 + 2.0 * np.exp(-2.0 * r))


def teleport_wigner(w: WignerGrid, params: TeleporterParams) -> WignerGrid:
    return gauss_convolve(w, params.sigma)


def teleport_fock(rho: DensityMatrix, params: TeleporterParams, n_quad: int = 21,
                  n_work: int | None = None) -> DensityMatrix:
    """Fock-space teleportation channel ``∫ P(beta) D(beta) rho D(beta)^dag d^2beta``.

    ``P`` is Gaussian with variance ``exp(-2r)`` per quadrature, discretized
    by a tensor Gauss-Hermite rule of ``n_quad`` nodes per axis. The sum is
    formed in a ``n_work + 1``-level space (default ``n_max + 25``) so that
    noise-driven population above the cutoff is captured before truncating
    back; exact Laguerre displacement elements are used. The trace of the
    working-space result checks the discretization (must be within 1e-3 of 1).
    """
    if n_quad < 15:
        raise ValueError("n_quad must be >= 15")
    n_max = rho.n_max
    if n_work is None:
        n_work = n_max + 25
    if n_work < n_max:
        raise ValueError("n_work must be >= n_max")
    if params.r == np.inf:
        return rho
    d = n_work + 1
    big = np.zeros((d, d), dtype=complex)
    big[: n_max + 1, : n_max + 1] = rho.entries

    t, wt = np.polynomial.hermite.hermgauss(n_quad)
    sigma = params.sigma
    out = np.zeros((d, d), dtype=complex)
    # x shift sqrt(2) sigma t_i, p shift sqrt(2) sigma t_j  =>  beta = sigma (t_i + i t_j)
    for ti, wi in zip(t, wt):
        for tj, wj in zip(t, wt):
            weight = wi * wj / np.pi
            if weight < 1e-16:
                continue
            D = displacement_matrix(sigma * (ti + 1j * tj), n_work)
            out += weight * (D @ big @ D.conj().T)
    tr = np.trace(out).real
    if abs(tr - 1.0) > 1e-3:
        raise ValueError(f"displacement quadrature failed: trace {tr:.6f}")
    out = out / tr
    return DensityMatrix.from_array(out[: n_max + 1, : n_max + 1], rho.leakage,
                                    what="teleported state")


def output_negativity_model1(eta: float, r: float) -> float:
    """Origin value of the teleported vacuum/one-photon mixture.

    ``(1 - 2 eta + 2 e^{-2r}) / (pi (1 + 2 e^{-2r})^2)``. The denominator is
    squared: that is what the Gaussian convolution of the mixture gives, and it
    agrees with :func:`output_negativity_model3` at ``s = 0``.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if r < 0:
        raise ValueError("r must be >= 0")
    e = np.exp(-2.0 * r)
    return (1.0 - 2.0 * eta + 2.0 * e) / (np.pi * (1.0 + 2.0 * e) ** 2)


def output_negativity_model3(eta: float, s: float, r: float) -> float:
    """Origin value of the teleported lossy squeezed single photon.

    ``g (g - 2 eta) / (pi (g^2 + 4 eta (g - eta) sinh^2 s)^{3/2})`` with ``g = 1 + 2 e^{-2r}``.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    if s < 0 or r < 0:
        raise ValueError("s and r must be >= 0")
    g = 1.0 + 2.0 * np.exp(-2.0 * r)
    return g * (g - 2.0 * eta) / (np.pi * (g ** 2 + 4.0 * eta * (g - eta) * np.sinh(s) ** 2) ** 1.5)


def fit_eta_model1(w00: float) -> float:
    """Mixture weight that reproduces a given origin value: ``(1 - pi w00) / 2``."""
    return (1.0 - np.pi * w00) / 2.0


def fit_eta_model3(w00: float, s: float) -> float:
    """Loss parameter of the lossy squeezed photon matching an input origin value."""
    return brentq(lambda eta: output_negativity_model3(eta, s, np.inf) - w00, 1e-9, 1.0)
