"""Maximum-likelihood homodyne tomography and the metrics derived from it."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .fock_core import DEFAULT_N_MAX, DensityMatrix, check_n_max, fidelity_pure
from .homodyne import QuadratureDataset, hermite_functions
from .states import odd_cat

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-300


def projector(theta: float, x: float, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """``|x_theta><x_theta|`` with elements ``e^{i(m-n)theta} psi_m(x) psi_n(x)``."""
    check_n_max(n_max)
    v = np.exp(1j * np.arange(n_max + 1) * theta) * hermite_functions(n_max, np.array([x]))[:, 0]
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class MleOptions:
    n_max: int = DEFAULT_N_MAX
    max_iters: int = 500
    loglik_tol: float = 1e-9
    n_theta_bins: int = 36
    n_x_bins: int = 161
    x_range: tuple[float, float] = (-6.0, 6.0)
    exact: bool = False  # one POVM element per record instead of binning

    def __post_init__(self):
        check_n_max(self.n_max)
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if not self.loglik_tol > 0:
            raise ValueError("loglik_tol must be > 0")
        if self.n_theta_bins < 1 or self.n_x_bins < 1:
            raise ValueError("bin counts must be >= 1")
        if not self.x_range[0] < self.x_range[1]:
            raise ValueError("x_range must be increasing")


@dataclass
class ReconstructionReport:
    rho: DensityMatrix
    iterations: int
    loglik: float
    converged: bool
    loglik_history: list[float] = field(default_factory=list)

    def metrics(self, alpha_range=(0.05, 2.0)) -> dict:
        cat = nearest_cat_fidelity(self.rho, alpha_range)
        return {
            "mean_photon": mean_photon(self.rho),
            "w00": self.rho.parity / np.pi,
            "f_cat": cat.fidelity,
            "alpha_star": cat.alpha,
            "iterations": self.iterations,
            "loglik": self.loglik,
        }

    def to_dict(self) -> dict:
        doc = self.rho.to_dict()
        doc["metrics"] = self.metrics()
        doc["converged"] = self.converged
        return doc


def _binned_povm(data: QuadratureDataset, opts: MleOptions):
    """Counts and bin-averaged POVM elements for the non-empty bins.

    Each element is the projector averaged over its theta bin (a sinc factor
    on the coherences) and integrated over its x bin (Gauss-Legendre), times
    the 1/n_theta_bins probability of landing in that phase bin.
    """
    d = opts.n_max + 1
    lo, hi = opts.x_range
    if np.any(data.xs < lo) or np.any(data.xs > hi):
        raise ValueError(f"data fall outside the binning range {opts.x_range}")
    th_edges = np.linspace(0.0, 2 * np.pi, opts.n_theta_bins + 1)
    x_edges = np.linspace(lo, hi, opts.n_x_bins + 1)
    counts, _, _ = np.histogram2d(data.thetas, data.xs, bins=[th_edges, x_edges])
    ti, xi = np.nonzero(counts)
    if ti.size == 0:
        raise ValueError("all bins are empty")

    nodes, weights = np.polynomial.legendre.leggauss(6)
    half = 0.5 * (x_edges[1:] - x_edges[:-1])
    mid = 0.5 * (x_edges[1:] + x_edges[:-1])
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    psi = hermite_functions(opts.n_max, pts)  # (d, n_x_bins, 6)
    xint = np.einsum("mbq,nbq,q,b->bmn", psi, psi, weights, half)

    dth = 2 * np.pi / opts.n_theta_bins
    th_mid = 0.5 * (th_edges[1:] + th_edges[:-1])
    diff = np.arange(d)[:, None] - np.arange(d)[None, :]
    sinc = np.sinc(diff * dth / (2 * np.pi))  # numpy sinc is sin(pi u)/(pi u)
    phase = np.exp(1j * diff[None] * th_mid[:, None, None]) * sinc[None]

    povm = phase[ti] * xint[xi] / opts.n_theta_bins
    return counts[ti, xi], povm.reshape(ti.size, d * d)


def _exact_povm(data: QuadratureDataset, opts: MleOptions):
    d = opts.n_max + 1
    psi = hermite_functions(opts.n_max, data.xs)  # (d, N)
    v = (np.exp(1j * np.outer(data.thetas, np.arange(d))) * psi.T)  # (N, d)
    povm = (v[:, :, None] * v.conj()[:, None, :]).reshape(len(data), d * d)
    return np.ones(len(data)), povm


def mle_reconstruct(data: QuadratureDataset, opts: MleOptions | None = None) -> ReconstructionReport:
    """Iterate ``rho <- N[R rho R]`` from the maximally mixed state.

    ``R = sum_j f_j Pi_j / Tr(Pi_j rho)``. If a full step would lower the
    log-likelihood, the step is diluted, ``R -> (1 + eps R)``, halving ``eps``
    until it does not; the likelihood is therefore non-decreasing.
    Stops when the relative improvement drops below ``loglik_tol``.
    """
    opts = opts or MleOptions()
    d = opts.n_max + 1
    freq, povm = (_exact_povm if opts.exact else _binned_povm)(data, opts)
    total = freq.sum()
    ident = np.eye(d)

    def probs(r):
        return np.maximum((povm @ r.T.ravel()).real, PROB_FLOOR)

    def loglik(p):
        return float(freq @ np.log(p))

    rho = ident / d
    p = probs(rho)
    L = loglik(p)
    history = [L]
    converged = False
    it = 0
    while it < opts.max_iters:
        R = ((freq / (total * p)) @ povm).reshape(d, d)
        eps = None
        while True:
            step = R if eps is None else ident + eps * R
            cand = step @ rho @ step.conj().T
            cand = 0.5 * (cand + cand.conj().T)
            cand /= np.trace(cand).real
            p_c = probs(cand)
            L_c = loglik(p_c)
            if L_c >= L:
                break
            eps = 1.0 if eps is None else 0.5 * eps
            if eps < 1e-12:
                break
        it += 1
        if L_c < L:
            converged = True  # no ascent direction left at this precision
            break
        improvement = (L_c - L) / max(abs(L), 1e-300)
        rho, p, L = cand, p_c, L_c
        history.append(L)
        if improvement < opts.loglik_tol:
            converged = True
            break

    w, v = np.linalg.eigh(rho)
    w = np.where((w < 0) & (w >= -1e-10), 0.0, w)
    rho = (v * w) @ v.conj().T
    rho /= np.trace(rho).real
    log.debug("MLE finished after %d iterations, logL=%.6f", it, L)
    return ReconstructionReport(DensityMatrix(rho), it, L, converged, history)


def mean_photon(rho: DensityMatrix) -> float:
    return rho.mean_photon


def photon_distribution(rho: DensityMatrix) -> np.ndarray:
    return rho.populations


class CatFit(NamedTuple):
    alpha: float
    fidelity: float
    phase: float
    at_boundary: bool


def rotated_cat(alpha: float, phase: float, n_max: int):
    """Odd cat whose axis makes angle ``phase`` with x (amplitudes ``c_n e^{i n phase}``)."""
    cat = odd_cat(alpha, n_max)
    if phase == 0.0:
        return cat
    return type(cat)(cat.amplitudes * np.exp(1j * np.arange(n_max + 1) * phase), cat.leakage)


def cat_fidelity(rho: DensityMatrix, alpha: float, phase: float = 0.0) -> float:
    return fidelity_pure(rotated_cat(alpha, phase, rho.n_max), rho)


def nearest_cat_fidelity(rho: DensityMatrix, alpha_range=(0.05, 2.0),
                         n_phase: int = 36) -> CatFit:
    """Maximize ``<cat(alpha, phase)|rho|cat(alpha, phase)>`` over amplitude and axis.

    A dense scan (amplitude step 0.005, ``n_phase`` axes over [0, pi)) is
    followed by Nelder-Mead refinement. The cat axis is optimized because
    a reconstructed state carries an arbitrary phase reference, and a
    photon-subtracted squeezed state points along its anti-squeezed quadrature.
    """
    lo, hi = alpha_range
    if not 0 < lo < hi:
        raise ValueError("alpha_range must satisfy 0 < lo < hi")
    n_max = rho.n_max
    if hi ** 2 > n_max / 3:
        raise ValueError(f"alpha_range upper bound {hi} too large for n_max = {n_max}")
    r = rho.entries
    n = np.arange(n_max + 1)
    alphas = np.linspace(lo, hi, int(np.ceil((hi - lo) / 0.005)) + 1)
    cats = np.array([odd_cat(a, n_max).amplitudes.real for a in alphas])
    phases = np.arange(n_phase) * np.pi / n_phase
    best = (-1.0, lo, 0.0)
    for ph in phases:
        rot = r * np.exp(1j * (n[None, :] - n[:, None]) * ph)
        f = np.einsum("am,mn,an->a", cats, rot, cats).real
        k = int(np.argmax(f))
        if f[k] > best[0]:
            best = (float(f[k]), float(alphas[k]), float(ph))

    def neg(v):
        a, ph = v
        if not lo <= a <= hi:
            return 1.0
        return -cat_fidelity(rho, a, ph)

    res = minimize(neg, x0=[best[1], best[2]], method="Nelder-Mead",
                   options={"xatol": 1e-7, "fatol": 1e-12})
    if -res.fun >= best[0]:
        a, ph = float(res.x[0]), float(np.mod(res.x[1], np.pi))
        fval = float(-res.fun)
    else:
        fval, a, ph = best
    at_boundary = bool(a - lo < 2e-3 or hi - a < 2e-3)
    if at_boundary:
        log.warning("nearest-cat maximum at the edge of the scanned range (alpha=%.4f)", a)
    return CatFit(a, fval, ph, at_boundary)
