"""Wigner functions on rectangular phase-space grids.

Normalization is ``∫∫ W dx dp = 1`` with vacuum peak ``1/pi``. The closed
forms for the odd cat and the squeezed single photon carry the ``1/pi``
prefactor that this convention requires.

Arrays are indexed ``values[i, j] = W(x_i, p_j)``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from math import lgamma
from pathlib import Path

import numpy as np
import scipy.fft
from scipy.ndimage import map_coordinates
from scipy.special import eval_genlaguerre

from .fock_core import DensityMatrix


@dataclass(frozen=True)
class PhaseSpaceGrid:
    x_min: float = -5.0
    x_max: float = 5.0
    p_min: float = -5.0
    p_max: float = 5.0
    nx: int = 201
    np: int = 201

    def __post_init__(self):
        bounds = (self.x_min, self.x_max, self.p_min, self.p_max)
        if not all(np.isfinite(b) for b in bounds):
            raise ValueError("grid bounds must be finite")
        if not (self.x_min < self.x_max and self.p_min < self.p_max):
            raise ValueError("grid bounds must satisfy min < max")
        if self.nx < 3 or self.np < 3:
            raise ValueError("grid needs at least 3 points per axis")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.np - 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs, self.ps, indexing="ij")

    def index_of_origin(self) -> tuple[int, int]:
        i = int(np.argmin(np.abs(self.xs)))
        j = int(np.argmin(np.abs(self.ps)))
        return i, j

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "p_min": self.p_min,
                "p_max": self.p_max, "nx": self.nx, "np": self.np}


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


@dataclass(frozen=True, eq=False)
class WignerGrid:
    grid: PhaseSpaceGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if np.iscomplexobj(vals):
            if np.max(np.abs(vals.imag)) > 1e-10:
                raise ValueError("Wigner values must be real")
            vals = vals.real
        vals = np.asarray(vals, dtype=float)
        if vals.shape != (self.grid.nx, self.grid.np):
            raise ValueError(f"values shape {vals.shape} does not match grid {(self.grid.nx, self.grid.np)}")
        object.__setattr__(self, "values", vals)

    def integral(self) -> float:
        g = self.grid
        return float(_trapezoid_weights(g.nx, g.dx) @ self.values @ _trapezoid_weights(g.np, g.dp))

    def at_origin(self) -> float:
        """Value at the grid point nearest to (0, 0)."""
        return float(self.values[self.grid.index_of_origin()])

    def save_csv(self, path) -> None:
        """Write ``x,p,w`` rows plus a ``.json`` sidecar with the grid metadata."""
        path = Path(path)
        X, P = self.grid.mesh()
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "p", "w"])
            for x, p, v in zip(X.ravel(), P.ravel(), self.values.ravel()):
                w.writerow([repr(float(x)), repr(float(p)), repr(float(v))])
        path.with_suffix(".json").write_text(json.dumps(self.grid.to_dict(), indent=1))

    @classmethod
    def load_csv(cls, path) -> "WignerGrid":
        path = Path(path)
        grid = PhaseSpaceGrid(**json.loads(path.with_suffix(".json").read_text()))
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape != (grid.nx * grid.np, 3):
            raise ValueError(f"{path}: expected {grid.nx * grid.np} rows of x,p,w")
        return cls(grid, data[:, 2].reshape(grid.nx, grid.np))


def wigner_from_rho(rho: DensityMatrix, grid: PhaseSpaceGrid | None = None,
                    check: bool = True) -> WignerGrid:
    """Evaluate ``W = sum rho_mn W_mn`` with the associated-Laguerre kernel.

    With ``check`` the grid integral must be 1 within 1e-2, otherwise the grid
    is too small for the state and ``ValueError`` is raised.
    """
    grid = grid or PhaseSpaceGrid()
    X, P = grid.mesh()
    values = _wigner_kernel_sum(rho.entries, X, P)
    w = WignerGrid(grid, values)
    if check:
        total = w.integral()
        if abs(total - 1.0) > 1e-2:
            raise ValueError(f"grid too small for state: Wigner integrates to {total:.4f}")
    return w


def wigner_at(rho: DensityMatrix, x, p) -> np.ndarray:
    """Pointwise Wigner function at arbitrary coordinates."""
    X, P = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
    return _wigner_kernel_sum(rho.entries, X, P)


def _wigner_kernel_sum(r: np.ndarray, X: np.ndarray, P: np.ndarray) -> np.ndarray:
    d = r.shape[0]
    r2 = X ** 2 + P ** 2
    # alpha = (x + i p)/sqrt(2); kernel argument 4|alpha|^2 = 2 r2
    two_alpha = np.sqrt(2.0) * (X + 1j * P)
    B = 2.0 * r2
    W = np.zeros(X.shape, dtype=float)
    for m in range(d):
        if r[m, m] != 0:
            W += ((-1) ** m) * r[m, m].real * eval_genlaguerre(m, 0, B)
        for n in range(m + 1, d):
            if r[m, n] == 0:
                continue
            k = n - m
            coef = ((-1) ** m) * np.exp(0.5 * (lgamma(m + 1) - lgamma(n + 1)))
            W += 2.0 * coef * np.real(r[m, n] * two_alpha ** k) * eval_genlaguerre(m, k, B)
    return W * np.exp(-r2) / np.pi


def wigner_origin_parity(rho: DensityMatrix) -> float:
    """``W(0,0) = (1/pi) sum (-1)^n rho_nn``, no grid involved."""
    return rho.parity / np.pi


def cat_wigner_values(alpha: float, X, P, phase: float = 0.0) -> np.ndarray:
    """Odd-cat Wigner function; ``phase`` rotates the cat axis away from x."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    c, s = np.cos(phase), np.sin(phase)
    u = c * X + s * P
    v = -s * X + c * P
    norm = 2.0 * (1.0 - np.exp(-2.0 * alpha ** 2))
    k = 2.0 * np.sqrt(2.0) * alpha
    # e^{-2a^2} cosh(k u) written as a sum of exponentials to avoid overflow
    ch = 0.5 * (np.exp(k * u - 2.0 * alpha ** 2) + np.exp(-k * u - 2.0 * alpha ** 2))
    return (2.0 / (norm * np.pi)) * np.exp(-u ** 2 - v ** 2) * (ch - np.cos(k * v))


def cat_wigner_analytic(alpha: float, grid: PhaseSpaceGrid | None = None,
                        phase: float = 0.0) -> WignerGrid:
    grid = grid or PhaseSpaceGrid()
    X, P = grid.mesh()
    return WignerGrid(grid, cat_wigner_values(alpha, X, P, phase))


def model2_values(s: float, X, P) -> np.ndarray:
    ex, ep = np.exp(2.0 * s), np.exp(-2.0 * s)
    q = ex * X ** 2 + ep * P ** 2
    return (2.0 / np.pi) * (q - 0.5) * np.exp(-q)


def model2_wigner(s: float, grid: PhaseSpaceGrid | None = None) -> WignerGrid:
    """Squeezed single photon, i.e. the photon-subtracted squeezed vacuum."""
    if s < 0:
        raise ValueError("s must be >= 0")
    grid = grid or PhaseSpaceGrid()
    X, P = grid.mesh()
    return WignerGrid(grid, model2_values(s, X, P))


def _fft_gauss_filter(values: np.ndarray, sigma_x: float, sigma_p: float,
                      hx: float, hp: float) -> np.ndarray:
    """Convolve a zero-padded array with a normalized 2D Gaussian (spectral)."""
    pad_x = int(np.ceil(8.0 * sigma_x / hx)) + 1
    pad_p = int(np.ceil(8.0 * sigma_p / hp)) + 1
    padded = np.pad(values, ((pad_x, pad_x), (pad_p, pad_p)))
    nx, npp = padded.shape
    nfx = scipy.fft.next_fast_len(nx, real=True)
    nfp = scipy.fft.next_fast_len(npp, real=True)
    kx = 2.0 * np.pi * scipy.fft.fftfreq(nfx, d=hx)
    kp = 2.0 * np.pi * scipy.fft.rfftfreq(nfp, d=hp)
    transfer = np.exp(-0.5 * (sigma_x ** 2 * kx[:, None] ** 2 + sigma_p ** 2 * kp[None, :] ** 2))
    spec = scipy.fft.rfft2(padded, s=(nfx, nfp)) * transfer
    out = scipy.fft.irfft2(spec, s=(nfx, nfp))
    return out[pad_x:pad_x + values.shape[0], pad_p:pad_p + values.shape[1]]


def gauss_convolve(w: WignerGrid, sigma: float, norm_tol: float = 1e-4) -> WignerGrid:
    """Convolve with an isotropic Gaussian of standard deviation ``sigma`` per quadrature.

    Outside the grid the function is taken to be zero. If the result loses
    more than ``norm_tol`` of its integral over the grid edges, the grid margin
    is insufficient and ``ValueError`` is raised.
    """
    if sigma < 0 or not np.isfinite(sigma):
        raise ValueError("sigma must be finite and >= 0")
    if sigma == 0:
        return w
    g = w.grid
    out = WignerGrid(g, _fft_gauss_filter(w.values, sigma, sigma, g.dx, g.dp))
    before, after = w.integral(), out.integral()
    if abs(after - before) > norm_tol:
        raise ValueError(
            f"insufficient grid margin for sigma={sigma:.3g}: integral {before:.6f} -> {after:.6f}"
        )
    return out


def model3_wigner(s: float, eta: float, grid: PhaseSpaceGrid | None = None) -> WignerGrid:
    """Squeezed single photon after beam-splitter loss ``1 - eta``.

    ``W3(x, p) = (1/eta) (W2 * G_lam)(x/sqrt(eta), p/sqrt(eta))`` with
    ``lam = sqrt((1 - eta)/(2 eta))``. The convolution runs on an internal grid
    in the scaled coordinates, padded so nothing wraps; its nodes map exactly
    onto the requested grid, so no interpolation is needed.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    grid = grid or PhaseSpaceGrid()
    if eta == 1.0:
        return model2_wigner(s, grid)
    k = 1.0 / np.sqrt(eta)
    lam = np.sqrt((1.0 - eta) / (2.0 * eta))
    hu, hv = grid.dx * k, grid.dp * k
    # extend the scaled grid far enough that W2 is negligible at its edge
    ext = max(8.0 * lam, 6.0 * np.exp(abs(s)))
    mx = int(np.ceil(ext / hu))
    mp = int(np.ceil(ext / hv))
    u = k * grid.x_min + hu * np.arange(-mx, grid.nx + mx)
    v = k * grid.p_min + hv * np.arange(-mp, grid.np + mp)
    U, V = np.meshgrid(u, v, indexing="ij")
    conv = _fft_gauss_filter(model2_values(s, U, V), lam, lam, hu, hv)
    return WignerGrid(grid, conv[mx:mx + grid.nx, mp:mp + grid.np] / eta)


def overlap_fidelity(w1: WignerGrid, w2: WignerGrid) -> float:
    """``2 pi ∫∫ W1 W2 dx dp`` by the trapezoid rule, clamped to ``[0, 1 + 1e-3]``."""
    if w1.grid != w2.grid:
        raise ValueError("Wigner grids differ")
    g = w1.grid
    f = 2.0 * np.pi * float(_trapezoid_weights(g.nx, g.dx) @ (w1.values * w2.values)
                            @ _trapezoid_weights(g.np, g.dp))
    return min(max(f, 0.0), 1.0 + 1e-3)


def marginal(w: WignerGrid, theta: float, order: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Distribution of ``x cos(theta) + p sin(theta)`` from a gridded Wigner function.

    The grid is resampled on rotated coordinates (bilinear for ``order=1``)
    and the orthogonal quadrature integrated out. Returns ``(q, pdf)`` on the
    largest centered axis that fits inside the grid, with the x spacing.
    """
    g = w.grid
    h = g.dx
    reach = min(abs(g.x_min), abs(g.x_max), abs(g.p_min), abs(g.p_max))
    n = int(np.floor(reach / h))
    q = h * np.arange(-n, n + 1)
    c, s = np.cos(theta), np.sin(theta)
    Q, R = np.meshgrid(q, q, indexing="ij")
    X = Q * c - R * s
    P = Q * s + R * c
    ix = (X - g.x_min) / g.dx
    ip = (P - g.p_min) / g.dp
    vals = map_coordinates(w.values, [ix, ip], order=order, mode="constant", cval=0.0)
    pdf = vals @ _trapezoid_weights(q.size, h)
    return q, pdf
