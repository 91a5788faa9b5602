"""Truncated Fock-space linear algebra.

States are stored as plain numpy arrays wrapped in small frozen dataclasses
that validate on construction. Operators are bare ``(n_max+1, n_max+1)``
complex arrays.

Conventions: hbar = 1, ``x = (a + a^dag)/sqrt(2)``, ``p = (a - a^dag)/(i sqrt(2))``,
so the vacuum quadrature variance is 1/2.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from math import lgamma
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.special import eval_genlaguerre

DEFAULT_N_MAX = 15
LEAKAGE_WARN = 1e-4

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
PSD_TOL = -1e-8
NORM_TOL = 1e-10


class TruncationWarning(UserWarning):
    """Raised when renormalization discards more than ``LEAKAGE_WARN`` of the trace."""


def check_n_max(n_max: int) -> int:
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max!r}")
    return int(n_max)


def _warn_leakage(leakage: float, what: str) -> None:
    if leakage > LEAKAGE_WARN:
        warnings.warn(
            f"{what}: {leakage:.2e} of the norm lies beyond the Fock cutoff",
            TruncationWarning,
            stacklevel=3,
        )


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized Fock amplitudes ``c_n``.

    ``leakage`` records the squared norm that was dropped by the cutoff
    before renormalization.
    """

    amplitudes: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amplitudes must be a vector of length >= 2")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (|c|^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, amplitudes, total_norm: float | None = None,
                          what: str = "state") -> "PureState":
        """Normalize ``amplitudes``.

        ``total_norm`` is the squared norm of the untruncated vector when it is
        known analytically; the shortfall is stored as leakage.
        """
        amps = np.asarray(amplitudes, dtype=complex)
        norm = float(np.vdot(amps, amps).real)
        if norm <= 0.0:
            raise ValueError(f"{what}: zero vector cannot be normalized")
        leakage = 0.0 if total_norm is None else max(0.0, 1.0 - norm / total_norm)
        _warn_leakage(leakage, what)
        return cls(amps / np.sqrt(norm), leakage)

    @property
    def n_max(self) -> int:
        return self.amplitudes.size - 1

    def dm(self) -> "DensityMatrix":
        psi = self.amplitudes
        return DensityMatrix(np.outer(psi, psi.conj()), self.leakage)


def validate_density(rho: np.ndarray) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit trace and PSD."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 2:
        raise ValueError(f"density matrix must be square with dim >= 2, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix has non-finite entries")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise ValueError(f"density matrix is not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix trace is {tr!r}, expected 1")
    lam = np.linalg.eigvalsh(rho).min()
    if lam < PSD_TOL:
        raise ValueError(f"density matrix is not positive semidefinite (min eigenvalue {lam:.3e})")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        validate_density(rho)
        # remove the sub-tolerance anti-Hermitian part so downstream code can rely on it
        rho = 0.5 * (rho + rho.conj().T)
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @classmethod
    def from_array(cls, rho, leakage: float = 0.0, what: str = "density matrix") -> "DensityMatrix":
        """Hermitize and renormalize a nearly-valid matrix; the lost trace adds to ``leakage``."""
        rho = np.asarray(rho, dtype=complex)
        rho = 0.5 * (rho + rho.conj().T)
        tr = np.trace(rho).real
        if tr <= 0.0:
            raise ValueError(f"{what}: non-positive trace {tr!r}")
        lost = max(0.0, 1.0 - tr)
        _warn_leakage(lost, what)
        return cls(rho / tr, leakage + lost)

    @classmethod
    def maximally_mixed(cls, n_max: int = DEFAULT_N_MAX) -> "DensityMatrix":
        d = check_n_max(n_max) + 1
        return cls(np.eye(d) / d)

    @classmethod
    def fock(cls, n: int, n_max: int = DEFAULT_N_MAX) -> "DensityMatrix":
        return basis_state(n, n_max).dm()

    @property
    def n_max(self) -> int:
        return self.entries.shape[0] - 1

    @property
    def populations(self) -> np.ndarray:
        return np.clip(np.diag(self.entries).real, 0.0, None)

    @property
    def mean_photon(self) -> float:
        return float(np.arange(self.n_max + 1) @ np.diag(self.entries).real)

    @property
    def parity(self) -> float:
        signs = (-1.0) ** np.arange(self.n_max + 1)
        return float(signs @ np.diag(self.entries).real)

    def to_dict(self) -> dict:
        rho = self.entries
        return {
            "n_max": self.n_max,
            "rho": [[[float(z.real), float(z.imag)] for z in row] for row in rho],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DensityMatrix":
        try:
            n_max = check_n_max(data["n_max"])
            arr = np.asarray(data["rho"], dtype=float)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed density-matrix document: {exc}") from exc
        if arr.shape != (n_max + 1, n_max + 1, 2):
            raise ValueError(f"rho has shape {arr.shape}, expected {(n_max + 1, n_max + 1, 2)}")
        return cls(arr[..., 0] + 1j * arr[..., 1])

    def save(self, path, **extra) -> None:
        doc = self.to_dict()
        doc.update(extra)
        Path(path).write_text(json.dumps(doc, indent=1))

    @classmethod
    def load(cls, path) -> "DensityMatrix":
        return cls.from_dict(json.loads(Path(path).read_text()))


def basis_state(n: int, n_max: int = DEFAULT_N_MAX) -> PureState:
    d = check_n_max(n_max) + 1
    if not 0 <= n < d:
        raise ValueError(f"Fock level {n} outside 0..{d - 1}")
    c = np.zeros(d, dtype=complex)
    c[n] = 1.0
    return PureState(c)


def ladder_operators(n_max: int = DEFAULT_N_MAX) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(a, a_dag, n)`` truncated to ``n_max + 1`` levels."""
    d = check_n_max(n_max) + 1
    a = np.diag(np.sqrt(np.arange(1, d)), k=1).astype(complex)
    adag = a.conj().T
    return a, adag, np.diag(np.arange(d)).astype(complex)


def operator_exponential(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("operator must be a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("operator has non-finite entries")
    return scipy.linalg.expm(A)


def squeezing_operator(s: float, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """``S(s) = exp[(s/2)(a^2 - a_dag^2)]``; squeezes x for s > 0."""
    a, adag, _ = ladder_operators(n_max)
    return operator_exponential(0.5 * s * (a @ a - adag @ adag))


def displacement_operator(beta: complex, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """``D(beta) = exp(beta a_dag - beta* a)`` by matrix exponential of the truncated generator.

    Elements near the cutoff are inaccurate; see :func:`displacement_matrix`.
    """
    a, adag, _ = ladder_operators(n_max)
    return operator_exponential(beta * adag - np.conj(beta) * a)


def displacement_matrix(beta: complex, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """Exact matrix elements ``<m|D(beta)|n>`` of the untruncated displacement.

    Uses the associated-Laguerre closed form, so the block is exact even for
    levels close to the cutoff (unlike exponentiating a truncated generator).
    """
    d = check_n_max(n_max) + 1
    b2 = abs(beta) ** 2
    m = np.arange(d)[:, None]
    n = np.arange(d)[None, :]
    lo = np.minimum(m, n)
    k = np.abs(m - n)
    lgam = np.array([lgamma(j + 1) for j in range(d)])
    # sqrt(lo!/hi!) |beta|^k, computed in log space
    logmag = 0.5 * (lgam[lo] - lgam[lo + k]) - 0.5 * b2
    with np.errstate(divide="ignore"):
        logmag = logmag + (k * np.log(abs(beta)) if beta != 0 else np.where(k == 0, 0.0, -np.inf))
    lag = eval_genlaguerre(lo, k, b2)
    phase = np.where(m >= n, np.exp(1j * k * np.angle(beta)),
                     (-1.0) ** k * np.exp(-1j * k * np.angle(beta)))
    return np.exp(logmag) * lag * phase


def fidelity_pure(target: PureState, rho: DensityMatrix) -> float:
    """``<psi|rho|psi>``."""
    psi = target.amplitudes
    if psi.size != rho.entries.shape[0]:
        raise ValueError(f"dimension mismatch: state {psi.size}, density matrix {rho.entries.shape[0]}")
    f = float(np.vdot(psi, rho.entries @ psi).real)
    return min(max(f, 0.0), 1.0)


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`` between mixed states."""
    if rho.entries.shape != sigma.entries.shape:
        raise ValueError("dimension mismatch")
    w, v = np.linalg.eigh(rho.entries)
    sq = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    inner = np.linalg.eigvalsh(sq @ sigma.entries @ sq)
    f = float(np.sum(np.sqrt(np.clip(inner, 0.0, None))) ** 2)
    return min(max(f, 0.0), 1.0)


def purity(rho: DensityMatrix) -> float:
    r = rho.entries
    return float(np.einsum("ij,ji->", r, r).real)


def apply_kraus_channel(rho: DensityMatrix, kraus: Sequence[np.ndarray],
                        ignore_top: int = 0) -> DensityMatrix:
    """Apply ``rho -> sum_k K rho K^dag`` and renormalize.

    Completeness ``sum K^dag K = I`` is checked on levels ``n <= n_max - ignore_top``;
    truncated Kraus sets are usually incomplete near the cutoff, hence the
    escape hatch. Deviations above 1e-3 are rejected.
    """
    r = rho.entries
    d = r.shape[0]
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    if not ks:
        raise ValueError("empty Kraus set")
    for k in ks:
        if k.shape != (d, d):
            raise ValueError(f"Kraus operator shape {k.shape} does not match state dim {d}")
    completeness = sum(k.conj().T @ k for k in ks)
    keep = d - ignore_top
    dev = np.max(np.abs(completeness[:keep, :keep] - np.eye(keep)))
    if dev > 1e-3:
        raise ValueError(f"Kraus set is not trace preserving (deviation {dev:.3e})")
    out = sum(k @ r @ k.conj().T for k in ks)
    return DensityMatrix.from_array(out, rho.leakage, what="Kraus channel")
