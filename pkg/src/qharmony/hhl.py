"""HHL stage as amplitude algebra.

The controlled-rotation/post-selection stage is reproduced exactly in the
eigenbasis of A: an eigencomponent with overlap beta_u keeps amplitude
beta_u * C / lambda_u on the ancilla-1 branch, with C = lambda_min / 2.
Phase estimation is either exact or rounds each eigenvalue to one of the
2**m - 1 nonzero clock bins.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from . import kernels
from .errors import ConfigError, NumericalError
from .music import Note, NotePair
from .prefmatrix import PreferenceMatrix

SYMMETRY_TOL = 1e-10
BIN_HEADROOM = 1.05


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    sweeps: int = 0


def eigh_symmetric(A, tol: float = 1e-10) -> EigenDecomposition:
    """Deterministic symmetric eigendecomposition (cyclic Jacobi).

    Eigenvalues ascend; each eigenvector is signed so that its largest
    magnitude entry (first on ties) is positive.
    """
    M = A.active if isinstance(A, PreferenceMatrix) else np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError("eigh_symmetric needs a square matrix")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if np.max(np.abs(M - M.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ConfigError("matrix is not symmetric")
    w, V, sweeps = kernels.jacobi_eigh(M, tol)
    order = np.argsort(w, kind="stable")
    w, V = w[order], V[:, order]
    lead = np.argmax(np.abs(V), axis=0)
    signs = np.where(V[lead, np.arange(V.shape[1])] < 0, -1.0, 1.0)
    V = V * signs
    w.setflags(write=False)
    V.setflags(write=False)
    return EigenDecomposition(w, V, sweeps)


@dataclass(frozen=True)
class RhsVector:
    amplitudes: np.ndarray = field(repr=False)
    mode: str = "uniform"
    context_note: Note | None = None
    alpha: float = 3.0
    sigma: float = 2.0


def rhs_weights(pairs: Sequence[NotePair], context_note: Note, alpha: float = 3.0,
                sigma: float = 2.0) -> np.ndarray:
    """Unnormalised melodic bias 1 + alpha * exp(-|n1 - context| / sigma)."""
    d = np.array([abs(p.n1.midi - context_note.midi) for p in pairs], dtype=float)
    return 1.0 + alpha * np.exp(-d / sigma)


def build_b(pairs: Sequence[NotePair], mode: str = "uniform", context_note: Note | None = None,
            alpha: float = 3.0, sigma: float = 2.0, dim_padded: int | None = None) -> RhsVector:
    """Right-hand side: uniform over the active pairs, or biased toward ``context_note``."""
    if not pairs:
        raise ConfigError("empty pair set")
    n = len(pairs)
    dim = dim_padded or n
    if dim < n:
        raise ConfigError("padded dimension smaller than pair count")
    if mode == "uniform":
        w = np.ones(n)
    elif mode == "biased":
        if context_note is None:
            raise ConfigError("biased right-hand side needs a context note")
        w = rhs_weights(pairs, context_note, alpha, sigma)
    else:
        raise ConfigError(f"unknown rhs mode {mode!r}")
    amps = np.zeros(dim)
    amps[:n] = w / np.linalg.norm(w)
    amps.setflags(write=False)
    return RhsVector(amps, mode, context_note, alpha, sigma)


@dataclass(frozen=True)
class HHLResult:
    p_hhl: np.ndarray = field(repr=False)
    ps_weight: float
    mode: str = "exact"
    m_clock: int | None = None
    amplitudes: np.ndarray = field(default=None, repr=False)

    def top(self, k: int = 5) -> np.ndarray:
        return np.argsort(-self.p_hhl, kind="stable")[:k]


def binned_eigenvalues(eigenvalues: np.ndarray, m_clock: int = 6) -> np.ndarray:
    """Round eigenvalues onto clock bins 1 .. 2**m - 1 (bin 0 is never used)."""
    if m_clock < 1:
        raise ConfigError("m_clock must be >= 1")
    top = 2**m_clock - 1
    width = BIN_HEADROOM * float(np.max(eigenvalues)) / top
    bins = np.maximum(1.0, np.rint(eigenvalues / width))
    return bins * width


def hhl_solve(A, b, mode: str = "exact", m_clock: int = 6,
              eig: EigenDecomposition | None = None) -> HHLResult:
    """Post-selected solution distribution and ancilla success probability."""
    M = A.active if isinstance(A, PreferenceMatrix) else np.asarray(A, dtype=float)
    n = M.shape[0]
    amps = b.amplitudes if isinstance(b, RhsVector) else np.asarray(b, dtype=float)
    if np.any(amps[n:] != 0):
        raise ConfigError("right-hand side has weight on padding states")
    bv = amps[:n]
    norm = np.linalg.norm(bv)
    if norm == 0:
        raise NumericalError("right-hand side is zero")
    bv = bv / norm
    eig = eig or eigh_symmetric(M)
    lam = eig.eigenvalues
    if lam[0] <= 0:
        raise NumericalError(f"matrix is not positive definite (lambda_min = {lam[0]:.3g})")
    C = lam[0] / 2.0
    if mode == "exact":
        est = lam
    elif mode == "binned":
        est = binned_eigenvalues(lam, m_clock)
    else:
        raise ConfigError(f"unknown HHL mode {mode!r}")
    beta = eig.eigenvectors.T @ bv
    kept = beta * np.minimum(C / est, 1.0)
    y = eig.eigenvectors @ kept
    ps = float(kept @ kept)
    p = y * y
    p = p / p.sum()
    p.setflags(write=False)
    y.setflags(write=False)
    return HHLResult(p, ps, mode, m_clock if mode == "binned" else None, y)


@dataclass(frozen=True)
class NoisyHHL:
    p_noisy: np.ndarray = field(repr=False)
    ps_noisy: float
    alpha: float


MIXED_STATE_PS = 0.5


def apply_depolarizing(p_hhl, alpha: float, ps_ideal: float | None = None) -> NoisyHHL:
    """Global depolarising mixture toward uniform; a fully mixed ancilla post-selects at 1/2."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"depolarising alpha must be in [0, 1], got {alpha}")
    p = np.asarray(p_hhl.p_hhl if isinstance(p_hhl, HHLResult) else p_hhl, dtype=float)
    if ps_ideal is None and isinstance(p_hhl, HHLResult):
        ps_ideal = p_hhl.ps_weight
    if alpha == 0.0:
        noisy = p.copy()
    elif alpha == 1.0:
        noisy = np.full(p.size, 1.0 / p.size)
    else:
        noisy = (1.0 - alpha) * p + alpha / p.size
    ps = float("nan") if ps_ideal is None else (1.0 - alpha) * ps_ideal + alpha * MIXED_STATE_PS
    return NoisyHHL(noisy, ps, alpha)


def depolarizing_alpha(p2q: float, n_cx: int) -> float:
    """Mixing coefficient for ``n_cx`` two-qubit gates each failing with probability ``p2q``."""
    return 1.0 - (1.0 - p2q) ** n_cx


def ps_weight_uniform_spectrum(kappa: float) -> float:
    """E[min(C/lambda, 1)^2] for lambda uniform on [lmin, kappa*lmin], C = lmin/2.

    Closed form 1/(4 kappa); kappa = 1 gives 1/4.
    """
    if kappa < 1:
        raise ConfigError("kappa must be >= 1")
    if kappa == 1:
        return 0.25
    return 0.25 * (1.0 - 1.0 / kappa) / (kappa - 1.0)


def ps_weight_uniform_spectrum_quad(kappa: float) -> float:
    """Same expectation by adaptive quadrature (lambda_min scaled to 1)."""
    if kappa < 1:
        raise ConfigError("kappa must be >= 1")
    if kappa == 1:
        return min(0.5, 1.0) ** 2
    val, _ = integrate.quad(lambda x: min(0.5 / x, 1.0) ** 2, 1.0, kappa,
                            epsabs=1e-14, epsrel=1e-13)
    return val / (kappa - 1.0)


def ps_weight_eigen_average(eigenvalues) -> float:
    """Unweighted eigenvalue average of min(C/lambda_k, 1)^2."""
    lam = np.asarray(eigenvalues, dtype=float)
    return float(np.mean(np.minimum(lam.min() / 2.0 / lam, 1.0) ** 2))

