"""Melodic preference matrix: construction, positive-definite repair and spectral analytics."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ConfigError, NumericalError
from .music import DEFAULT_KK, DEFAULT_NOTES, KKProfile, Note, NotePair, PenaltyScheme, make_pairs
from .rng import make_rng

log = logging.getLogger(__name__)

MIN_EIGENVALUE = 0.1


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


@dataclass(frozen=True)
class PreferenceMatrix:
    entries: np.ndarray = field(repr=False)
    dim_active: int
    dim_padded: int
    shift_applied: float
    scheme: PenaltyScheme
    pairs: tuple[NotePair, ...] = field(repr=False)

    @property
    def active(self) -> np.ndarray:
        return self.entries[: self.dim_active, : self.dim_active]

    @property
    def notes(self) -> tuple[Note, ...]:
        n = int(round(np.sqrt(self.dim_active)))
        return tuple(p.n2 for p in self.pairs[:n])


@dataclass(frozen=True)
class SpectralSummary:
    lambda_min: float
    lambda_max: float
    kappa: float
    stable_rank: float

    def as_dict(self) -> dict:
        return {"lambda_min": self.lambda_min, "lambda_max": self.lambda_max,
                "kappa": self.kappa, "stable_rank": self.stable_rank}


def _diagonal(pairs: Sequence[NotePair], scheme: PenaltyScheme, kk: KKProfile) -> np.ndarray:
    return np.array([
        scheme.base + scheme.proximity(p.interval_st)
        + scheme.kk_weight * (1.0 - 0.5 * (kk(p.n1) + kk(p.n2)))
        for p in pairs
    ])


def build_matrix(notes: Sequence[Note] = DEFAULT_NOTES, scheme: PenaltyScheme | None = None,
                 kk: KKProfile | None = None, pad: bool | int = True) -> PreferenceMatrix:
    """Build the note-pair penalty matrix.

    The diagonal carries base + proximity penalty + weighted tonal instability;
    off-diagonal entries couple pairs of similar interval size plus a registral
    link term between one pair's end and the next pair's start.  If the active
    block's smallest eigenvalue is below 0.1 the block is shifted up to 0.1.

    ``pad=True`` pads to the next power of two with a decoupled identity block;
    an integer pads to that size; ``False`` disables padding.
    """
    scheme = scheme or PenaltyScheme()
    kk = kk or DEFAULT_KK
    pairs = make_pairs(tuple(notes))
    n = len(pairs)
    A = kernels.coupling_matrix(
        [p.interval_st for p in pairs], [p.n1.midi for p in pairs], [p.n2.midi for p in pairs],
        scheme.alpha_coupling,
    )
    A[np.diag_indices(n)] = _diagonal(pairs, scheme, kk)
    A = 0.5 * (A + A.T)

    lam_min = float(np.linalg.eigvalsh(A)[0])
    shift = 0.0
    if lam_min < MIN_EIGENVALUE:
        shift = MIN_EIGENVALUE - lam_min
        A[np.diag_indices(n)] += shift
        log.debug("shifted active block by %.6g (lambda_min was %.6g)", shift, lam_min)
        if np.linalg.eigvalsh(A)[0] <= 0:
            raise NumericalError("matrix not positive definite after shift")

    if pad is True:
        dim = _next_pow2(n)
    elif pad is False:
        dim = n
    else:
        dim = int(pad)
        if dim < n:
            raise ConfigError(f"padding size {dim} smaller than active dimension {n}")
    full = np.eye(dim)
    full[:n, :n] = A
    full.setflags(write=False)
    return PreferenceMatrix(full, n, dim, shift, scheme, pairs)


def _active(A) -> np.ndarray:
    if isinstance(A, PreferenceMatrix):
        return A.active
    return np.asarray(A, dtype=float)


def spectral_summary(A) -> SpectralSummary:
    """Extreme eigenvalues, condition number and stable rank of the active block (LAPACK route)."""
    M = _active(A)
    w = np.linalg.eigvalsh(M)
    spec_norm = float(np.max(np.abs(w)))
    frob2 = float(np.sum(M * M))
    lam_min, lam_max = float(w[0]), float(w[-1])
    kappa = spec_norm / float(np.min(np.abs(w)))
    return SpectralSummary(lam_min, lam_max, kappa, frob2 / spec_norm**2)


@dataclass(frozen=True)
class KappaSweepReport:
    kappas: np.ndarray = field(repr=False)
    ranges: dict

    @property
    def median(self) -> float:
        return float(np.median(self.kappas))

    @property
    def mean(self) -> float:
        return float(np.mean(self.kappas))

    def fraction_below(self, x: float) -> float:
        return float(np.mean(self.kappas < x))

    def fraction_above(self, x: float) -> float:
        return float(np.mean(self.kappas > x))

    def as_dict(self) -> dict:
        return {
            "n_samples": int(self.kappas.size),
            "ranges": {k: list(v) for k, v in self.ranges.items()},
            "median": self.median,
            "mean": self.mean,
            "frac_below_20": self.fraction_below(20.0),
            "frac_above_100": self.fraction_above(100.0),
            "min": float(self.kappas.min()),
            "max": float(self.kappas.max()),
        }


FULL_RANGES = {"base": (3.0, 9.0), "prox_scale": (0.5, 1.5), "kk_weight": (0.75, 2.25)}
RESTRICTED_RANGES = {"base": (5.0, 7.0), "prox_scale": (0.8, 1.2), "kk_weight": (1.0, 2.0)}


def kappa_mc_sweep(ranges: dict | None = None, n_samples: int = 5000, seed: int = 0,
                   notes: Sequence[Note] = DEFAULT_NOTES, scheme: PenaltyScheme | None = None,
                   kk: KKProfile | None = None) -> KappaSweepReport:
    """Condition number under uniformly perturbed base / proximity scale / KK weight.

    Sample ``k`` uses its own stream derived from ``(seed, k)``.
    """
    ranges = {**FULL_RANGES, **(ranges or {})}
    for key, (lo, hi) in ranges.items():
        if key not in FULL_RANGES:
            raise ConfigError(f"unknown sweep parameter {key!r}")
        if lo > hi:
            raise ConfigError(f"invalid range for {key}: min {lo} > max {hi}")
    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    scheme = scheme or PenaltyScheme()
    kk = kk or DEFAULT_KK
    pairs = make_pairs(tuple(notes))
    n = len(pairs)

    coupling = kernels.coupling_matrix(
        [p.interval_st for p in pairs], [p.n1.midi for p in pairs], [p.n2.midi for p in pairs],
        scheme.alpha_coupling,
    )
    prox = np.array([scheme.proximity(p.interval_st) for p in pairs])
    instab = np.array([1.0 - 0.5 * (kk(p.n1) + kk(p.n2)) for p in pairs])
    kappas = np.empty(n_samples)
    idx = np.diag_indices(n)
    for k in range(n_samples):
        rng = make_rng(seed, "kappa_mc", k)
        base, ps, kw = (rng.uniform(*ranges[key]) for key in ("base", "prox_scale", "kk_weight"))
        A = coupling.copy()
        A[idx] = base + ps * prox + kw * instab
        w = np.linalg.eigvalsh(A)
        if w[0] < MIN_EIGENVALUE:
            w = w + (MIN_EIGENVALUE - w[0])
        kappas[k] = w[-1] / w[0]
    return KappaSweepReport(kappas, {k: tuple(map(float, v)) for k, v in ranges.items()})


def save_matrix_csv(A: PreferenceMatrix | np.ndarray, path) -> None:
    M = A.entries if isinstance(A, PreferenceMatrix) else np.asarray(A)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        for row in M:
            w.writerow([repr(float(x)) for x in row])


def load_matrix_csv(path) -> np.ndarray:
    with open(Path(path), newline="", encoding="utf-8") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    M = np.array(rows)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError(f"{path}: matrix CSV must be square")
    return M
