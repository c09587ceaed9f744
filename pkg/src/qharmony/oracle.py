"""Fourier harmonic oracle: chord-tone fits, chord amplitude vectors and the joint distribution.

The chord register holds two 3-bit degree codes, so each note pair carries a
64-entry vector indexed ``c1 * 8 + c2``; code 7 is unused.  Amplitudes are
sqrt(T[c1, c2] * fit(c1, n1) * fit(c2, n2)) scaled by one global factor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, SupportError
from .hhl import HHLResult
from .music import (CHORDS, QUALITIES, QUALITY_TEMPLATES, Chord, Note, NotePair,
                    TransitionGrammar, chord)

CHORD_BITS = 3
CHORD_CODES = 1 << CHORD_BITS
REGISTER_DIM = CHORD_CODES * CHORD_CODES
IMAG_TOL = 1e-9


def state_code(c1: int, c2: int) -> int:
    return int(c1) * CHORD_CODES + int(c2)


def decode_state(code: int) -> tuple[int, int]:
    return divmod(int(code), CHORD_CODES)


def binary_fit(c: Chord | str, note: Note | int) -> float:
    pc = note.pitch_class if isinstance(note, Note) else int(note) % 12
    return 3.0 if pc in chord(c).tones_pc else 1.0


def _check_k(K: int) -> int:
    if not isinstance(K, (int, np.integer)) or not 1 <= K <= 12:
        raise ConfigError(f"Fourier truncation K must be an integer in 1..12, got {K!r}")
    return int(K)


def smooth_membership(quality: str, K: int) -> np.ndarray:
    """Low-pass chord-tone membership over the 12 pitch-class intervals, clipped to [0, 1].

    Keeps DFT bins m <= K//2 and m >= 12 - K//2.
    """
    K = _check_k(K)
    g = np.zeros(12)
    g[list(QUALITY_TEMPLATES[quality])] = 1.0
    half = K // 2
    m = np.arange(12)
    drop = (m > half) & (m < 12 - half)
    if not drop.any():
        # nothing truncated: the DFT round trip is the identity
        return g
    G = np.fft.fft(g)
    G[drop] = 0.0
    smooth = np.fft.ifft(G)
    if np.max(np.abs(smooth.imag)) > IMAG_TOL:
        raise ConfigError("truncated spectrum is not conjugate-symmetric")
    return np.clip(smooth.real, 0.0, 1.0)


@dataclass(frozen=True)
class FitTable:
    K: int
    table: np.ndarray = field(repr=False)  # (quality, interval) -> fit

    @property
    def values(self) -> dict[tuple[str, int], float]:
        return {(q, l): float(self.table[i, l]) for i, q in enumerate(QUALITIES) for l in range(12)}

    def fit(self, c: Chord | str, note: Note | int) -> float:
        c = chord(c)
        pc = note.pitch_class if isinstance(note, Note) else int(note) % 12
        return float(self.table[QUALITIES.index(c.quality), (pc - c.root_pc) % 12])


@lru_cache(maxsize=None)
def fit_table(K: int) -> FitTable:
    K = _check_k(K)
    table = np.array([1.0 + 2.0 * smooth_membership(q, K) for q in QUALITIES])
    table.setflags(write=False)
    return FitTable(K, table)


def fourier_fit(c: Chord | str, note: Note | int, K: int) -> float:
    return fit_table(K).fit(c, note)


def _fit_matrix(notes: Sequence[Note], K: int) -> np.ndarray:
    """fits[note_idx, chord_idx]"""
    tab = fit_table(K)
    return np.array([[tab.fit(c, n) for c in CHORDS] for n in notes])


def chord_vector(pair: NotePair, grammar: TransitionGrammar, K: int,
                 restriction: Chord | str | None = None) -> np.ndarray:
    """Unnormalised 64-entry chord amplitude vector for one note pair.

    With ``restriction`` set, only opening chords that are valid successors of
    it keep their amplitude.
    """
    tab = fit_table(K)
    f1 = np.array([tab.fit(c, pair.n1) for c in CHORDS])
    f2 = np.array([tab.fit(c, pair.n2) for c in CHORDS])
    w = grammar.T * f1[:, None] * f2[None, :]
    if restriction is not None:
        w = w * (grammar.T[chord(restriction).index] > 0)[:, None]
    out = np.zeros((CHORD_CODES, CHORD_CODES))
    out[:7, :7] = np.sqrt(w)
    return out.reshape(REGISTER_DIM)


@dataclass(frozen=True)
class ChordVectorSet:
    vectors: np.ndarray = field(repr=False)  # (n_pairs, 64), unnormalised
    global_scale: float
    K: int
    restriction: Chord | None = None

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    @property
    def scaled(self) -> np.ndarray:
        return self.global_scale * self.vectors


def build_chord_vectors(pairs: Sequence[NotePair], grammar: TransitionGrammar, K: int,
                        restriction: Chord | str | None = None) -> ChordVectorSet:
    K = _check_k(K)
    notes = sorted({p.n1 for p in pairs} | {p.n2 for p in pairs})
    fits = _fit_matrix(notes, K)
    row = {n: k for k, n in enumerate(notes)}
    i1 = np.array([row[p.n1] for p in pairs])
    i2 = np.array([row[p.n2] for p in pairs])
    T = grammar.T
    if restriction is not None:
        restriction = chord(restriction)
        T = T * (grammar.T[restriction.index] > 0)[:, None]
    w = T[None, :, :] * fits[i1][:, :, None] * fits[i2][:, None, :]
    vecs = np.zeros((len(pairs), CHORD_CODES, CHORD_CODES))
    vecs[:, :7, :7] = np.sqrt(w)
    vecs = vecs.reshape(len(pairs), REGISTER_DIM)
    top = float(np.max(np.linalg.norm(vecs, axis=1)))
    if top == 0.0:
        raise SupportError("all chord vectors are zero")
    vecs.setflags(write=False)
    return ChordVectorSet(vecs, 1.0 / top, K, restriction)


@dataclass(frozen=True)
class JointDistribution:
    """Post-selected probabilities over (pair_index, c1, c2); row = pair, column = chord code."""

    probs: np.ndarray = field(repr=False)  # (n_pairs, 64)
    joint_ps_weight: float
    melody_marginal: np.ndarray = field(repr=False)

    @property
    def flat(self) -> np.ndarray:
        """Canonical state order: pair index, then c1, then c2."""
        return self.probs.reshape(-1)

    @property
    def n_pairs(self) -> int:
        return self.probs.shape[0]

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.probs))

    def state(self, flat_index: int) -> tuple[int, int, int]:
        i, code = divmod(int(flat_index), REGISTER_DIM)
        return (i, *decode_state(code))

    def prob(self, pair_index: int, c1, c2) -> float:
        return float(self.probs[pair_index, state_code(chord(c1).index, chord(c2).index)])

    def chord_table(self) -> np.ndarray:
        """(c1, c2) marginal as a 7x7 table."""
        return self.probs.sum(axis=0).reshape(CHORD_CODES, CHORD_CODES)[:7, :7]

    def items(self) -> Iterator[tuple[tuple[int, int, int], float]]:
        for k in np.flatnonzero(self.flat):
            yield self.state(k), float(self.flat[k])


def joint_distribution(hhl: HHLResult, cvs: ChordVectorSet) -> JointDistribution:
    """Globally scaled joint: p(i, c) proportional to p_hhl(i) * (s * cv(i)[c])^2."""
    p = np.asarray(hhl.p_hhl)
    if p.shape[0] != cvs.vectors.shape[0]:
        raise ConfigError(f"HHL result has {p.shape[0]} pairs but chord set has {cvs.vectors.shape[0]}")
    w = p[:, None] * cvs.scaled**2
    Z = float(w.sum())
    if Z == 0.0:
        raise SupportError("joint distribution has empty support")
    probs = w / Z
    marginal = probs.sum(axis=1)
    probs.setflags(write=False)
    marginal.setflags(write=False)
    return JointDistribution(probs, hhl.ps_weight * Z, marginal)


def joint_distribution_per_pair(hhl: HHLResult, cvs: ChordVectorSet) -> JointDistribution:
    """Per-pair normalised variant: melody marginal equals p_hhl exactly."""
    p = np.asarray(hhl.p_hhl)
    norms = cvs.norms
    if np.any(norms == 0):
        raise SupportError("a note pair has an all-zero chord vector")
    probs = p[:, None] * (cvs.vectors / norms[:, None]) ** 2
    probs = probs / probs.sum()
    marginal = probs.sum(axis=1)
    probs.setflags(write=False)
    marginal.setflags(write=False)
    return JointDistribution(probs, hhl.ps_weight, marginal)
