"""Desk-scale simulation of an HHL melody solver coupled to a Fourier chord oracle."""
from .errors import ConfigError, NumericalError, QHarmonyError, SupportError
from .generator import AblationVariant, Pipeline, classical_baseline, run_chain, sample_block
from .hhl import apply_depolarizing, build_b, eigh_symmetric, hhl_solve
from .kernels import BACKEND
from .music import (CHORDS, DEFAULT_NOTES, Chord, Note, NotePair, PenaltyScheme, TransitionGrammar,
                    chord, make_pairs)
from .oracle import build_chord_vectors, fourier_fit, joint_distribution
from .prefmatrix import build_matrix, spectral_summary

__version__ = "0.1.0"

__all__ = [
    "AblationVariant", "BACKEND", "CHORDS", "Chord", "ConfigError", "DEFAULT_NOTES", "Note",
    "NotePair", "NumericalError", "PenaltyScheme", "Pipeline", "QHarmonyError", "SupportError",
    "TransitionGrammar", "apply_depolarizing", "build_b", "build_chord_vectors", "build_matrix",
    "chord", "classical_baseline", "eigh_symmetric", "fourier_fit", "hhl_solve",
    "joint_distribution", "make_pairs", "run_chain", "sample_block", "spectral_summary",
]
