"""Seeded sampling of 2/2 blocks, Method-A chaining and the classical Markov baseline."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, SupportError
from .hhl import EigenDecomposition, HHLResult, build_b, eigh_symmetric, hhl_solve
from .music import CHORDS, Chord, Note, NotePair, TransitionGrammar
from .oracle import (CHORD_CODES, REGISTER_DIM, ChordVectorSet, JointDistribution,
                     build_chord_vectors, joint_distribution)
from .prefmatrix import PreferenceMatrix, build_matrix


class AblationVariant(str, enum.Enum):
    FULL = "full"
    MELODY_ONLY = "melody_only"
    HARMONY_ONLY = "harmony_only"
    UNCONDITIONED = "unconditioned"

    @property
    def melodic(self) -> bool:
        return self in (AblationVariant.FULL, AblationVariant.MELODY_ONLY)

    @property
    def harmonic(self) -> bool:
        return self in (AblationVariant.FULL, AblationVariant.HARMONY_ONLY)


def _variant(v) -> AblationVariant:
    try:
        return AblationVariant(v)
    except ValueError:
        raise ConfigError(f"unknown ablation variant {v!r}") from None


@dataclass(frozen=True)
class ChainContext:
    prev_note: Note
    prev_chord: Chord


@dataclass(frozen=True)
class BlockSample:
    pair: NotePair
    c1: Chord
    c2: Chord

    @property
    def context(self) -> ChainContext:
        return ChainContext(self.pair.n2, self.c2)

    def __str__(self) -> str:
        return f"{self.pair.n1}/{self.c1} {self.pair.n2}/{self.c2}"


class BlockSamples:
    """Array-backed collection of sampled blocks; indexes and iterates as BlockSample."""

    def __init__(self, pair_index, c1, c2, pairs: Sequence[NotePair]):
        self.pair_index = np.asarray(pair_index, dtype=np.int64)
        self.c1 = np.asarray(c1, dtype=np.int64)
        self.c2 = np.asarray(c2, dtype=np.int64)
        self.pairs = tuple(pairs)

    @classmethod
    def from_blocks(cls, blocks: Sequence[BlockSample], pairs: Sequence[NotePair]):
        return cls([b.pair.index for b in blocks], [b.c1.index for b in blocks],
                   [b.c2.index for b in blocks], pairs)

    def __len__(self) -> int:
        return int(self.pair_index.size)

    def __getitem__(self, k: int) -> BlockSample:
        return BlockSample(self.pairs[self.pair_index[k]], CHORDS[self.c1[k]], CHORDS[self.c2[k]])

    def __iter__(self) -> Iterator[BlockSample]:
        return (self[k] for k in range(len(self)))

    @property
    def flat_states(self) -> np.ndarray:
        return self.pair_index * REGISTER_DIM + self.c1 * CHORD_CODES + self.c2

    @cached_property
    def counts(self) -> np.ndarray:
        """Counts per flat state (same order as ``JointDistribution.flat``)."""
        return np.bincount(self.flat_states, minlength=len(self.pairs) * REGISTER_DIM)

    @property
    def n1_midi(self) -> np.ndarray:
        return np.array([p.n1.midi for p in self.pairs])[self.pair_index]

    @property
    def n2_midi(self) -> np.ndarray:
        return np.array([p.n2.midi for p in self.pairs])[self.pair_index]


def _inverse_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs)
    if cdf[-1] <= 0:
        raise SupportError("cannot sample from an empty distribution")
    return np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), probs.size - 1)


def sample_block(joint: JointDistribution, rng: np.random.Generator, n: int,
                 pairs: Sequence[NotePair]) -> BlockSamples:
    """``n`` i.i.d. joint collapses by inverse CDF over canonically ordered states."""
    if n < 1:
        raise ConfigError("need at least one sample")
    flat = joint.flat
    k = _inverse_cdf(flat, rng.random(n))
    i, code = np.divmod(k, REGISTER_DIM)
    c1, c2 = np.divmod(code, CHORD_CODES)
    return BlockSamples(i, c1, c2, pairs)


@dataclass
class Pipeline:
    """Fixed matrix + grammar + oracle order; only the rhs and chord restriction vary per block."""

    matrix: PreferenceMatrix
    grammar: TransitionGrammar
    K: int = 4
    hhl_mode: str = "exact"
    m_clock: int = 6
    bias_alpha: float = 3.0
    bias_sigma: float = 2.0
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def default(cls, **kw) -> "Pipeline":
        return cls(build_matrix(), TransitionGrammar.default(), **kw)

    @property
    def pairs(self) -> tuple[NotePair, ...]:
        return self.matrix.pairs

    @cached_property
    def eig(self) -> EigenDecomposition:
        return eigh_symmetric(self.matrix)

    def hhl(self, context_note: Note | None = None) -> HHLResult:
        key = ("hhl", None if context_note is None else context_note.midi)
        if key not in self._cache:
            mode = "uniform" if context_note is None else "biased"
            b = build_b(self.pairs, mode, context_note, self.bias_alpha, self.bias_sigma,
                        self.matrix.dim_padded)
            self._cache[key] = hhl_solve(self.matrix, b, self.hhl_mode, self.m_clock, eig=self.eig)
        return self._cache[key]

    def chord_vectors(self, restriction: Chord | None = None) -> ChordVectorSet:
        key = ("cv", None if restriction is None else restriction.index)
        if key not in self._cache:
            self._cache[key] = build_chord_vectors(self.pairs, self.grammar, self.K, restriction)
        return self._cache[key]

    def joint(self, context: ChainContext | None = None, variant="full") -> JointDistribution:
        variant = _variant(variant)
        note = context.prev_note if context is not None and variant.melodic else None
        restr = context.prev_chord if context is not None and variant.harmonic else None
        key = ("joint", None if note is None else note.midi, None if restr is None else restr.index)
        if key not in self._cache:
            self._cache[key] = joint_distribution(self.hhl(note), self.chord_vectors(restr))
        return self._cache[key]


def compound_ps(weights: Sequence[float]) -> float:
    return math.prod(weights)


@dataclass(frozen=True)
class ChainResult:
    blocks: list[BlockSample]
    contexts: list[ChainContext | None]
    junction_valid: list[bool]
    per_block_ps: list[float]
    compound_ps: float
    variant: str = "full"
    seed: int | None = None

    @property
    def events(self) -> list[tuple[int, int, Note, Chord]]:
        """(block, position, note, chord) for every melody event."""
        out = []
        for k, b in enumerate(self.blocks, start=1):
            out.append((k, 1, b.pair.n1, b.c1))
            out.append((k, 2, b.pair.n2, b.c2))
        return out


def run_chain(pipeline: Pipeline, n_blocks: int, rng: np.random.Generator,
              variant="full", seed: int | None = None) -> ChainResult:
    """Method-A chain: each block is conditioned on the previous block's (n2, c2)."""
    if n_blocks < 1:
        raise ConfigError("chain needs at least one block")
    variant = _variant(variant)
    blocks, contexts, weights = [], [], []
    ctx = None
    for _ in range(n_blocks):
        joint = pipeline.joint(ctx, variant)
        blk = sample_block(joint, rng, 1, pipeline.pairs)[0]
        blocks.append(blk)
        contexts.append(ctx)
        weights.append(joint.joint_ps_weight)
        ctx = blk.context
    junctions = [pipeline.grammar.is_valid(a.c2, b.c1) for a, b in zip(blocks, blocks[1:])]
    return ChainResult(blocks, contexts, junctions, weights, compound_ps(weights), variant.value, seed)


@dataclass(frozen=True)
class BaselineResult:
    samples: BlockSamples
    chord_conditionals: np.ndarray = field(repr=False)  # (n_pairs, 64), rows sum to 1


def classical_baseline(hhl: HHLResult, grammar: TransitionGrammar, K: int,
                       rng: np.random.Generator, n: int, pairs: Sequence[NotePair],
                       chunk: int = 200_000) -> BaselineResult:
    """Two-stage Markov baseline: pair ~ p_hhl, then chords ~ per-pair normalised cv(i)^2."""
    if n < 1:
        raise ConfigError("need at least one sample")
    cvs = build_chord_vectors(pairs, grammar, K)
    sq = cvs.vectors**2
    cond = sq / sq.sum(axis=1, keepdims=True)
    pair_idx = _inverse_cdf(np.asarray(hhl.p_hhl), rng.random(n))
    u = rng.random(n)
    cdf = np.cumsum(cond, axis=1)
    codes = np.empty(n, dtype=np.int64)
    for lo in range(0, n, chunk):
        rows = cdf[pair_idx[lo:lo + chunk]]
        uu = u[lo:lo + chunk, None] * rows[:, -1:]
        codes[lo:lo + chunk] = np.minimum((rows <= uu).sum(axis=1), REGISTER_DIM - 1)
    c1, c2 = np.divmod(codes, CHORD_CODES)
    return BaselineResult(BlockSamples(pair_idx, c1, c2, pairs), cond)


def modal_frequency(counts) -> float:
    counts = np.asarray(counts)
    total = counts.sum()
    if total == 0:
        raise SupportError("empty count table")
    return float(counts.max() / total)


def concentration_factor(conditioned_counts, unconditioned_counts) -> float:
    """Ratio of modal joint-state frequencies, conditioned over unconditioned."""
    cond = np.asarray(conditioned_counts)
    unc = np.asarray(unconditioned_counts)
    if cond.sum() == 0 or unc.sum() == 0:
        raise SupportError("count tables must be nonempty")
    if unc.max() == 0:
        raise SupportError("unconditioned modal count is zero")
    return modal_frequency(cond) / modal_frequency(unc)

