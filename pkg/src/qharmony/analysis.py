"""Statistics, rule-based harmony validation and the analytic gate-cost model."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import ConfigError, SupportError
from .music import (CHORDS, DEGREES, INTERVAL_CATEGORIES, Chord, Note, NotePair, chord,
                    interval_category)
from .oracle import CHORD_CODES, REGISTER_DIM, JointDistribution

V, I_, VII = chord("V").index, chord("I").index, chord("vii°").index


# --- divergences and goodness of fit ---------------------------------------

def kl_divergence(p, q) -> float:
    """sum p ln(p/q) over the support of p (natural log)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ConfigError(f"shape mismatch {p.shape} vs {q.shape}")
    m = p > 0
    if np.any(q[m] <= 0):
        raise SupportError("q vanishes where p is positive")
    return float(np.sum(p[m] * np.log(p[m] / q[m])))


@dataclass(frozen=True)
class ChiSquare:
    statistic: float
    dof: int
    p_value: float


def chi_square_uniformity(counts) -> ChiSquare:
    counts = np.asarray(counts, dtype=float)
    if counts.size == 0 or counts.sum() == 0:
        raise SupportError("chi-square needs a nonzero count table")
    expected = counts.sum() / counts.size
    stat = float(np.sum((counts - expected) ** 2) / expected)
    dof = counts.size - 1
    return ChiSquare(stat, dof, float(stats.chi2.sf(stat, dof)) if dof > 0 else 1.0)


def chi_square_gof(counts, probs) -> ChiSquare:
    """Pearson goodness of fit of observed counts to an analytic distribution (its support only)."""
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if counts.shape != probs.shape:
        raise ConfigError("counts and probabilities differ in shape")
    n = counts.sum()
    if n == 0:
        raise SupportError("no observations")
    support = probs > 0
    if np.any(counts[~support] > 0):
        raise SupportError("observations outside the analytic support")
    expected = n * probs[support] / probs[support].sum()
    stat = float(np.sum((counts[support] - expected) ** 2 / expected))
    dof = int(support.sum()) - 1
    return ChiSquare(stat, dof, float(stats.chi2.sf(stat, dof)))


def total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p, float) - np.asarray(q, float))))


# --- block statistics ------------------------------------------------------

@dataclass(frozen=True)
class BlockStats:
    n_samples: int
    kl_pair_vs_uniform: float
    chi2: float | None
    v_to_i_rate: float
    tonic_ending_rate: float
    stepwise_rate: float
    interval_shares: dict
    top_sequences: list
    nonzero_states: int

    def as_dict(self) -> dict:
        return asdict(self)


def _pair_arrays(pairs: Sequence[NotePair]):
    iv = np.array([p.interval_st for p in pairs])
    cat = np.array([INTERVAL_CATEGORIES.index(interval_category(p)) for p in pairs])
    return iv, cat


def interval_shares(p, pairs: Sequence[NotePair]) -> dict[str, float]:
    """Probability mass per interval category."""
    p = np.asarray(p, dtype=float)
    _, cat = _pair_arrays(pairs)
    tot = p.sum()
    return {c: float(p[cat == k].sum() / tot) for k, c in enumerate(INTERVAL_CATEGORIES)}


def _seq_label(pairs, i, c1, c2) -> dict:
    return {"pair": str(pairs[i]), "pair_index": int(i), "c1": DEGREES[c1], "c2": DEGREES[c2]}


def block_stats(samples, top: int = 10) -> BlockStats:
    """Direct-count statistics of a ``BlockSamples`` collection."""
    n = len(samples)
    if n == 0:
        raise SupportError("no samples")
    pairs = samples.pairs
    iv, cat = _pair_arrays(pairs)
    pair_counts = np.bincount(samples.pair_index, minlength=len(pairs))
    freq = pair_counts / n
    counts = samples.counts
    order = np.lexsort((np.arange(counts.size), -counts))[:top]
    tops = []
    for k in order:
        if counts[k] == 0:
            break
        i, code = divmod(int(k), REGISTER_DIM)
        c1, c2 = divmod(code, CHORD_CODES)
        tops.append({**_seq_label(pairs, i, c1, c2), "freq": float(counts[k] / n)})
    return BlockStats(
        n_samples=n,
        kl_pair_vs_uniform=kl_divergence(freq, np.full(len(pairs), 1.0 / len(pairs))),
        chi2=chi_square_uniformity(pair_counts).statistic,
        v_to_i_rate=float(np.mean((samples.c1 == V) & (samples.c2 == I_))),
        tonic_ending_rate=float(np.mean(samples.c2 == I_)),
        stepwise_rate=float(np.mean((iv[samples.pair_index] >= 1) & (iv[samples.pair_index] <= 2))),
        interval_shares={c: float(np.mean(cat[samples.pair_index] == k))
                         for k, c in enumerate(INTERVAL_CATEGORIES)},
        top_sequences=tops,
        nonzero_states=int(np.count_nonzero(counts)),
    )


def analytic_block_stats(joint: JointDistribution, pairs: Sequence[NotePair], top: int = 10) -> BlockStats:
    """Expected values of the ``block_stats`` rates under the analytic joint distribution."""
    iv, _ = _pair_arrays(pairs)
    table = joint.chord_table()
    marg = np.asarray(joint.melody_marginal)
    flat = joint.flat
    order = np.lexsort((np.arange(flat.size), -flat))[:top]
    tops = []
    for k in order:
        i, c1, c2 = joint.state(k)
        tops.append({**_seq_label(pairs, i, c1, c2), "freq": float(flat[k])})
    return BlockStats(
        n_samples=0,
        kl_pair_vs_uniform=kl_divergence(marg, np.full(marg.size, 1.0 / marg.size)),
        chi2=None,
        v_to_i_rate=float(table[V, I_]),
        tonic_ending_rate=float(table[:, I_].sum()),
        stepwise_rate=float(marg[(iv >= 1) & (iv <= 2)].sum()),
        interval_shares=interval_shares(marg, pairs),
        top_sequences=tops,
        nonzero_states=joint.support_size,
    )


# --- harmony validator -----------------------------------------------------

def _pc(note) -> int:
    return note.pitch_class if isinstance(note, Note) else int(note) % 12


def classify_note(note: Note | int, c: Chord | str) -> str:
    """chord_tone, step_nct (within 2 semitones of a chord tone, circularly) or leap_nct."""
    pc = _pc(note)
    tones = chord(c).tones_pc
    if pc in tones:
        return "chord_tone"
    dist = min(min((pc - t) % 12, (t - pc) % 12) for t in tones)
    return "step_nct" if dist <= 2 else "leap_nct"


DEFAULT_FUNCTIONS: Mapping[str, str] = MappingProxyType({
    "I": "T", "iii": "T", "vi": "T", "ii": "S", "IV": "S", "V": "D", "vii°": "D",
})
RATINGS = ("strong", "ok", "weak", "avoid")


@dataclass(frozen=True)
class ProgressionRating:
    rating: str
    from_function: str
    to_function: str


def rate_progression(c_from, c_to, functions: Mapping[str, str] = DEFAULT_FUNCTIONS) -> ProgressionRating:
    """D->T and S->D are strong, D->S is avoided, same-function motion is weak, the rest ok."""
    f, t = functions[chord(c_from).degree], functions[chord(c_to).degree]
    if (f, t) in (("D", "T"), ("S", "D")):
        r = "strong"
    elif (f, t) == ("D", "S"):
        r = "avoid"
    elif f == t:
        r = "weak"
    else:
        r = "ok"
    return ProgressionRating(r, f, t)


def _rating_table(functions) -> np.ndarray:
    return np.array([[RATINGS.index(rate_progression(a, b, functions).rating) for b in CHORDS]
                     for a in CHORDS])


_CLASSES = ("chord_tone", "step_nct", "leap_nct")


def _class_table() -> np.ndarray:
    """[pitch class, chord] -> note class index"""
    return np.array([[_CLASSES.index(classify_note(pc, c)) for c in CHORDS] for pc in range(12)])


@dataclass(frozen=True)
class HarmonyReport:
    n_blocks: int
    chord_tone_rate_n1: float
    chord_tone_rate_n2: float
    both_ct_rate: float
    leap_nct_rate: float
    progression_ratings: dict
    strong_or_ok_rate: float
    strong_rate: float
    tendency_resolution_rate: float | None

    def as_dict(self) -> dict:
        return asdict(self)


def _as_events(obj):
    """Normalise BlockSamples / ChainResult into arrays plus cross-block adjacencies."""
    from .generator import BlockSamples, ChainResult

    if isinstance(obj, ChainResult):
        blocks = obj.blocks
        n1 = np.array([b.pair.n1.midi for b in blocks])
        n2 = np.array([b.pair.n2.midi for b in blocks])
        c1 = np.array([b.c1.index for b in blocks])
        c2 = np.array([b.c2.index for b in blocks])
        links = [(k, k + 1) for k in range(len(blocks) - 1)]
        return n1, n2, c1, c2, links
    if isinstance(obj, BlockSamples):
        return obj.n1_midi, obj.n2_midi, obj.c1, obj.c2, []
    raise TypeError(f"cannot read blocks from {type(obj).__name__}")


def tendency_tone_rate(obj) -> float | None:
    """Share of (V|vii°)->I motions with melody B whose next melody note is C; None if no such motion."""
    n1, n2, c1, c2, links = _as_events(obj)
    firsts = [n1 % 12]
    nexts = [n2 % 12]
    cf, ct = [c1], [c2]
    if links:
        a = np.array([l[0] for l in links])
        b = np.array([l[1] for l in links])
        firsts.append(n2[a] % 12)
        nexts.append(n1[b] % 12)
        cf.append(c2[a])
        ct.append(c1[b])
    first, nxt = np.concatenate(firsts), np.concatenate(nexts)
    cfrom, cto = np.concatenate(cf), np.concatenate(ct)
    q = ((cfrom == V) | (cfrom == VII)) & (cto == I_) & (first == 11)
    if not q.any():
        return None
    return float(np.mean(nxt[q] == 0))


def harmony_report(obj, functions: Mapping[str, str] = DEFAULT_FUNCTIONS) -> HarmonyReport:
    n1, n2, c1, c2, links = _as_events(obj)
    if n1.size == 0:
        raise SupportError("no blocks to validate")
    cls = _class_table()
    k1 = cls[n1 % 12, c1]
    k2 = cls[n2 % 12, c2]
    ct, leap = _CLASSES.index("chord_tone"), _CLASSES.index("leap_nct")
    rt = _rating_table(functions)
    ratings = [rt[c1, c2]]
    if links:
        a = np.array([l[0] for l in links])
        b = np.array([l[1] for l in links])
        ratings.append(rt[c2[a], c1[b]])
    r = np.concatenate(ratings)
    counts = {name: int(np.sum(r == k)) for k, name in enumerate(RATINGS)}
    return HarmonyReport(
        n_blocks=int(n1.size),
        chord_tone_rate_n1=float(np.mean(k1 == ct)),
        chord_tone_rate_n2=float(np.mean(k2 == ct)),
        both_ct_rate=float(np.mean((k1 == ct) & (k2 == ct))),
        leap_nct_rate=float(np.mean((k1 == leap) | (k2 == leap))),
        progression_ratings=counts,
        strong_or_ok_rate=(counts["strong"] + counts["ok"]) / r.size,
        strong_rate=counts["strong"] / r.size,
        tendency_resolution_rate=tendency_tone_rate(obj),
    )


def chord_tone_compliance(events) -> float:
    """Share of (note, chord) melody events landing on a chord tone.

    Accepts a ``ChainResult`` or an iterable of ``(note, chord)`` pairs.
    """
    from .generator import ChainResult

    if isinstance(events, ChainResult):
        events = [(note, c) for _, _, note, c in events.events]
    events = list(events)
    if not events:
        raise SupportError("no events")
    return sum(classify_note(n, c) == "chord_tone" for n, c in events) / len(events)


# --- gate cost model --------------------------------------------------------

FOURIER_ANCHOR = 375          # n_chord = 3, transpiled
FOURIER_WIDE_ANCHOR = 8064    # n_chord = 6
LOOKUP_ANCHOR = 12742         # n_chord = 3
REPORTED_CROSSOVER_VOCAB = 192


def gate_cost(kind: str, n_chord_qubits: int) -> int:
    """Per-pair elementary gate count: lookup doubles per chord qubit, Fourier quadruples."""
    n = int(n_chord_qubits)
    if n < 3:
        raise ConfigError("gate model is defined for n_chord_qubits >= 3")
    if kind == "lookup":
        return LOOKUP_ANCHOR * 2 ** (n - 3)
    if kind == "fourier":
        if n == 3:
            return FOURIER_ANCHOR
        if n >= 6:
            return FOURIER_WIDE_ANCHOR * 4 ** (n - 6)
        return FOURIER_ANCHOR * math.ceil((FOURIER_WIDE_ANCHOR / FOURIER_ANCHOR) ** ((n - 3) / 3))
    raise ConfigError(f"unknown oracle kind {kind!r}")


def gate_cost_crossover() -> dict:
    """Where the lookup oracle becomes cheaper, solved on the n >= 6 branch of the model."""
    # 8064 * 4**(n-6) == 12742 * 2**(n-3)  =>  2**(n-6) == 8 * 12742 / 8064
    n_star = 6.0 + math.log2(8 * LOOKUP_ANCHOR / FOURIER_WIDE_ANCHOR)
    first_int = next(n for n in range(3, 64) if gate_cost("lookup", n) < gate_cost("fourier", n))
    return {
        "model_n_chord": n_star,
        "model_vocab": 2.0**n_star,
        "first_integer_n_lookup_cheaper": first_int,
        "reported_vocab": REPORTED_CROSSOVER_VOCAB,
    }


def gate_cost_table(ns=(3, 6, 8)) -> list[dict]:
    return [{"n_chord": n, "vocab": 2**n, "fourier": gate_cost("fourier", n),
             "lookup": gate_cost("lookup", n)} for n in ns]
