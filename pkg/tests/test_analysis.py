import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qharmony import analysis
from qharmony.errors import ConfigError, SupportError
from qharmony.generator import BlockSample, BlockSamples, ChainResult
from qharmony.music import CHORDS, DEFAULT_NOTES, DEFAULT_PAIRS, NotePair, chord, note_from_name


def _pair(a, b):
    n1, n2 = note_from_name(a), note_from_name(b)
    return next(p for p in DEFAULT_PAIRS if (p.n1, p.n2) == (n1, n2))


def _samples(*blocks):
    return BlockSamples.from_blocks([BlockSample(_pair(a, b), chord(c1), chord(c2)) for a, b, c1, c2 in blocks],
                                    DEFAULT_PAIRS)


def _chain(*blocks):
    bl = [BlockSample(_pair(a, b), chord(c1), chord(c2)) for a, b, c1, c2 in blocks]
    return ChainResult(bl, [None] * len(bl), [True] * (len(bl) - 1), [1.0] * len(bl), 1.0)


def test_kl_basics():
    p = np.full(49, 1 / 49)
    assert analysis.kl_divergence(p, p) == 0.0
    point = np.zeros(49)
    point[0] = 1
    assert analysis.kl_divergence(point, p) == pytest.approx(math.log(49), abs=1e-12)
    with pytest.raises(SupportError):
        analysis.kl_divergence([0.5, 0.5], [1.0, 0.0])
    with pytest.raises(ConfigError):
        analysis.kl_divergence([1.0], [0.5, 0.5])


def test_kl_default_p_hhl(pipeline):
    p = pipeline.hhl().p_hhl
    assert analysis.kl_divergence(p, np.full(49, 1 / 49)) == pytest.approx(0.107, abs=0.03)


def test_chi_square():
    assert analysis.chi_square_uniformity([5, 5, 5]).statistic == 0.0
    r = analysis.chi_square_uniformity([30, 10])
    assert (r.statistic, r.dof) == (10.0, 1)
    with pytest.raises(SupportError):
        analysis.chi_square_uniformity([0, 0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 10), min_size=2, max_size=20), st.integers(0, 2**32 - 1))
def test_kl_chi2_brute_force(w, seed):
    p = np.array(w) / sum(w)
    q = np.random.default_rng(seed).dirichlet(np.ones(len(w)))
    kl = sum(pi * math.log(pi / qi) for pi, qi in zip(p, q))
    assert abs(analysis.kl_divergence(p, q) - kl) < 1e-10
    counts = np.round(np.array(w) * 100)
    E = counts.sum() / len(counts)
    chi = sum((o - E) ** 2 / E for o in counts)
    assert abs(analysis.chi_square_uniformity(counts).statistic - chi) < 1e-10 * max(1, chi)


def test_chi_square_gof_support():
    with pytest.raises(SupportError):
        analysis.chi_square_gof([1, 1], [1.0, 0.0])
    r = analysis.chi_square_gof([25, 25, 50], [0.25, 0.25, 0.5])
    assert r.statistic == 0 and r.dof == 2 and r.p_value == 1.0


def test_block_stats_single_sample():
    st_ = analysis.block_stats(_samples(("B3", "C4", "IV", "V")))
    assert (st_.v_to_i_rate, st_.tonic_ending_rate, st_.stepwise_rate) == (0.0, 0.0, 1.0)
    assert st_.nonzero_states == 1 and st_.top_sequences[0]["c1"] == "IV"
    assert sum(st_.interval_shares.values()) == pytest.approx(1.0, abs=1e-9)


def test_block_stats_vs_analytic(samples_500k, joint, pipeline):
    emp = analysis.block_stats(samples_500k)
    an = analysis.analytic_block_stats(joint, pipeline.pairs)
    n = len(samples_500k)
    for key in ("v_to_i_rate", "tonic_ending_rate", "stepwise_rate"):
        p = getattr(an, key)
        assert abs(getattr(emp, key) - p) <= 3 * math.sqrt(p * (1 - p) / n), key
    assert emp.nonzero_states == an.nonzero_states == 784
    assert 1e4 < emp.chi2 < 1e6


def test_interval_shares(pipeline):
    sh = analysis.interval_shares(pipeline.hhl().p_hhl, pipeline.pairs)
    uni = analysis.interval_shares(np.ones(49), pipeline.pairs)
    assert uni["step"] == pytest.approx(12 / 49)
    assert sh["step"] == pytest.approx(0.39, abs=0.04)
    assert sh["step"] / uni["step"] == pytest.approx(1.59, abs=0.17)


@pytest.mark.parametrize("note,c,cls", [("E4", "I", "chord_tone"), ("D4", "I", "step_nct"),
                                        ("G#4", "vii°", "leap_nct"), ("C4", "vi", "chord_tone")])
def test_classify_note(note, c, cls):
    assert analysis.classify_note(note_from_name(note), chord(c)) == cls


def test_diatonic_no_leap():
    for n in DEFAULT_NOTES:
        for c in CHORDS:
            assert analysis.classify_note(n, c) != "leap_nct"


def test_rate_progression():
    assert analysis.rate_progression("V", "I").rating == "strong"
    assert analysis.rate_progression("V", "IV").rating == "avoid"
    assert analysis.rate_progression("I", "vi").rating == "weak"
    assert analysis.rate_progression("I", "IV").rating == "ok"
    r = analysis.rate_progression("ii", "V")
    assert (r.rating, r.from_function, r.to_function) == ("strong", "S", "D")
    avoid = {(a.degree, b.degree) for a in CHORDS for b in CHORDS
             if analysis.rate_progression(a, b).rating == "avoid"}
    assert avoid == {("V", "IV"), ("V", "ii"), ("vii°", "IV"), ("vii°", "ii")}


def test_tendency_rate():
    assert analysis.tendency_tone_rate(_samples(("B3", "C4", "V", "I"))) == 1.0
    assert analysis.tendency_tone_rate(_samples(("B3", "A4", "V", "I"))) == 0.0
    assert analysis.tendency_tone_rate(_samples(("C4", "C4", "V", "I"))) is None
    # across a junction: block 1 ends B3 on V, block 2 opens C4 on I
    assert analysis.tendency_tone_rate(_chain(("C4", "B3", "I", "V"), ("C4", "D4", "I", "V"))) == 1.0


def test_harmony_report_counts():
    ch = _chain(("C4", "B3", "I", "V"), ("C4", "D4", "I", "V"), ("G4", "C4", "vi", "IV"))
    h = analysis.harmony_report(ch)
    assert sum(h.progression_ratings.values()) == 3 + 2
    assert 0 <= h.strong_or_ok_rate <= 1 and h.n_blocks == 3


def test_harmony_report_default_samples(samples_500k):
    h = analysis.harmony_report(samples_500k)
    assert h.progression_ratings["avoid"] == 0
    assert h.leap_nct_rate == 0.0
    assert h.strong_or_ok_rate >= 0.9
    assert 0 <= h.tendency_resolution_rate <= 1


def test_tendency_rate_band(samples_500k):
    assert analysis.tendency_tone_rate(samples_500k) == pytest.approx(0.213, abs=0.15)


def test_chord_tone_compliance():
    seq = [("A4", "iii"), ("A4", "vi"), ("A4", "IV"), ("G4", "I"), ("G4", "V"), ("C4", "I"), ("C4", "IV"), ("G4", "V")]
    events = [(note_from_name(n), chord(c)) for n, c in seq]
    assert analysis.chord_tone_compliance(events) == 7 / 8
    assert analysis.chord_tone_compliance([(note_from_name("C4"), chord("I"))]) == 1.0
    with pytest.raises(SupportError):
        analysis.chord_tone_compliance([])


def test_gate_cost_table():
    cells = {(k, n): analysis.gate_cost(k, n) for k in ("fourier", "lookup") for n in (3, 6, 8)}
    assert cells == {("fourier", 3): 375, ("fourier", 6): 8064, ("fourier", 8): 129024,
                     ("lookup", 3): 12742, ("lookup", 6): 101936, ("lookup", 8): 407744}
    assert analysis.gate_cost("fourier", 4) == 1125 and analysis.gate_cost("fourier", 5) == 3000
    with pytest.raises(ConfigError):
        analysis.gate_cost("fourier", 2)
    with pytest.raises(ConfigError):
        analysis.gate_cost("magic", 4)


def test_gate_crossover():
    c = analysis.gate_cost_crossover()
    n = c["model_n_chord"]
    assert 8064 * 4 ** (n - 6) == pytest.approx(12742 * 2 ** (n - 3), rel=1e-12)
    assert c["first_integer_n_lookup_cheaper"] == 10
    assert c["reported_vocab"] == 192


def test_total_variation():
    assert analysis.total_variation([1, 0], [0, 1]) == 1.0
