import numpy as np
import pytest

from qharmony.errors import ConfigError, SupportError
from qharmony.generator import (AblationVariant, BlockSamples, ChainContext, Pipeline,
                                classical_baseline, compound_ps, concentration_factor,
                                modal_frequency, run_chain, sample_block)
from qharmony.music import CHORDS, chord, note_from_name
from qharmony.oracle import JointDistribution
from qharmony.rng import fresh_seed, make_rng, resolve_seed


def test_rng_streams_are_keyed():
    a = make_rng(5, "x", 1).random(4)
    np.testing.assert_array_equal(a, make_rng(5, "x", 1).random(4))
    assert not np.array_equal(a, make_rng(5, "x", 2).random(4))
    assert not np.array_equal(a, make_rng(6, "x", 1).random(4))
    assert isinstance(make_rng(0).bit_generator, np.random.Philox)


def test_resolve_seed(monkeypatch):
    monkeypatch.setenv("QHARMONY_SEED", "17")
    assert resolve_seed(None) == 17
    assert resolve_seed(3) == 3
    monkeypatch.delenv("QHARMONY_SEED")
    assert isinstance(resolve_seed(None), int)
    assert fresh_seed() >= 0


def test_sample_block_reproducible(pipeline, joint):
    a = sample_block(joint, make_rng(1, "s"), 1000, pipeline.pairs)
    b = sample_block(joint, make_rng(1, "s"), 1000, pipeline.pairs)
    np.testing.assert_array_equal(a.flat_states, b.flat_states)
    assert len(a) == 1000


def test_point_mass(pipeline):
    probs = np.zeros((49, 64))
    probs[3, 9] = 1.0
    j = JointDistribution(probs, 1.0, probs.sum(axis=1))
    s = sample_block(j, make_rng(0), 500, pipeline.pairs)
    assert set(s.flat_states.tolist()) == {3 * 64 + 9}
    blk = s[0]
    assert (blk.c1.index, blk.c2.index) == (1, 1) and blk.pair.index == 3


def test_sample_block_errors(pipeline, joint):
    with pytest.raises(ConfigError):
        sample_block(joint, make_rng(0), 0, pipeline.pairs)
    empty = JointDistribution(np.zeros((49, 64)), 0.0, np.zeros(49))
    with pytest.raises(SupportError):
        sample_block(empty, make_rng(0), 5, pipeline.pairs)


def test_samples_are_grammar_valid(pipeline, joint):
    s = sample_block(joint, make_rng(2), 20000, pipeline.pairs)
    assert np.all(pipeline.grammar.T[s.c1, s.c2] > 0)
    again = BlockSamples.from_blocks(list(s)[:50], pipeline.pairs)
    np.testing.assert_array_equal(again.flat_states, s.flat_states[:50])


def test_v_to_i_matches_analytic(samples_500k, joint):
    V, I = chord("V").index, chord("I").index
    emp = np.mean((samples_500k.c1 == V) & (samples_500k.c2 == I))
    assert abs(emp - joint.chord_table()[V, I]) < 0.003


def test_pipeline_caches(pipeline):
    assert pipeline.hhl() is pipeline.hhl()
    ctx = ChainContext(note_from_name("C4"), chord("V"))
    assert pipeline.joint(ctx) is pipeline.joint(ctx)


def test_variants():
    assert AblationVariant.FULL.melodic and AblationVariant.FULL.harmonic
    assert AblationVariant.MELODY_ONLY.melodic and not AblationVariant.MELODY_ONLY.harmonic
    assert not AblationVariant.UNCONDITIONED.melodic


def test_restricted_openings(pipeline):
    for c in CHORDS:
        j = pipeline.joint(ChainContext(note_from_name("C4"), c), "harmony_only")
        opens = set(np.flatnonzero(j.probs.reshape(49, 8, 8).sum(axis=(0, 2))))
        assert opens == set(np.flatnonzero(pipeline.grammar.T[c.index]))


def test_chain_properties(pipeline):
    chain = run_chain(pipeline, 4, make_rng(7, "chain"), seed=7)
    assert len(chain.blocks) == 4 and len(chain.junction_valid) == 3
    assert all(chain.junction_valid)
    assert chain.contexts[0] is None
    for prev, ctx in zip(chain.blocks, chain.contexts[1:]):
        assert ctx == prev.context
    assert chain.compound_ps == np.prod(chain.per_block_ps)
    assert len(chain.events) == 8


def test_single_block_chain(pipeline):
    chain = run_chain(pipeline, 1, make_rng(0))
    assert chain.junction_valid == [] and chain.compound_ps == chain.per_block_ps[0]
    with pytest.raises(ConfigError):
        run_chain(pipeline, 0, make_rng(0))
    with pytest.raises(ConfigError):
        run_chain(pipeline, 2, make_rng(0), variant="sideways")


def test_compounding_monotone(pipeline):
    chain = run_chain(pipeline, 6, make_rng(3))
    partial = [compound_ps(chain.per_block_ps[:k]) for k in range(1, 7)]
    assert all(a > b for a, b in zip(partial, partial[1:]))
    assert compound_ps([0.0019, 0.014, 0.013, 0.013]) == pytest.approx(4.5e-9, abs=0.2e-9)


def test_baseline(pipeline):
    hhl = pipeline.hhl()
    res = classical_baseline(hhl, pipeline.grammar, 4, make_rng(1, "base"), 200_000, pipeline.pairs)
    marg = np.bincount(res.samples.pair_index, minlength=49) / 200_000
    assert 0.5 * np.abs(marg - hhl.p_hhl).sum() < 0.01
    # chord conditionals coincide with the coherent pipeline's
    j = pipeline.joint()
    np.testing.assert_allclose(res.chord_conditionals, j.probs / j.probs.sum(axis=1, keepdims=True), atol=1e-12)
    assert np.all(pipeline.grammar.T[res.samples.c1, res.samples.c2] > 0)


def test_concentration_factor():
    a = np.array([304, 10, 5])
    b = np.array([37, 30, 20])
    assert concentration_factor(a / a.sum() * 10000, b / b.sum() * 10000) == pytest.approx(
        modal_frequency(a) / modal_frequency(b))
    assert concentration_factor(b, b) == 1.0
    # modal 3.04% conditioned vs 0.37% unconditioned
    cond = np.concatenate([[304.0], np.full(99, 9696 / 99)])
    unc = np.concatenate([[37.0], np.full(270, 9963 / 270)])
    assert concentration_factor(cond, unc) == pytest.approx(8.2, abs=0.05)
    with pytest.raises(SupportError):
        concentration_factor([1, 2], [0, 0])
