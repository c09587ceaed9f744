"""Experiment sweeps: K, depolarising noise, stable rank, ablation and grammar coverage."""
from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .artifacts import format_table
from .config import RunConfig
from .errors import ConfigError
from .generator import (AblationVariant, ChainContext, Pipeline, concentration_factor,
                        modal_frequency, run_chain, sample_block)
from .hhl import apply_depolarizing
from .music import CHORDS, DEGREES, chromatic_kk, chromatic_notes, chord, note_from_name
from .prefmatrix import build_matrix, spectral_summary
from .rng import fresh_seed, make_rng, resolve_seed

log = logging.getLogger(__name__)

KINDS = ("k_sweep", "noise_sweep", "stable_rank_sweep", "ablation", "grammar_coverage")


@dataclass
class ExperimentReport:
    kind: str
    params: dict
    columns: list[str]
    rows: list[dict]
    summary: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params, "columns": self.columns,
                "rows": self.rows, "summary": self.summary}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(d["kind"], d["params"], list(d["columns"]), list(d["rows"]), dict(d.get("summary", {})))

    def to_text(self) -> str:
        table = format_table(self.columns, [[r.get(c) for c in self.columns] for r in self.rows])
        lines = [f"# {self.kind}", table]
        for k, v in self.summary.items():
            lines.append(f"{k}: {v:.6g}" if isinstance(v, float) else f"{k}: {v}")
        return "\n".join(lines)


def build_pipeline(cfg: RunConfig, K: int | None = None) -> Pipeline:
    A = build_matrix(cfg.note_set(), cfg.penalty_scheme(), cfg.kk_profile())
    return Pipeline(A, cfg.transition_grammar(), K=cfg.K if K is None else K,
                    hhl_mode=cfg.hhl_mode, m_clock=cfg.m_clock,
                    bias_alpha=cfg.bias_alpha, bias_sigma=cfg.bias_sigma)


def _k_sweep(cfg: RunConfig, seed):
    rows, trial_seeds = [], {}
    for K in cfg.k_grid:
        pipe = build_pipeline(cfg, K)
        comps, juncs = [], []
        trial_seeds[K] = []
        for t in range(cfg.trials):
            s = fresh_seed() if seed is None else seed
            trial_seeds[K].append(s)
            log.info("k_sweep K=%d trial %d seed %d", K, t, s)
            chain = run_chain(pipe, cfg.blocks, make_rng(s, "k_sweep", K, t), seed=s)
            comps.append(analysis.chord_tone_compliance(chain))
            juncs.extend(chain.junction_valid)
        flat = analysis.analytic_block_stats(pipe.joint(), pipe.pairs)
        rows.append({
            "K": K,
            "compliance_mean": statistics.fmean(comps),
            "compliance_std": statistics.stdev(comps) if len(comps) > 1 else 0.0,
            "compliance_min": min(comps),
            "compliance_max": max(comps),
            "junction_valid_rate": float(np.mean(juncs)) if juncs else 1.0,
            "v_to_i_rate": flat.v_to_i_rate,
            "tonic_ending_rate": flat.tonic_ending_rate,
            "stepwise_rate": flat.stepwise_rate,
        })
    return rows, {"trial_seeds": {str(k): v for k, v in trial_seeds.items()}}


def _noise_sweep(cfg: RunConfig, seed):
    pipe = build_pipeline(cfg)
    hhl = pipe.hhl()
    n_pairs = len(pipe.pairs)
    uniform = np.full(n_pairs, 1.0 / n_pairs)
    rows = []
    for k, alpha in enumerate(cfg.alpha_grid):
        noisy = apply_depolarizing(hhl, alpha)
        rng = make_rng(seed, "noise_sweep", k)
        counts = np.bincount(np.minimum(np.searchsorted(np.cumsum(noisy.p_noisy), rng.random(cfg.n),
                                                        side="right"), n_pairs - 1),
                             minlength=n_pairs)
        rows.append({
            "alpha": float(alpha),
            "fidelity": 1.0 - float(alpha),
            "ps": noisy.ps_noisy,
            "kl_pair": analysis.kl_divergence(noisy.p_noisy, uniform),
            "kl_sampled": analysis.kl_divergence(counts / cfg.n, uniform),
            "chi2": analysis.chi_square_uniformity(counts).statistic,
        })
    return rows, {"ps_ideal": hhl.ps_weight, "n_samples": cfg.n}


def _stable_rank_sweep(cfg: RunConfig, seed):
    rows = []
    kk = chromatic_kk()
    for n_notes in cfg.sr_grid:
        A = build_matrix(chromatic_notes(n_notes), cfg.penalty_scheme(), kk, pad=False)
        s = spectral_summary(A)
        N = A.dim_active
        rows.append({"n_notes": n_notes, "N": N, "stable_rank": s.stable_rank,
                     "sr_over_N": s.stable_rank / N, "kappa": s.kappa})
    return rows, {}


def _context(cfg: RunConfig) -> ChainContext:
    return ChainContext(note_from_name("C4"), chord("V"))


def _ablation(cfg: RunConfig, seed):
    pipe = build_pipeline(cfg)
    ctx = _context(cfg)
    counts = {}
    for v in AblationVariant:
        joint = pipe.joint(ctx, v)
        counts[v] = sample_block(joint, make_rng(seed, "ablation", v.value), cfg.n, pipe.pairs).counts
    unc = counts[AblationVariant.UNCONDITIONED]
    rows = []
    for v in AblationVariant:
        c = counts[v]
        k = int(np.lexsort((np.arange(c.size), -c))[0])
        i, code = divmod(k, 64)
        rows.append({
            "variant": v.value,
            "top_state": f"{pipe.pairs[i]} {DEGREES[code // 8]}->{DEGREES[code % 8]}",
            "top1": modal_frequency(c),
            "factor": concentration_factor(c, unc),
        })
    return rows, {"context": f"{ctx.prev_note}/{ctx.prev_chord}", "n_samples": cfg.n}


def _grammar_coverage(cfg: RunConfig, seed):
    pipe = build_pipeline(cfg)
    note = note_from_name("C4")
    rows = []
    for c in CHORDS:
        joint = pipe.joint(ChainContext(note, c), AblationVariant.HARMONY_ONLY)
        s = sample_block(joint, make_rng(seed, "grammar_coverage", c.index), cfg.n, pipe.pairs)
        succ = np.flatnonzero(pipe.grammar.T[c.index] > 0)
        rows.append({
            "context": c.degree,
            "valid_openings": " ".join(DEGREES[j] for j in succ),
            "n_valid": int(succ.size),
            "valid_pct": 100.0 * float(np.mean(np.isin(s.c1, succ))),
        })
    return rows, {"mean_valid_openings": statistics.fmean(r["n_valid"] for r in rows),
                  "n_samples_per_context": cfg.n}


_RUNNERS = {
    "k_sweep": _k_sweep,
    "noise_sweep": _noise_sweep,
    "stable_rank_sweep": _stable_rank_sweep,
    "ablation": _ablation,
    "grammar_coverage": _grammar_coverage,
}

_SAMPLE_DEFAULTS = {"ablation": 100_000, "grammar_coverage": 50_000}


def run_experiment(kind: str, config: RunConfig | None = None, seed: int | None = None) -> ExperimentReport:
    """Run one named sweep.  ``k_sweep`` with ``seed=None`` draws a logged seed per trial."""
    if kind not in _RUNNERS:
        raise ConfigError(f"unknown experiment {kind!r}; choose from {KINDS}")
    cfg = config or RunConfig(n=_SAMPLE_DEFAULTS.get(kind, 500_000))
    if kind != "k_sweep":
        seed = resolve_seed(seed)
    rows, extra = _RUNNERS[kind](cfg, seed)
    params = {"seed": seed, "K": cfg.K, "n": cfg.n, "scheme": cfg.scheme}
    columns = list(rows[0]) if rows else []
    return ExperimentReport(kind, params, columns, rows, extra)
