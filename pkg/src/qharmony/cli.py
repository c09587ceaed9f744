"""``qharmony`` command line: matrix, solve, generate, chain, baseline, validate, sweep, gatecost, report."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis, artifacts
from .config import VARIANTS, RunConfig, load_config
from .errors import ConfigError, NumericalError
from .experiments import KINDS, ExperimentReport, build_pipeline, run_experiment
from .generator import BlockSample, ChainResult, classical_baseline, run_chain, sample_block
from .hhl import apply_depolarizing
from .music import Note, NotePair, chord, note_from_name
from .oracle import joint_distribution_per_pair
from .prefmatrix import build_matrix, save_matrix_csv, spectral_summary
from .rng import make_rng, resolve_seed

log = logging.getLogger("qharmony")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--n", type=int, help="sample count")
    p.add_argument("--scheme")
    p.add_argument("--notes", help="space- or comma-separated note names")
    p.add_argument("--chromatic", type=int, help="use N consecutive semitones from C3")
    p.add_argument("--hhl-mode", dest="hhl_mode", choices=("exact", "binned"))
    p.add_argument("--m-clock", dest="m_clock", type=int)
    p.add_argument("--out-dir", dest="out", help="directory for default output names")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qharmony", description="Simulated HHL + harmonic-oracle music generation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("matrix", help="build the preference matrix and its spectral summary")
    _common(p)
    p.add_argument("--out", dest="out_file", help="matrix CSV (full padded)")
    p.add_argument("--report")

    p = sub.add_parser("solve", help="post-selected melody distribution")
    _common(p)
    p.add_argument("--context", help="bias b toward pairs starting near this note")
    p.add_argument("--noise-alpha", dest="noise_alpha", type=float)
    p.add_argument("--out", dest="out_file", help="p_hhl CSV")
    p.add_argument("--report")

    p = sub.add_parser("generate", help="sample blocks from the joint distribution")
    _common(p)
    p.add_argument("--out", dest="out_file", help="analytic joint CSV")
    p.add_argument("--report")

    p = sub.add_parser("chain", help="Method-A chain of blocks")
    _common(p)
    p.add_argument("--blocks", type=int)
    p.add_argument("--variant", choices=VARIANTS)
    p.add_argument("--out", dest="out_file", help="note-event CSV")
    p.add_argument("--report")

    p = sub.add_parser("baseline", help="classical per-pair normalised Markov baseline")
    _common(p)
    p.add_argument("--report")

    p = sub.add_parser("validate", help="rule-based harmony report")
    _common(p)
    p.add_argument("--events", help="note-event CSV to validate (default: sample the pipeline)")
    p.add_argument("--report")

    p = sub.add_parser("sweep", help="run an experiment sweep")
    _common(p)
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--trials", type=int)
    p.add_argument("--blocks", type=int)
    p.add_argument("--report")
    p.add_argument("--text", help="aligned-text table path")

    p = sub.add_parser("gatecost", help="analytic oracle gate-count model")
    p.add_argument("--n-max", dest="n_max", type=int, default=8)
    p.add_argument("--report")
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("report", help="render stored JSON artifacts as text tables")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--text", help="write the rendering here instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


_OVERRIDES = ("seed", "K", "n", "scheme", "notes", "chromatic", "hhl_mode", "m_clock", "out",
              "blocks", "variant", "noise_alpha", "trials")


def _config(args, **defaults) -> RunConfig:
    over = {k: getattr(args, k, None) for k in _OVERRIDES}
    return load_config(args.config, over, defaults)


def _path(cfg: RunConfig, explicit, default_name):
    return Path(explicit) if explicit else Path(cfg.out) / default_name


def _emit(doc: dict, path) -> None:
    artifacts.write_json(path, doc)
    log.info("wrote %s", path)


def _cmd_matrix(args) -> int:
    cfg = _config(args)
    A = build_matrix(cfg.note_set(), cfg.penalty_scheme(), cfg.kk_profile())
    s = spectral_summary(A)
    out = _path(cfg, args.out_file, "matrix.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_matrix_csv(A, out)
    doc = {"type": "matrix", "dim_active": A.dim_active, "dim_padded": A.dim_padded,
           "shift_applied": A.shift_applied, "scheme": cfg.scheme, **s.as_dict()}
    _emit(doc, _path(cfg, args.report, "matrix.json"))
    print(f"lambda_min={s.lambda_min:.6f} lambda_max={s.lambda_max:.6f} "
          f"kappa={s.kappa:.6f} stable_rank={s.stable_rank:.6f}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    cfg = _config(args)
    pipe = build_pipeline(cfg)
    ctx = note_from_name(args.context) if args.context else None
    res = pipe.hhl(ctx)
    p, ps = res.p_hhl, res.ps_weight
    if cfg.noise_alpha:
        noisy = apply_depolarizing(res, cfg.noise_alpha)
        p, ps = noisy.p_noisy, noisy.ps_noisy
    artifacts.write_p_hhl(_path(cfg, args.out_file, "p_hhl.csv"), p, pipe.pairs)
    shares = analysis.interval_shares(p, pipe.pairs)
    uniform = np.full(len(p), 1.0 / len(p))
    top = [{"pair": str(pipe.pairs[i]), "p": float(p[i])}
           for i in np.lexsort((np.arange(len(p)), -np.asarray(p)))[:5]]
    doc = {"type": "solve", "mode": cfg.hhl_mode, "context": args.context, "noise_alpha": cfg.noise_alpha,
           "ps_weight": ps, "kl_vs_uniform": analysis.kl_divergence(p, uniform),
           "interval_shares": shares, "top": top}
    _emit(doc, _path(cfg, args.report, "solve.json"))
    print(artifacts.format_table(["pair", "p"], [[t["pair"], t["p"]] for t in top]))
    print(f"ps_weight={ps:.6g}")
    return EXIT_OK


def _cmd_generate(args) -> int:
    cfg = _config(args)
    seed = resolve_seed(cfg.seed)
    pipe = build_pipeline(cfg)
    joint = pipe.joint()
    artifacts.write_joint(_path(cfg, args.out_file, "joint.csv"), joint)
    samples = sample_block(joint, make_rng(seed, "generate"), cfg.n, pipe.pairs)
    st = analysis.block_stats(samples)
    gof = analysis.chi_square_gof(samples.counts, joint.flat)
    doc = {"type": "generate", "seed": seed, "K": cfg.K, "n": cfg.n,
           "joint_ps_weight": joint.joint_ps_weight, "support": joint.support_size,
           "stats": st.as_dict(), "analytic": analysis.analytic_block_stats(joint, pipe.pairs).as_dict(),
           "gof": {"statistic": gof.statistic, "dof": gof.dof, "p_value": gof.p_value}}
    _emit(doc, _path(cfg, args.report, "generate.json"))
    print(_render_generate(doc))
    return EXIT_OK


def chain_report(chain: ChainResult, K: int) -> dict:
    h = analysis.harmony_report(chain)
    return {"type": "chain", "seed": chain.seed, "K": K, "variant": chain.variant,
            "blocks": [str(b) for b in chain.blocks], "junction_valid": list(chain.junction_valid),
            "per_block_ps": list(chain.per_block_ps), "compound_ps": chain.compound_ps,
            "chord_tone_compliance": analysis.chord_tone_compliance(chain), "harmony": h.as_dict()}


def _cmd_chain(args) -> int:
    cfg = _config(args)
    seed = resolve_seed(cfg.seed)
    pipe = build_pipeline(cfg)
    chain = run_chain(pipe, cfg.blocks, make_rng(seed, "chain"), cfg.variant, seed=seed)
    artifacts.write_events(_path(cfg, args.out_file, "events.csv"), artifacts.chain_events(chain))
    doc = chain_report(chain, cfg.K)
    _emit(doc, _path(cfg, args.report, "chain.json"))
    print(_render_chain(doc))
    return EXIT_OK


def _cmd_baseline(args) -> int:
    cfg = _config(args)
    seed = resolve_seed(cfg.seed)
    pipe = build_pipeline(cfg)
    hhl = pipe.hhl()
    base = classical_baseline(hhl, pipe.grammar, cfg.K, make_rng(seed, "baseline"), cfg.n, pipe.pairs)
    coh = sample_block(pipe.joint(), make_rng(seed, "generate"), cfg.n, pipe.pairs)
    marg = np.bincount(base.samples.pair_index, minlength=len(pipe.pairs)) / cfg.n
    per_pair = joint_distribution_per_pair(hhl, pipe.chord_vectors())
    doc = {"type": "baseline", "seed": seed, "K": cfg.K, "n": cfg.n,
           "baseline": analysis.block_stats(base.samples).as_dict(),
           "coherent": analysis.block_stats(coh).as_dict(),
           "tv_baseline_marginal_vs_p_hhl": analysis.total_variation(marg, hhl.p_hhl),
           "tv_coherent_marginal_vs_p_hhl": analysis.total_variation(pipe.joint().melody_marginal, hhl.p_hhl),
           "tv_per_pair_marginal_vs_p_hhl": analysis.total_variation(per_pair.melody_marginal, hhl.p_hhl)}
    _emit(doc, _path(cfg, args.report, "baseline.json"))
    print(_render_baseline(doc))
    return EXIT_OK


def chain_from_events(events) -> ChainResult:
    """Rebuild block structure from note-event rows (block, position, midi, chord)."""
    by_block: dict[int, dict[int, artifacts.NoteEvent]] = {}
    for e in events:
        by_block.setdefault(e.block, {})[e.position] = e
    blocks, valid = [], []
    for k in sorted(by_block):
        ev = by_block[k]
        if set(ev) != {1, 2}:
            raise ConfigError(f"block {k} must have positions 1 and 2")
        blocks.append(BlockSample(NotePair(Note(ev[1].midi), Note(ev[2].midi), -1),
                                  chord(ev[1].chord_degree), chord(ev[2].chord_degree)))
        if k != min(by_block):
            valid.append(bool(ev[1].junction_valid))
    return ChainResult(blocks, [None] * len(blocks), valid, [], float("nan"))


def _cmd_validate(args) -> int:
    cfg = _config(args, n=5000)
    if args.events:
        chain = chain_from_events(artifacts.read_events(args.events))
        h = analysis.harmony_report(chain)
        doc = {"type": "validate", "source": str(args.events), "harmony": h.as_dict(),
               "chord_tone_compliance": analysis.chord_tone_compliance(chain)}
    else:
        seed = resolve_seed(cfg.seed)
        pipe = build_pipeline(cfg)
        s = sample_block(pipe.joint(), make_rng(seed, "validate"), cfg.n, pipe.pairs)
        doc = {"type": "validate", "source": "pipeline", "seed": seed, "n": cfg.n,
               "harmony": analysis.harmony_report(s).as_dict()}
    _emit(doc, _path(cfg, args.report, "validate.json"))
    print(_render_validate(doc))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    n_default = {"ablation": 100_000, "grammar_coverage": 50_000}.get(args.kind)
    cfg = _config(args, **({"n": n_default} if n_default else {}))
    rep = run_experiment(args.kind, cfg, cfg.seed)
    doc = {"type": "experiment", **rep.as_dict()}
    _emit(doc, _path(cfg, args.report, f"{args.kind}.json"))
    text = rep.to_text()
    if args.text:
        artifacts.write_text(args.text, text)
    print(text)
    return EXIT_OK


def _cmd_gatecost(args) -> int:
    rows = analysis.gate_cost_table(range(3, args.n_max + 1))
    doc = {"type": "gatecost", "rows": rows, "crossover": analysis.gate_cost_crossover()}
    if args.report:
        _emit(doc, args.report)
    print(_render_gatecost(doc))
    return EXIT_OK


# --- rendering stored artifacts ---

def _render_generate(d) -> str:
    st, an = d["stats"], d["analytic"]
    keys = ("kl_pair_vs_uniform", "v_to_i_rate", "tonic_ending_rate", "stepwise_rate", "nonzero_states")
    rows = [[k, st[k], an[k]] for k in keys] + [["chi2", st["chi2"], None]]
    top = [[t["pair"], f"{t['c1']}->{t['c2']}", t["freq"]] for t in st["top_sequences"]]
    return "\n".join([
        f"# generate K={d['K']} n={d['n']} seed={d['seed']}",
        artifacts.format_table(["metric", "sampled", "analytic"], rows),
        f"joint_ps_weight: {d['joint_ps_weight']:.6g}   GOF p-value: {d['gof']['p_value']:.4g}",
        artifacts.format_table(["pair", "chords", "freq"], top),
    ])


def _render_chain(d) -> str:
    rows = [[k + 1, b, d["per_block_ps"][k] if d["per_block_ps"] else None,
             "" if k == 0 else str(d["junction_valid"][k - 1])] for k, b in enumerate(d["blocks"])]
    return "\n".join([
        f"# chain K={d.get('K')} variant={d.get('variant')} seed={d.get('seed')}",
        artifacts.format_table(["block", "events", "ps", "junction_valid"], rows, ".3g"),
        f"compound_ps: {d['compound_ps']:.4g}   chord-tone compliance: {d['chord_tone_compliance']:.3f}",
    ])


def _render_baseline(d) -> str:
    keys = ("kl_pair_vs_uniform", "chi2", "v_to_i_rate", "tonic_ending_rate", "stepwise_rate", "nonzero_states")
    rows = [[k, d["coherent"][k], d["baseline"][k]] for k in keys]
    return "\n".join([
        f"# coherent vs classical baseline, K={d['K']} n={d['n']}",
        artifacts.format_table(["metric", "coherent", "baseline"], rows),
        f"TV(baseline marginal, p_hhl): {d['tv_baseline_marginal_vs_p_hhl']:.4g}",
        f"TV(coherent marginal, p_hhl): {d['tv_coherent_marginal_vs_p_hhl']:.4g}",
    ])


def _render_validate(d) -> str:
    h = d["harmony"]
    rows = [[k, h[k]] for k in ("chord_tone_rate_n1", "chord_tone_rate_n2", "both_ct_rate",
                                "leap_nct_rate", "strong_rate", "strong_or_ok_rate",
                                "tendency_resolution_rate")]
    rows += [[f"rating:{k}", v] for k, v in h["progression_ratings"].items()]
    return "# harmony report\n" + artifacts.format_table(["metric", "value"], rows)


def _render_gatecost(d) -> str:
    c = d["crossover"]
    rows = [[r["n_chord"], r["vocab"], r["fourier"], r["lookup"]] for r in d["rows"]]
    return "\n".join([
        "# oracle gate cost per note pair",
        artifacts.format_table(["n_chord", "C_vocab", "fourier", "lookup"], rows),
        f"model crossover: n_chord={c['model_n_chord']:.3f} (C_vocab ~ {c['model_vocab']:.0f}); "
        f"reported crossover C_vocab ~ {c['reported_vocab']}",
    ])


def _render_matrix(d) -> str:
    rows = [[k, d[k]] for k in ("dim_active", "dim_padded", "shift_applied", "lambda_min",
                                "lambda_max", "kappa", "stable_rank")]
    return f"# matrix ({d['scheme']})\n" + artifacts.format_table(["quantity", "value"], rows)


def _render_solve(d) -> str:
    rows = [[t["pair"], t["p"]] for t in d["top"]]
    shares = [[k, v] for k, v in d["interval_shares"].items()]
    return "\n".join([f"# solve mode={d['mode']} ps_weight={d['ps_weight']:.6g}",
                      artifacts.format_table(["pair", "p"], rows),
                      artifacts.format_table(["interval", "share"], shares)])


_RENDER = {
    "matrix": _render_matrix, "solve": _render_solve, "generate": _render_generate,
    "chain": _render_chain, "baseline": _render_baseline, "validate": _render_validate,
    "gatecost": _render_gatecost,
    "experiment": lambda d: ExperimentReport.from_dict(d).to_text(),
}


def _cmd_report(args) -> int:
    parts = []
    for path in args.inputs:
        d = artifacts.read_json(path)
        kind = d.get("type") if isinstance(d, dict) else None
        if kind not in _RENDER:
            raise ConfigError(f"{path}: not a qharmony artifact")
        parts.append(_RENDER[kind](d))
    text = "\n\n".join(parts)
    if args.text:
        artifacts.write_text(args.text, text)
    else:
        print(text)
    return EXIT_OK


_COMMANDS = {
    "matrix": _cmd_matrix, "solve": _cmd_solve, "generate": _cmd_generate, "chain": _cmd_chain,
    "baseline": _cmd_baseline, "validate": _cmd_validate, "sweep": _cmd_sweep,
    "gatecost": _cmd_gatecost, "report": _cmd_report,
}


def run_command(argv) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"qharmony: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"qharmony: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
