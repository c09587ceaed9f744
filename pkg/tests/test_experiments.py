import pytest

from qharmony.config import RunConfig
from qharmony.errors import ConfigError
from qharmony.experiments import ExperimentReport, run_experiment


def test_grammar_coverage():
    rep = run_experiment("grammar_coverage", RunConfig(n=5000), seed=1)
    assert len(rep.rows) == 7
    assert all(r["valid_pct"] == 100.0 for r in rep.rows)
    assert rep.summary["mean_valid_openings"] == pytest.approx(16 / 7)


def test_noise_sweep_monotone():
    rep = run_experiment("noise_sweep", RunConfig(n=20000), seed=2)
    kl = [r["kl_pair"] for r in rep.rows]
    assert all(a >= b for a, b in zip(kl, kl[1:]))
    assert rep.rows[-1]["kl_pair"] == 0.0
    assert rep.rows[-1]["ps"] == 0.5


def test_stable_rank_sweep_small_grid():
    rep = run_experiment("stable_rank_sweep", RunConfig(sr_grid=(5, 8, 12)), seed=0)
    ratios = [r["sr_over_N"] for r in rep.rows]
    assert [r["N"] for r in rep.rows] == [25, 64, 144]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))


def test_ablation_ordering():
    rep = run_experiment("ablation", RunConfig(n=100_000), seed=5)
    f = {r["variant"]: r["factor"] for r in rep.rows}
    assert f["full"] > f["melody_only"] > f["harmony_only"] > f["unconditioned"] == 1.0


def test_k_sweep_logs_trial_seeds():
    rep = run_experiment("k_sweep", RunConfig(k_grid=(4, 8), trials=3), seed=None)
    assert [r["K"] for r in rep.rows] == [4, 8]
    assert all(len(v) == 3 for v in rep.summary["trial_seeds"].values())
    assert all(r["junction_valid_rate"] == 1.0 for r in rep.rows)


def test_k_sweep_seeded_is_deterministic():
    cfg = RunConfig(k_grid=(6,), trials=4)
    assert run_experiment("k_sweep", cfg, 11).rows == run_experiment("k_sweep", cfg, 11).rows


def test_report_round_trip_and_text():
    rep = run_experiment("grammar_coverage", RunConfig(n=200), seed=1)
    again = ExperimentReport.from_dict(rep.as_dict())
    assert again.to_text() == rep.to_text()
    assert "vii°" in rep.to_text()


def test_unknown_kind():
    with pytest.raises(ConfigError):
        run_experiment("mystery")
