from __future__ import annotations

import json

import numpy as np
import pytest
from scipy.stats import mannwhitneyu

from qubo_approx.embedding import InstanceFamily, chimera
from qubo_approx.errors import ConfigError, RefusalError
from qubo_approx.harness import (
    RESULT_COLUMNS,
    ExperimentConfig,
    compare_strategies,
    embed_curve,
    load_config,
    read_config,
    run_experiment,
    sample_ratios,
    sweep_effort,
)
from qubo_approx.problems import ProblemKind, get_problem
from qubo_approx.pruning import PruneKind, PruneStrategy

SMALL = {
    "name": "ec-small",
    "problem": "exact-cover",
    "size": 8,
    "granularity": 0.25,
    "n_runs": 4,
    "sweeps": 20,
    "chimera": "8x8x4",
    "embed_attempts": 3,
    "embed_curve": False,
    "master_seed": 3,
}


def _cfg(**overrides) -> ExperimentConfig:
    return load_config({**SMALL, **overrides})


# ---------------------------
# Configuration
# ---------------------------
def test_resolved_config_fills_every_seed():
    cfg = _cfg()
    for name in ("instance_seed", "sampler_seed", "baseline_seed", "embedding_seed"):
        assert isinstance(getattr(cfg, name), int)
    assert cfg.strategy_seed is None
    assert cfg.resolved() == cfg


def test_master_seed_drives_the_derived_seeds():
    assert _cfg() == _cfg()
    assert _cfg(master_seed=4).sampler_seed != _cfg().sampler_seed
    assert _cfg(sampler_seed=17).sampler_seed == 17


def test_random_strategy_seed_suffix():
    cfg = _cfg(strategy="random:9")
    assert cfg.strategy == "random" and cfg.strategy_seed == 9
    assert cfg.prune_strategy() == PruneStrategy(PruneKind.RANDOM, 9)
    derived = _cfg(strategy="random")
    assert derived.prune_strategy().label == f"random:{derived.strategy_seed}"


def test_defaults_come_from_settings(settings_env):
    settings_env(QUBO_RUNS="7", QUBO_SWEEPS="33", QUBO_CHIMERA="2x2x4")
    cfg = load_config({"problem": "max-cut", "size": 5})
    assert (cfg.n_runs, cfg.sweeps, cfg.chimera, cfg.granularity) == (7, 33, "2x2x4", 0.05)
    assert load_config({"problem": "agap", "size": 3}).n_runs == 200


@pytest.mark.parametrize(
    "overrides",
    [
        {"strategy": "largest"},
        {"strategy": "fraction:3"},
        {"chimera": "4x4"},
        {"size": 0},
        {"size": None},
        {"problem": "knapsack"},
        {"colour": "blue"},
    ],
)
def test_invalid_configs_are_config_errors(overrides):
    with pytest.raises(ConfigError):
        _cfg(**overrides)


def test_embed_curve_is_on_by_default():
    cfg = load_config({"problem": "max-cut", "size": 5})
    assert cfg.embed is True and cfg.embed_curve is True
    assert _cfg().embed_curve is False


def test_read_config_accepts_written_and_bare_configs(tmp_path):
    cfg = _cfg()
    written = tmp_path / "ec.config.json"
    written.write_text(json.dumps({"config": cfg.provenance(), "strategies": ["fraction"]}), encoding="utf-8")
    assert read_config(written) == (cfg, {"strategies": ["fraction"]})
    bare = tmp_path / "bare.json"
    bare.write_text(json.dumps(SMALL), encoding="utf-8")
    assert read_config(bare) == (cfg, {})


@pytest.mark.parametrize("text", ["{", "[1, 2]", "{\"config\": 3}"])
def test_read_config_rejects_malformed_files(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        read_config(path)
    with pytest.raises(ConfigError):
        read_config(tmp_path / "missing.json")


def test_provenance_is_json_ready():
    prov = _cfg().provenance()
    assert prov["problem"] == "exact-cover"
    assert prov["ref_mode"] == "caption"
    assert prov["master_seed"] == 3


# ---------------------------
# Experiments
# ---------------------------
def test_run_experiment_rows():
    rows = run_experiment(_cfg())
    assert [r.p for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert len({r.baseline_ratio for r in rows}) == 1
    assert all(r.strategy == "fraction" for r in rows)
    assert [r.deleted for r in rows] == sorted(r.deleted for r in rows)
    assert rows[0].deleted == 0
    # exact cover at p = 1 has no couplings left
    assert rows[-1].physical_qubits == 8
    assert rows[0].physical_qubits >= 8
    assert all(r.valid_fraction == 1.0 for r in rows)
    assert all(r.embeddable_ratio is None for r in rows)
    assert all(r.best_ratio <= r.mean_ratio for r in rows)


def test_default_granularity_gives_21_rows(settings_env):
    settings_env(QUBO_GRANULARITY="0.05")
    rows = run_experiment(_cfg(granularity=None, embed=False, size=5, n_runs=2, sweeps=5))
    assert len(rows) == 21
    assert all(r.physical_qubits is None for r in rows)
    assert len({r.baseline_ratio for r in rows}) == 1


def test_run_experiment_is_reproducible():
    assert run_experiment(_cfg(embed=False)) == run_experiment(_cfg(embed=False))


def test_max_cut_is_scored_against_the_optimum():
    rows = run_experiment(_cfg(problem="max-cut", size=6, embed=False))
    for r in rows:
        assert 0 <= r.mean_ratio <= r.best_ratio <= 1.0
        assert r.baseline_ratio <= 1.0


def test_zero_optimum_cannot_be_a_reference(tmp_path):
    path = tmp_path / "split.txt"
    path.write_text("3 1 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        run_experiment(_cfg(problem="number-partitioning", size=None, instance=str(path), ref_mode="optimum"))


def test_oversized_optimum_search_is_refused():
    with pytest.raises(RefusalError):
        run_experiment(_cfg(problem="max-cut", size=40, embed=False))


def test_embed_curve_column():
    rows = run_experiment(_cfg(embed=False, embed_curve=True, chimera="2x2x4", granularity=0.5, embed_attempts=2))
    assert rows[0].embeddable_ratio == 1.0
    assert all(r.embeddable_ratio is not None and r.embeddable_ratio > 0 for r in rows)


def test_compare_strategies_shares_the_endpoints():
    tables = compare_strategies(_cfg(embed=False), ["fraction", "threshold", "random"])
    labels = list(tables)
    assert labels[:2] == ["fraction", "threshold"]
    assert labels[2].startswith("random:")
    firsts = [t[0] for t in tables.values()]
    lasts = [t[-1] for t in tables.values()]
    for rows in (firsts, lasts):
        stripped = {tuple(getattr(r, c) for c in RESULT_COLUMNS if c != "strategy") for r in rows}
        assert len(stripped) == 1


def test_compare_strategies_accepts_seeded_randoms():
    tables = compare_strategies(_cfg(embed=False, granularity=0.5), ["random:1", "random:2"])
    assert list(tables) == ["random:1", "random:2"]


def test_compare_and_sweep_need_entries():
    with pytest.raises(ConfigError):
        compare_strategies(_cfg(embed=False), [])
    with pytest.raises(ConfigError):
        compare_strategies(_cfg(embed=False), ["largest"])
    with pytest.raises(ConfigError):
        sweep_effort(_cfg(embed=False), [])
    with pytest.raises(ConfigError):
        sweep_effort(_cfg(embed=False), [0])


def test_sweep_effort_tables():
    tables = sweep_effort(_cfg(embed=False, granularity=0.5), [5, 10])
    assert list(tables) == [5, 10]
    assert all(len(rows) == 3 for rows in tables.values())
    assert tables[5][0].baseline_ratio == tables[10][0].baseline_ratio


def test_embed_curve_rows():
    family = InstanceFamily(ProblemKind.EXACT_COVER, seed=0)
    rows = embed_curve(family, PruneStrategy(PruneKind.FRACTION), chimera(2, 2, 4), attempts=2, granularity=0.5)
    assert [r.p for r in rows] == [0.0, 0.5, 1.0]
    assert rows[0].ratio == 1.0
    assert rows[-1].size == 32


# ---------------------------
# Per-run ratios and desk-scale trends
# ---------------------------
def _desk(problem: str, size: int, **overrides) -> ExperimentConfig:
    base = {
        "problem": problem,
        "size": size,
        "granularity": 0.05,
        "n_runs": 100,
        "sweeps": 1000,
        "embed": False,
        "embed_curve": False,
        "master_seed": 0,
    }
    return load_config({**base, **overrides})


def _losses(cfg: ExperimentConfig, p: float) -> np.ndarray:
    ratios = sample_ratios(cfg, [p])[p]
    return -ratios if get_problem(cfg.problem).spec.higher_is_better else ratios


def test_sample_ratios_agree_with_the_table():
    cfg = _cfg(embed=False, granularity=0.5)
    ratios = sample_ratios(cfg)
    rows = run_experiment(cfg)
    assert list(ratios) == [r.p for r in rows]
    for r in rows:
        assert len(ratios[r.p]) == cfg.n_runs
        assert ratios[r.p].mean() == pytest.approx(r.mean_ratio)
    assert list(sample_ratios(cfg, [0.5])) == [0.5]


@pytest.mark.slow
def test_exact_cover_error_holds_then_degrades():
    # |V| = 20 subsets over |U| = 12 elements
    ratios = sample_ratios(_desk("exact-cover", 20), [0.0, 0.5, 0.95])
    start, middle, late = (float(ratios[p].mean()) for p in (0.0, 0.5, 0.95))
    assert late > start
    assert late >= 2 * start
    assert middle - start <= 0.5 * (late - start)


@pytest.mark.slow
@pytest.mark.parametrize(
    ("problem", "size", "strategy"), [("exact-cover", 20, "fraction"), ("max-cut", 12, "threshold")]
)
def test_strategy_is_no_worse_than_random_at_half_pruning(problem, size, strategy):
    ours = _losses(_desk(problem, size, strategy=strategy), 0.5)
    random = _losses(_desk(problem, size, strategy="random"), 0.5)
    assert mannwhitneyu(ours, random, alternative="greater").pvalue > 0.05


@pytest.mark.slow
def test_more_sweeps_never_lose_max_cut_quality():
    ps = [0.0, 0.1, 0.2, 0.3]
    cfg = _desk("max-cut", 12, granularity=0.1)
    short = sample_ratios(cfg.model_copy(update={"sweeps": 1000}), ps)
    long = sample_ratios(cfg.model_copy(update={"sweeps": 4000}), ps)
    for p in ps:
        assert mannwhitneyu(long[p], short[p], alternative="less").pvalue > 0.05
