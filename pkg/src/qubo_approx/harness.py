"""Experiment pipeline: instance -> prune schedule -> samplers -> quality and footprint rows."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from qubo_approx.config import get_settings, parse_chimera
from qubo_approx.embedding import (
    ChimeraGraph,
    InstanceFamily,
    chimera,
    embed_qubo,
    largest_embeddable,
)
from qubo_approx.errors import ConfigError, ParameterError
from qubo_approx.problems import (
    BaseProblem,
    ProblemInstance,
    ProblemKind,
    RefMode,
    get_problem,
)
from qubo_approx.pruning import (
    PruneKind,
    PruneSchedule,
    PruneStep,
    PruneStrategy,
    make_schedule,
    schedule_fractions,
)
from qubo_approx.qubo import QuboMatrix
from qubo_approx.sampler import SaParams, random_baseline, sample_many

logger = logging.getLogger(__name__)

_SEED_FIELDS = ("instance_seed", "strategy_seed", "sampler_seed", "baseline_seed", "embedding_seed")


class ExperimentConfig(BaseModel):
    """Everything needed to reproduce one experiment; ``resolved()`` fills the derived values."""

    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    name: str = "experiment"
    problem: ProblemKind
    instance: Optional[str] = None
    size: Optional[int] = Field(default=None, ge=1)

    strategy: str = "fraction"
    granularity: Optional[float] = None

    n_runs: Optional[int] = Field(default=None, ge=1)
    sweeps: Optional[int] = Field(default=None, ge=1)
    beta_start: Optional[float] = None
    beta_end: Optional[float] = None
    restarts: int = Field(default=1, ge=1)
    ref_mode: RefMode = RefMode.CAPTION

    chimera: Optional[str] = None
    embed: bool = True
    embed_curve: bool = True
    embed_attempts: Optional[int] = Field(default=None, ge=1)

    output_dir: Optional[str] = None
    master_seed: Optional[int] = Field(default=None, ge=0)
    instance_seed: Optional[int] = Field(default=None, ge=0)
    strategy_seed: Optional[int] = Field(default=None, ge=0)
    sampler_seed: Optional[int] = Field(default=None, ge=0)
    baseline_seed: Optional[int] = Field(default=None, ge=0)
    embedding_seed: Optional[int] = Field(default=None, ge=0)

    @field_validator("strategy")
    @classmethod
    def _known_strategy(cls, v: str) -> str:
        name, _, tail = v.strip().lower().partition(":")
        if name not in {k.value for k in PruneKind}:
            raise ValueError(f"unknown pruning strategy {v!r}")
        if tail and (name != PruneKind.RANDOM.value or not tail.isdigit()):
            raise ValueError(f"only the random strategy takes a seed suffix, got {v!r}")
        return v.strip().lower()

    @field_validator("chimera")
    @classmethod
    def _chimera_shape(cls, v: Optional[str]) -> Optional[str]:
        if v is not None:
            rows, cols, shore = parse_chimera(v)
            return f"{rows}x{cols}x{shore}"
        return v

    @model_validator(mode="after")
    def _has_instance(self) -> ExperimentConfig:
        if self.instance is None and self.size is None:
            raise ValueError("either 'instance' (a file) or 'size' (generated instance) is required")
        return self

    # ---------------------------
    # Derived values
    # ---------------------------
    def resolved(self) -> ExperimentConfig:
        """Copy with every default and seed filled in, so the serialised config is complete."""
        settings = get_settings()
        master = settings.master_seed if self.master_seed is None else self.master_seed
        words = np.random.SeedSequence(master).generate_state(len(_SEED_FIELDS))
        update: dict[str, Any] = {"master_seed": master}
        for name, word in zip(_SEED_FIELDS, words):
            if getattr(self, name) is None:
                update[name] = int(word) & 0x7FFFFFFF
        name, _, tail = self.strategy.partition(":")
        if tail:
            update["strategy_seed"] = int(tail)
            update["strategy"] = name
        if name != PruneKind.RANDOM.value:
            update["strategy_seed"] = None
        if self.n_runs is None:
            update["n_runs"] = get_problem(self.problem).default_runs
        if self.sweeps is None:
            update["sweeps"] = settings.sweeps
        if self.granularity is None:
            update["granularity"] = settings.granularity
        if self.chimera is None:
            update["chimera"] = settings.chimera_raw
        if self.embed_attempts is None:
            update["embed_attempts"] = settings.embed_attempts
        if self.output_dir is None:
            update["output_dir"] = settings.output_dir
        return self.model_copy(update=update)

    def prune_strategy(self) -> PruneStrategy:
        """Strategy of a resolved config (random strategies need their seed filled in)."""
        try:
            return PruneStrategy.parse(self.strategy, self.strategy_seed)
        except ParameterError as e:
            raise ConfigError(str(e)) from e

    def sa_params(self) -> SaParams:
        return SaParams(
            sweeps=int(self.sweeps or get_settings().sweeps),
            beta_start=self.beta_start,
            beta_end=self.beta_end,
            restarts=self.restarts,
            seed=int(self.sampler_seed or 0),
        )

    def chimera_graph(self) -> ChimeraGraph:
        return chimera(*parse_chimera(self.chimera or get_settings().chimera_raw))

    def provenance(self) -> dict[str, Any]:
        return self.resolved().model_dump(mode="json")


def load_config(data: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a mapping into a resolved config; schema problems become ConfigError."""
    try:
        return ExperimentConfig.model_validate(dict(data)).resolved()
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment configuration: {e}") from e
    except ParameterError as e:
        raise ConfigError(str(e)) from e


def read_config(path: str | Path) -> tuple[ExperimentConfig, dict[str, Any]]:
    """Load a written ``<name>.config.json``: the resolved config plus its extra keys."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object")
    body = doc.get("config", doc)
    if not isinstance(body, dict):
        raise ConfigError(f"'config' in {path} must be a JSON object")
    extra = {k: v for k, v in doc.items() if k != "config"} if "config" in doc else {}
    return load_config(body), extra


@dataclass(frozen=True)
class ResultRow:
    p: float
    strategy: str
    mean_ratio: float
    std_ratio: float
    best_ratio: float
    valid_fraction: float
    baseline_ratio: float
    embeddable_ratio: Optional[float]
    physical_qubits: Optional[int]
    deleted: int


RESULT_COLUMNS: tuple[str, ...] = tuple(f.name for f in fields(ResultRow))


@dataclass(frozen=True)
class EmbedCurveRow:
    p: float
    strategy: str
    size: int
    ratio: Optional[float]


EMBED_CURVE_COLUMNS: tuple[str, ...] = tuple(f.name for f in fields(EmbedCurveRow))


# ---------------------------
# Building blocks
# ---------------------------
def load_problem_instance(cfg: ExperimentConfig) -> tuple[BaseProblem, ProblemInstance, QuboMatrix]:
    problem = get_problem(cfg.problem)
    if cfg.instance is not None:
        inst, q = problem.load(Path(cfg.instance))
    else:
        inst, q = problem.generate(int(cfg.size), int(cfg.instance_seed or 0))
    return problem, inst, q


class _Scorer:
    """Scores assignments on the original (unpruned) instance."""

    def __init__(self, problem: BaseProblem, inst: ProblemInstance, ref_mode: RefMode) -> None:
        self.problem = problem
        self.inst = inst
        self.ref_mode = ref_mode
        self.optimum: float | None = None
        if ref_mode is RefMode.OPTIMUM or problem.spec.optimum_reference:
            self.optimum = problem.exhaustive_optimum(inst)
            if not self.optimum > 0:
                raise ConfigError(
                    f"{problem.spec.kind.value} optimum is {self.optimum}; it cannot serve as a reference value"
                )
            logger.info("Exhaustive optimum for %s: %s", problem.spec.kind.value, self.optimum)

    def ratios(self, assignments: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ratios, valid = [], []
        for a in assignments:
            sol = self.problem.decode(self.inst, a)
            qr = self.problem.quality(self.inst, sol, self.ref_mode, self.optimum)
            ratios.append(qr.ratio)
            valid.append(qr.valid)
        return np.asarray(ratios, dtype=np.float64), np.asarray(valid, dtype=bool)


def _baseline_ratio(scorer: _Scorer, cfg: ExperimentConfig) -> float:
    baseline = random_baseline(scorer.inst.n_variables, int(cfg.n_runs), int(cfg.baseline_seed or 0))
    ratios, _ = scorer.ratios(baseline.assignments())
    return float(ratios.mean())


def _sampled_steps(
    cfg: ExperimentConfig, scorer: _Scorer, schedule: PruneSchedule, ps: Iterable[float] | None = None
) -> Iterator[tuple[PruneStep, np.ndarray, np.ndarray]]:
    """Anneal every schedule step (or only those at ``ps``) and score the runs."""
    wanted = None if ps is None else {round(float(p), 10) for p in ps}
    params = cfg.sa_params()
    for step in schedule:
        if wanted is not None and step.p not in wanted:
            continue
        samples = sample_many(step.qubo, int(cfg.n_runs), params)
        ratios, valid = scorer.ratios(samples.assignments())
        yield step, ratios, valid


# ---------------------------
# Operations
# ---------------------------
def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    cfg = cfg.resolved()
    strategy = cfg.prune_strategy()
    problem, inst, q = load_problem_instance(cfg)
    scorer = _Scorer(problem, inst, cfg.ref_mode)
    baseline = _baseline_ratio(scorer, cfg)
    schedule = make_schedule(q, strategy, cfg.granularity)
    higher = problem.spec.higher_is_better

    embed_on = cfg.embed
    gc = cfg.chimera_graph() if (cfg.embed or cfg.embed_curve) else None
    if embed_on and gc is not None:
        emb, _ = embed_qubo(q, gc, int(cfg.embedding_seed or 0), cfg.embed_attempts)
        if emb is None:
            logger.warning("Unpruned QUBO does not embed on chimera %s; physical_qubits left empty", gc.label)
            embed_on = False

    family = InstanceFamily(cfg.problem, int(cfg.instance_seed or 0))
    embed_seed = int(cfg.embedding_seed or 0)
    base_size = None
    if cfg.embed_curve and gc is not None:
        base_size = largest_embeddable(family, strategy, 0.0, gc, embed_seed, cfg.embed_attempts)
        if not base_size:
            logger.warning(
                "No %s instance embeds on chimera %s; embeddable_ratio left empty", cfg.problem.value, gc.label
            )
    else:
        logger.info("Embeddable-size curve disabled; embeddable_ratio left empty")

    rows: list[ResultRow] = []
    for step, ratios, valid in _sampled_steps(cfg, scorer, schedule):
        physical = None
        if embed_on and gc is not None:
            _, metrics = embed_qubo(step.qubo, gc, embed_seed, cfg.embed_attempts)
            physical = metrics.physical_qubits if metrics is not None else None

        embeddable = None
        if base_size is not None and gc is not None:
            if step.p == 0:
                embeddable = 1.0 if base_size else None
            elif base_size:
                size = largest_embeddable(family, strategy, step.p, gc, embed_seed, cfg.embed_attempts)
                embeddable = size / base_size

        rows.append(
            ResultRow(
                p=step.p,
                strategy=strategy.label,
                mean_ratio=float(ratios.mean()),
                std_ratio=float(ratios.std()),
                best_ratio=float(ratios.max() if higher else ratios.min()),
                valid_fraction=float(valid.mean()),
                baseline_ratio=baseline,
                embeddable_ratio=embeddable,
                physical_qubits=physical,
                deleted=step.deleted,
            )
        )
        logger.info(
            "%s p=%.2f %s: mean ratio %.4f, valid %.2f, deleted %d",
            cfg.problem.value, step.p, strategy.label, rows[-1].mean_ratio, rows[-1].valid_fraction, step.deleted,
        )
    return rows


def sample_ratios(cfg: ExperimentConfig, ps: Iterable[float] | None = None) -> dict[float, np.ndarray]:
    """Per-run quality ratios of the schedule steps at ``ps`` (every step when omitted).

    Run r of every step is annealed with seed ``sampler_seed + r``, as in `run_experiment`.
    """
    cfg = cfg.resolved()
    problem, inst, q = load_problem_instance(cfg)
    scorer = _Scorer(problem, inst, cfg.ref_mode)
    schedule = make_schedule(q, cfg.prune_strategy(), cfg.granularity)
    return {step.p: ratios for step, ratios, _ in _sampled_steps(cfg, scorer, schedule, ps)}


def compare_strategies(cfg: ExperimentConfig, strategies: Iterable[str]) -> dict[str, list[ResultRow]]:
    """One table per strategy; instance, sampler and baseline seeds are shared."""
    base = cfg.resolved()
    tables: dict[str, list[ResultRow]] = {}
    for name in strategies:
        try:
            variant = ExperimentConfig.model_validate({**base.model_dump(), "strategy": name})
        except ValidationError as e:
            raise ConfigError(f"Invalid strategy {name!r}: {e}") from e
        resolved = variant.resolved()
        tables[resolved.prune_strategy().label] = run_experiment(resolved)
    if not tables:
        raise ConfigError("compare needs at least one strategy")
    return tables


def sweep_effort(cfg: ExperimentConfig, sweeps_list: Iterable[int]) -> dict[int, list[ResultRow]]:
    """One table per sweep count, everything else held fixed."""
    base = cfg.resolved()
    tables: dict[int, list[ResultRow]] = {}
    for sweeps in sweeps_list:
        if int(sweeps) < 1:
            raise ConfigError(f"sweep counts must be >= 1, got {sweeps}")
        tables[int(sweeps)] = run_experiment(base.model_copy(update={"sweeps": int(sweeps)}))
    if not tables:
        raise ConfigError("sweep-effort needs at least one sweep count")
    return tables


def embed_curve(
    family: InstanceFamily,
    strategy: PruneStrategy,
    gc: ChimeraGraph,
    seed: int = 0,
    attempts: int | None = None,
    granularity: float | None = None,
) -> list[EmbedCurveRow]:
    """Largest embeddable size and its ratio to the unpruned size for every schedule fraction."""
    rows = []
    base = largest_embeddable(family, strategy, 0.0, gc, seed, attempts)
    for p in schedule_fractions(granularity):
        size = base if p == 0 else largest_embeddable(family, strategy, p, gc, seed, attempts)
        rows.append(EmbedCurveRow(p=p, strategy=strategy.label, size=size, ratio=(size / base) if base else None))
    return rows


__all__ = [
    "EMBED_CURVE_COLUMNS",
    "EmbedCurveRow",
    "ExperimentConfig",
    "RESULT_COLUMNS",
    "ResultRow",
    "compare_strategies",
    "embed_curve",
    "load_config",
    "load_problem_instance",
    "read_config",
    "run_experiment",
    "sample_ratios",
    "sweep_effort",
]
