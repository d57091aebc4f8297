"""Result files: one CSV per table, a JSON config next to it, and an SVG figure."""

from __future__ import annotations

import csv
import json
import logging
import math
import re
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Mapping, Sequence, Type, TypeVar

from qubo_approx.errors import InstanceError, RefusalError
from qubo_approx.harness import EmbedCurveRow, ExperimentConfig, ResultRow

logger = logging.getLogger(__name__)

NA = "NA"

RowT = TypeVar("RowT", ResultRow, EmbedCurveRow)
Tables = Mapping[str, Sequence[ResultRow]]


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", label).strip("-") or "table"


def _cell(value: Any) -> str:
    if value is None:
        return NA
    if isinstance(value, float):
        return NA if math.isnan(value) else repr(value)
    return str(value)


# ---------------------------
# CSV
# ---------------------------
def emit_csv(rows: Sequence[ResultRow | EmbedCurveRow], path: str | Path) -> Path:
    """Write rows in their dataclass field order; absent values are written as ``NA``."""
    if not rows:
        raise RefusalError(f"Refusing to write an empty table to {path}")
    path = Path(path)
    fieldnames = [f.name for f in fields(rows[0])]
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fieldnames, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(v) for k, v in asdict(row).items()})
    logger.info("Wrote %d rows to %s", len(rows), path)
    return path


def _convert(raw: str, annotation: str) -> Any:
    if raw == NA:
        return None
    if annotation.startswith("float") or annotation.startswith("Optional[float]"):
        return float(raw)
    if annotation.startswith("int") or annotation.startswith("Optional[int]"):
        return int(raw)
    return raw


def read_csv(path: str | Path, row_type: Type[RowT] = ResultRow) -> list[RowT]:  # type: ignore[assignment]
    """Inverse of :func:`emit_csv` for one row type."""
    path = Path(path)
    spec = {f.name: str(f.type) for f in fields(row_type)}
    try:
        with path.open("r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            header = list(reader.fieldnames or [])
            records = list(reader)
    except OSError as e:
        raise InstanceError(f"Cannot read results file {path}: {e}") from e
    if header != list(spec):
        raise InstanceError(f"{path} columns {header} do not match {list(spec)}")
    try:
        return [row_type(**{k: _convert(r[k], t) for k, t in spec.items()}) for r in records]
    except (TypeError, ValueError) as e:
        raise InstanceError(f"Malformed results file {path}: {e}") from e


def emit_config(cfg: ExperimentConfig, path: str | Path, extra: Mapping[str, Any] | None = None) -> Path:
    path = Path(path)
    payload = {"config": cfg.provenance(), **(dict(extra) if extra else {})}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# ---------------------------
# Figures
# ---------------------------
def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    # fixed ids and no timestamp keep repeated runs byte-identical
    matplotlib.rcParams.update({"svg.hashsalt": "qubo-approx", "font.family": "DejaVu Sans", "axes.unicode_minus": False})
    import matplotlib.pyplot as plt

    return plt


def _as_tables(rows: Tables | Sequence[ResultRow]) -> dict[str, list[ResultRow]]:
    if isinstance(rows, Mapping):
        return {str(k): list(v) for k, v in rows.items()}
    rows = list(rows)
    return {rows[0].strategy: rows} if rows else {}


def emit_plot(
    rows: Tables | Sequence[ResultRow],
    path: str | Path,
    config: ExperimentConfig | None = None,
    title: str | None = None,
) -> Path:
    """Quality ratio (left) and hardware footprint (right) against the pruned fraction p."""
    tables = _as_tables(rows)
    if not tables or not any(tables.values()):
        raise RefusalError(f"Refusing to plot an empty table to {path}")
    plt = _pyplot()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fig, (ax_q, ax_e) = plt.subplots(1, 2, figsize=(10, 3.8), constrained_layout=True)
    for label, table in tables.items():
        ps = [r.p for r in table]
        mean = [r.mean_ratio for r in table]
        std = [r.std_ratio for r in table]
        line, = ax_q.plot(ps, mean, marker="o", markersize=3, label=f"{label} mean")
        ax_q.fill_between(ps, [m - s for m, s in zip(mean, std)], [m + s for m, s in zip(mean, std)],
                          color=line.get_color(), alpha=0.15)
        ax_q.plot(ps, [r.best_ratio for r in table], linestyle="--", color=line.get_color(), label=f"{label} best")

        embeddable = [(r.p, r.embeddable_ratio) for r in table if r.embeddable_ratio is not None]
        if embeddable:
            ax_e.plot(*zip(*embeddable), marker="s", markersize=3, color=line.get_color(), label=f"{label} size ratio")
        qubits = [(r.p, r.physical_qubits) for r in table if r.physical_qubits is not None]
        if qubits and qubits[0][1]:
            ref = qubits[0][1]
            ax_e.plot([p for p, _ in qubits], [n / ref for _, n in qubits], linestyle=":", color=line.get_color(),
                      label=f"{label} qubits / unpruned")

    first = next(iter(tables.values()))
    ax_q.axhline(first[0].baseline_ratio, color="grey", linewidth=1, label="random baseline")
    ax_q.set_xlabel("Pruned fraction p")
    ax_q.set_ylabel("Quality ratio")
    ax_q.grid(True, alpha=0.3)
    ax_q.legend(loc="best", fontsize=7)

    ax_e.set_xlabel("Pruned fraction p")
    ax_e.set_ylabel("Relative to unpruned")
    ax_e.grid(True, alpha=0.3)
    if ax_e.lines:
        ax_e.legend(loc="best", fontsize=7)
    else:
        ax_e.text(0.5, 0.5, "no embedding data", ha="center", va="center", transform=ax_e.transAxes)

    if title:
        fig.suptitle(title)
    _save(fig, path, config)
    plt.close(fig)
    return path


def emit_embed_plot(rows: Sequence[EmbedCurveRow], path: str | Path, title: str | None = None) -> Path:
    if not rows:
        raise RefusalError(f"Refusing to plot an empty table to {path}")
    plt = _pyplot()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 3.8), constrained_layout=True)
    ax.plot([r.p for r in rows], [r.size for r in rows], marker="o", markersize=3, label=rows[0].strategy)
    ax.set_xlabel("Pruned fraction p")
    ax.set_ylabel("Largest embeddable size")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=7)
    if title:
        ax.set_title(title)
    _save(fig, path, None)
    plt.close(fig)
    return path


def _save(fig: Any, path: Path, config: ExperimentConfig | None) -> None:
    metadata: dict[str, Any] = {"Date": None, "Creator": "qubo-approx"}
    if config is not None:
        metadata["Description"] = json.dumps(config.provenance(), sort_keys=True)
    fig.savefig(path, format="svg", metadata=metadata)
    logger.info("Wrote figure %s", path)


# ---------------------------
# Bundles
# ---------------------------
def write_tables(
    name: str,
    tables: Tables,
    cfg: ExperimentConfig,
    out_dir: str | Path,
    extra: Mapping[str, Any] | None = None,
) -> dict[str, Path]:
    """``<name>.csv`` for a single table or ``<name>-<label>.csv`` per table, plus config and figure."""
    out = Path(out_dir)
    written: dict[str, Path] = {}
    if len(tables) == 1:
        label, rows = next(iter(tables.items()))
        written[label] = emit_csv(rows, out / f"{name}.csv")
    else:
        for label, rows in tables.items():
            written[label] = emit_csv(rows, out / f"{name}-{_slug(label)}.csv")
    written["config"] = emit_config(cfg, out / f"{name}.config.json", extra)
    written["figure"] = emit_plot(tables, out / f"{name}.svg", cfg, title=name)
    return written


__all__ = [
    "NA",
    "emit_config",
    "emit_csv",
    "emit_embed_plot",
    "emit_plot",
    "read_csv",
    "write_tables",
]
