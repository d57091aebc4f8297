from __future__ import annotations

import json
import xml.etree.ElementTree as ET

import pytest

from qubo_approx.errors import InstanceError, RefusalError
from qubo_approx.harness import RESULT_COLUMNS, EmbedCurveRow, ResultRow, load_config, run_experiment
from qubo_approx.reporting import NA, emit_config, emit_csv, emit_embed_plot, emit_plot, read_csv, write_tables


def _row(p: float, **overrides) -> ResultRow:
    values = dict(
        p=p,
        strategy="fraction",
        mean_ratio=0.5 + p / 3,
        std_ratio=0.1,
        best_ratio=0.25,
        valid_fraction=1.0,
        baseline_ratio=0.9,
        embeddable_ratio=None,
        physical_qubits=12,
        deleted=int(10 * p),
    )
    values.update(overrides)
    return ResultRow(**values)


ROWS = [_row(0.0), _row(0.5, physical_qubits=None), _row(1.0, embeddable_ratio=1.5)]


def _cfg(tmp_path):
    return load_config(
        {
            "name": "np-small",
            "problem": "number-partitioning",
            "size": 6,
            "granularity": 0.5,
            "n_runs": 3,
            "sweeps": 10,
            "embed": False,
            "embed_curve": False,
            "master_seed": 1,
            "output_dir": str(tmp_path),
        }
    )


def test_csv_layout(tmp_path):
    path = emit_csv(ROWS, tmp_path / "out" / "rows.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(RESULT_COLUMNS)
    assert len(lines) == 4
    assert lines[2].split(",")[RESULT_COLUMNS.index("physical_qubits")] == NA
    assert lines[1].split(",")[RESULT_COLUMNS.index("mean_ratio")] == repr(0.5)


def test_csv_reads_back_equal(tmp_path):
    path = emit_csv(ROWS, tmp_path / "rows.csv")
    assert read_csv(path) == ROWS


def test_embed_curve_csv(tmp_path):
    rows = [EmbedCurveRow(0.0, "fraction", 10, 1.0), EmbedCurveRow(1.0, "fraction", 0, None)]
    path = emit_csv(rows, tmp_path / "curve.csv")
    assert read_csv(path, EmbedCurveRow) == rows


def test_empty_tables_are_refused(tmp_path):
    with pytest.raises(RefusalError):
        emit_csv([], tmp_path / "empty.csv")
    with pytest.raises(RefusalError):
        emit_plot([], tmp_path / "empty.svg")
    with pytest.raises(RefusalError):
        emit_embed_plot([], tmp_path / "empty.svg")


def test_read_csv_rejects_foreign_files(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(InstanceError):
        read_csv(path)
    with pytest.raises(InstanceError):
        read_csv(tmp_path / "missing.csv")
    broken = emit_csv(ROWS, tmp_path / "broken.csv")
    broken.write_text(broken.read_text(encoding="utf-8").replace("0.1", "abc", 1), encoding="utf-8")
    with pytest.raises(InstanceError):
        read_csv(broken)


def test_config_json_records_every_seed(tmp_path):
    cfg = _cfg(tmp_path)
    doc = json.loads(emit_config(cfg, tmp_path / "cfg.json", {"strategies": ["fraction"]}).read_text())
    assert doc["strategies"] == ["fraction"]
    for key in ("master_seed", "instance_seed", "sampler_seed", "baseline_seed", "embedding_seed"):
        assert isinstance(doc["config"][key], int)


def test_plot_is_valid_svg_with_provenance(tmp_path):
    cfg = _cfg(tmp_path)
    path = emit_plot({"fraction": ROWS, "threshold": ROWS}, tmp_path / "fig.svg", cfg, title="demo")
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    text = path.read_text(encoding="utf-8")
    assert "sampler_seed" in text
    assert "<dc:date>" not in text


def test_embed_plot(tmp_path):
    rows = [EmbedCurveRow(0.0, "fraction", 10, 1.0), EmbedCurveRow(0.5, "fraction", 14, 1.4)]
    path = emit_embed_plot(rows, tmp_path / "curve.svg", title="curve")
    assert ET.parse(path).getroot().tag.endswith("svg")


def test_write_tables_single_and_multiple(tmp_path):
    cfg = _cfg(tmp_path)
    single = write_tables("one", {"fraction": ROWS}, cfg, tmp_path)
    assert single["fraction"].name == "one.csv"
    assert single["config"].name == "one.config.json"
    assert single["figure"].name == "one.svg"

    many = write_tables("many", {"fraction": ROWS, "random:7": ROWS}, cfg, tmp_path)
    assert many["fraction"].name == "many-fraction.csv"
    assert many["random:7"].name == "many-random-7.csv"


def test_reruns_are_byte_identical(tmp_path):
    cfg = _cfg(tmp_path)
    outputs = []
    for attempt in ("a", "b"):
        rows = run_experiment(cfg)
        written = write_tables(cfg.name, {rows[0].strategy: rows}, cfg, tmp_path / attempt)
        outputs.append({k: p.read_bytes() for k, p in written.items()})
    assert outputs[0] == outputs[1]
