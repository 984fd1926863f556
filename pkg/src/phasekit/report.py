"""Deterministic CSV / JSON report files and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass
class Results:
    experiment: str
    columns: list
    rows: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())


def format_value(v) -> str:
    """17 significant digits for floats; booleans and integers verbatim."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.17g}"
    if v is None:
        return ""
    return str(v)


def parse_value(text: str):
    if text in ("true", "false"):
        return text == "true"
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def to_csv(results: Results) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(results.columns)
    for row in results.rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def read_csv(path) -> tuple[list, list]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[parse_value(x) for x in row] for row in reader]


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def to_json(results: Results) -> str:
    payload = {
        "experiment": results.experiment,
        "columns": results.columns,
        "rows": [[_jsonable(v) for v in row] for row in results.rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def config_hash(config: dict) -> str:
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def emit_report(results: Results, out_dir, fmt: str = "csv", config: dict | None = None,
                wall_time: float | None = None, tolerances: dict | None = None) -> list[Path]:
    """Write ``<experiment>.<fmt>`` and ``manifest.json`` into ``out_dir``."""
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown report format {fmt!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        data = out / f"{results.experiment}.{fmt}"
        data.write_text(to_csv(results) if fmt == "csv" else to_json(results))
        manifest = {
            "experiment": results.experiment,
            "config": config or {},
            "config_hash": config_hash(config or {}),
            "tolerances": tolerances or {},
            "verdicts": results.verdicts,
            "passed": results.passed,
            "extra": _jsonable(results.extra),
            "output": data.name,
        }
        if wall_time is not None:
            manifest["wall_time_s"] = wall_time
        man = out / "manifest.json"
        man.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write report to {out}: {exc}") from exc
    return [data, man]
