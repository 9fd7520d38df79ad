"""CSV and JSON artifact writers. Output depends only on the data passed in."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def _version() -> str:
    from . import __version__

    return __version__


def _num(x) -> str:
    # repr round-trips doubles exactly
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


def _header_lines(config: dict) -> list[str]:
    return [
        "# skl " + _version(),
        "# config " + json.dumps(to_jsonable(config), sort_keys=True, separators=(",", ":")),
    ]


def write_csv(path, config: dict, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Comment header (version, resolved config), column names, then numeric rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for line in _header_lines(config):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_num(v) for v in row])
    return path


def read_csv(path) -> tuple[dict, list[str], np.ndarray]:
    """Inverse of :func:`write_csv`: (config, column names, float array)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    config = {}
    body = []
    for ln in lines:
        if ln.startswith("# config "):
            config = json.loads(ln[len("# config "):])
        elif not ln.startswith("#"):
            body.append(ln)
    columns = body[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in body[1:] if ln], dtype=float)
    return config, columns, data.reshape(-1, len(columns))


def write_summary(path, config: dict, predicates: dict, metrics: dict, artifacts: Sequence[str] = ()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "version": _version(),
        "config": config,
        "predicates": {k: bool(v) for k, v in predicates.items()},
        "passed": all(bool(v) for v in predicates.values()),
        "metrics": metrics,
        "artifacts": sorted(Path(a).name for a in artifacts),
    }
    path.write_text(json.dumps(to_jsonable(doc), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path
