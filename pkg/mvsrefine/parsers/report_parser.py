"""Metric reports and refinement traces on disk."""
import json
from pathlib import Path
from typing import Dict, List, Mapping, Union

import pandas as pd

from ..exceptions import FormatError

PathLike = Union[str, Path]
TRACE_COLUMNS = ["step", "total", "l_gt", "l_ed", "l_sm", "l_bi"]


def _format_value(value) -> str:
    if isinstance(value, bool) or isinstance(value, int):
        return str(int(value))
    return f"{float(value):.17g}"


def format_report(values: Mapping[str, float]) -> str:
    """Flat `key = value` lines in insertion order."""
    return "".join(f"{key} = {_format_value(value)}\n" for key, value in values.items())


def write_report(path: PathLike, values: Mapping[str, float]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".json":
        path.write_text(json.dumps(dict(values), indent=2, sort_keys=True) + "\n")
    else:
        path.write_text(format_report(values))


def read_report(path: PathLike) -> Dict[str, float]:
    path = Path(path)
    if path.suffix == ".json":
        return json.loads(path.read_text())
    values = {}
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"{path}:{line_no}: expected 'key = value'")
        values[key.strip()] = float(value)
    return values


def write_trace(path: PathLike, rows: List[Mapping[str, float]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=TRACE_COLUMNS)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def read_trace(path: PathLike) -> pd.DataFrame:
    frame = pd.read_csv(path)
    missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
    if missing:
        raise FormatError(f"trace {path} lacks columns {missing}")
    return frame
