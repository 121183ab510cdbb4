"""JSON/CSV serialization with atomic writes.

Space documents look like ``{"labels": [...], "matrix": [[...]], "kind": "..."}``.
Exact entries are written as decimal strings when the rational has a finite
decimal expansion and as ``"p/q"`` otherwise; float entries are JSON numbers.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .metric import FiniteMetricSpace, MalformedSpaceError


def fraction_to_str(x: Fraction) -> str:
    """Shortest exact string: finite decimal when possible, else ``p/q``."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{x.numerator}/{x.denominator}"
    places = max(twos, fives)
    scaled = x.numerator * 10 ** places // x.denominator
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    whole, frac = digits[:-places], digits[-places:]
    return f"{sign}{whole}.{frac.rstrip('0')}"


def str_to_fraction(s: str) -> Fraction:
    return Fraction(s.strip())


def _label_to_json(label: Any) -> Any:
    if isinstance(label, tuple):
        return [_label_to_json(x) for x in label]
    if isinstance(label, (np.integer,)):
        return int(label)
    if isinstance(label, Fraction):
        return fraction_to_str(label)
    return label


def _label_from_json(label: Any) -> Any:
    if isinstance(label, list):
        return tuple(_label_from_json(x) for x in label)
    return label


def space_to_dict(space: FiniteMetricSpace) -> dict:
    if space.exact:
        matrix = [[fraction_to_str(x) for x in row] for row in space.dist]
    else:
        matrix = [[float(x) for x in row] for row in space.dist]
    return {
        "labels": [_label_to_json(lab) for lab in space.labels],
        "matrix": matrix,
        "kind": space.kind,
    }


def space_from_dict(doc: dict) -> FiniteMetricSpace:
    try:
        labels = [_label_from_json(x) for x in doc["labels"]]
        rows = doc["matrix"]
        kind = doc.get("kind", "metric")
    except (KeyError, TypeError) as exc:
        raise MalformedSpaceError(f"space document missing field: {exc}") from exc
    flat = [x for r in rows for x in r]
    if flat and all(isinstance(x, str) for x in flat):
        matrix = [[str_to_fraction(x) for x in r] for r in rows]
    elif any(isinstance(x, str) for x in flat):
        # mixed: promote everything to float
        matrix = [[float(Fraction(x)) if isinstance(x, str) else float(x) for x in r] for r in rows]
    else:
        matrix = [[float(x) for x in r] for r in rows]
    if any(len(r) != len(rows) for r in rows):
        raise MalformedSpaceError("matrix must be square")
    return FiniteMetricSpace.from_matrix(matrix, labels, kind)


def dumps_json(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, LF, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=1, default=_json_default) + "\n"


def _json_default(x: Any) -> Any:
    if isinstance(x, Fraction):
        return fraction_to_str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, tuple):
        return list(x)
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    return str(x)


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def save_space(space: FiniteMetricSpace, path: str | os.PathLike) -> Path:
    return atomic_write_text(path, dumps_json(space_to_dict(space)))


def load_space(path: str | os.PathLike) -> FiniteMetricSpace:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedSpaceError(f"{path}: invalid JSON ({exc})") from exc
    return space_from_dict(doc)


def format_cell(x: Any) -> str:
    if isinstance(x, Fraction):
        return fraction_to_str(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(x) for x in row])
    return buf.getvalue()


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    return atomic_write_text(path, csv_text(header, rows))
