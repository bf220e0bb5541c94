"""Reading and writing weight tables, sign functions and reports.

Weight table file (JSON)::

    {"n": 2, "values": [2, -2, -2, -2]}

Sign function file (JSON); bit j of ``mask`` is ``(S + 1)/2`` at s-index j::

    {"n": 2, "mask": "0x7"}
"""

from __future__ import annotations

import csv
import io
import json
import math

from .errors import ParseError
from .inequalities import GTable, SignFunction


def _load_json(text, source):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _field_n(obj, source):
    if not isinstance(obj, dict):
        raise ParseError(f"{source}: top level must be an object")
    if "n" not in obj:
        raise ParseError(f"{source}: missing field 'n'")
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"{source}: field 'n' must be a positive integer, got {n!r}")
    return n


def parse_gtable(text, source="<g-table>"):
    obj = _load_json(text, source)
    n = _field_n(obj, source)
    if "values" not in obj:
        raise ParseError(f"{source}: missing field 'values'")
    values = obj["values"]
    if not isinstance(values, list):
        raise ParseError(f"{source}: field 'values' must be an array")
    if len(values) != 2**n:
        raise ParseError(f"{source}: field 'values' has {len(values)} entries, expected 2^{n} = {2**n}")
    for j, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ParseError(f"{source}: values[{j}] is not a finite number: {v!r}")
    try:
        return GTable(n, values)
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from exc


def load_gtable(path):
    return parse_gtable(_read(path), source=str(path))


def dump_gtable(g):
    ints = g.integral_values
    values = ints.tolist() if ints is not None else g.values.tolist()
    return json.dumps({"n": g.n, "values": values})


def parse_sign_function(text, source="<sign-function>"):
    obj = _load_json(text, source)
    n = _field_n(obj, source)
    if "mask" not in obj:
        raise ParseError(f"{source}: missing field 'mask'")
    mask = obj["mask"]
    try:
        value = int(mask, 16) if isinstance(mask, str) else None
    except ValueError:
        value = None
    if value is None:
        raise ParseError(f"{source}: field 'mask' must be a hexadecimal string, got {mask!r}")
    try:
        return SignFunction.from_mask(n, value)
    except ValueError as exc:
        raise ParseError(f"{source}: field 'mask': {exc}") from exc


def load_sign_function(path):
    return parse_sign_function(_read(path), source=str(path))


def dump_sign_function(sign):
    return json.dumps({"n": sign.n, "mask": sign.hex()})


def format_float(v):
    return f"{v:.17g}"


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def to_csv(rows, columns):
    """Rows of dicts to CSV text with a fixed column order; floats at 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def to_json(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
