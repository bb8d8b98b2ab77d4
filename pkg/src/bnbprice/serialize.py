"""Deterministic JSON writing.

Every artifact file (dataset, pipeline, models, report) goes through
dumps/dump_file so that equal in-memory values always produce equal
bytes. Floats are rendered with 17 significant digits, which json.loads
parses back to the exact same double, and dict insertion order is kept.
"""

import json
import math

import numpy as np


def format_float(x):
    """Render a float so that parsing returns the identical double."""
    if not math.isfinite(x):
        raise ValueError("non-finite float in output: %r" % x)
    s = "%.17g" % x
    # keep the value typed as float on reload ("5" would come back int)
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def _write(value, parts):
    # numpy scalars leak in from feature math; fold them into plain types
    if isinstance(value, np.bool_):
        value = bool(value)
    elif isinstance(value, np.integer):
        value = int(value)
    elif isinstance(value, np.floating):
        value = float(value)
    if value is None:
        parts.append("null")
    elif value is True:
        parts.append("true")
    elif value is False:
        parts.append("false")
    elif isinstance(value, str):
        parts.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, float):
        parts.append(format_float(value))
    elif isinstance(value, int):
        parts.append(str(value))
    elif isinstance(value, dict):
        parts.append("{")
        first = True
        for k, v in value.items():
            if not isinstance(k, str):
                raise ValueError("object keys must be str, got %r" % (k,))
            if not first:
                parts.append(",")
            first = False
            parts.append(json.dumps(k, ensure_ascii=False))
            parts.append(":")
            _write(v, parts)
        parts.append("}")
    elif isinstance(value, (list, tuple)):
        parts.append("[")
        for i, v in enumerate(value):
            if i:
                parts.append(",")
            _write(v, parts)
        parts.append("]")
    else:
        raise ValueError("cannot serialize %r" % type(value))


def dumps(value):
    parts = []
    _write(value, parts)
    return "".join(parts)


def dump_file(value, path):
    with open(path, "wb") as fh:
        fh.write(dumps(value).encode("utf-8"))
        fh.write(b"\n")


def load_file(path):
    with open(path, "rb") as fh:
        return json.loads(fh.read().decode("utf-8"))
