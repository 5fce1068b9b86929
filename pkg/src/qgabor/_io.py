"""Deterministic JSON and CSV writing.

``json.dumps`` prints floats with the shortest round-trip repr; reports here
are fixed at 17 significant digits so byte-identical output does not depend
on the float printing algorithm.
"""

import csv
import io
import json
import math

import numpy as np


def _fmt_float(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _encode(obj, out):
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(obj))
    elif isinstance(obj, (complex, np.complexfloating)):
        out.append("[" + _fmt_float(obj.real) + "," + _fmt_float(obj.imag) + "]")
    elif isinstance(obj, str):
        out.append(_quote(obj))
    elif isinstance(obj, dict):
        out.append("{")
        first = True
        for k, v in obj.items():
            if not first:
                out.append(",")
            first = False
            out.append(_quote(str(k)))
            out.append(":")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, np.ndarray):
        _encode(obj.tolist(), out)
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _encode(v, out)
        out.append("]")
    elif hasattr(obj, "to_dict"):
        _encode(obj.to_dict(), out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _quote(s):
    return json.dumps(s, ensure_ascii=False)


def dumps(obj):
    """Serialize ``obj`` to compact JSON with fixed float formatting."""
    out = []
    _encode(obj, out)
    return "".join(out)


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows))
