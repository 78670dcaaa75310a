"""Deterministic CSV / JSON emission shared by samplers and the CLI.

All floats are written with 17 significant digits, '.' decimal point and
LF line endings so that re-runs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json


def format_value(x):
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def write_csv(path, header, rows):
    """Write rows (sequences) under a header; returns the body digest."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    body = "\n".join(lines) + "\n"
    with open(path, "w", newline="\n") as fh:
        fh.write(body)
    return hashlib.sha256(body.encode()).hexdigest()


def write_json(path, payload):
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
