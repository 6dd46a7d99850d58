"""Machine-readable run reports: JSON with embedded manifest, CSV trajectories.

Reports are deterministic by default: same input and seed give identical
bytes.  Wall-clock timestamps are opt-in via ISOMON_TIMESTAMPS=1 because
they would break that guarantee.
"""

from __future__ import annotations

import csv
import json
import os
import sys
import time
from importlib.metadata import PackageNotFoundError, version as _dist_version

from . import backend
from .spectral import extract_invariants

try:
    _VERSION = _dist_version("isomon")
except PackageNotFoundError:
    _VERSION = "unknown"


def run_manifest(command: str, seed: int | None = None,
                 depth: int | None = None, tol: float | None = None,
                 paths: list | None = None, extra: dict | None = None) -> dict:
    manifest = {
        "command": command,
        "seed": seed,
        "depth": depth,
        "tol": tol,
        "paths": paths or [],
        "backend": backend.BACKEND,
        "version": _VERSION,
        "timestamp": None,
    }
    if os.environ.get("ISOMON_TIMESTAMPS") == "1":
        manifest["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    if extra:
        manifest.update(extra)
    return manifest


def emit_json(payload: dict, out: str | None = None) -> str:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _complex_columns(label: str, value: complex) -> list:
    return [(f"{label}_re", repr(value.real)), (f"{label}_im", repr(value.imag))]


def trajectory_rows(records) -> tuple:
    """Header and rows for a flow trajectory.

    One row per checkpoint: flow parameter, accumulated log tau, pole
    locations, and every invariant-table entry.  Invariant columns double
    as conservation diagnostics: Casimir columns other than the flowed
    times must stay constant along a valid flow.
    """
    header = None
    rows = []
    for s, lax, log_tau in records:
        table = extract_invariants(lax)
        cells = [("s", repr(float(s)))]
        cells += _complex_columns("log_tau", complex(log_tau))
        for key, val in sorted(table.to_json_dict().items()):
            cells += _complex_columns(key, complex(val[0], val[1]))
        if header is None:
            header = [name for name, _ in cells]
        row = dict(cells)
        rows.append([row.get(name, "") for name in header])
    return header or ["s"], rows


def emit_trajectory_csv(records, out: str | None = None) -> None:
    header, rows = trajectory_rows(records)
    fh = sys.stdout if out is None or out == "-" else open(out, "w",
                                                           encoding="utf-8",
                                                           newline="")
    try:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
