"""Trace CSV and JSON summary writers (atomic, deterministic)."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import core, merit
from .solvers import TRACE_COLUMNS


def _fmt(v):
    # repr gives the shortest round-trip form, so reruns are byte-identical
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def trace_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in records:
        w.writerow([_fmt(v) for v in r.row()])
    return buf.getvalue()


def atomic_write(path, text: str):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trace(path, records):
    atomic_write(path, trace_csv(records))


def summary(result, problem, solver: str, extra: dict | None = None) -> dict:
    """JSON-ready summary of a solve; ``timestamp`` is the only volatile field."""
    c = problem.constants
    rec = result.final_record
    final = {}
    if rec is not None:
        final = {
            "k": rec.k,
            "i": rec.i,
            "tau": rec.tau,
            "epsilon": rec.epsilon,
            "z_norm": rec.z_norm,
            "gap": rec.gap,
            "measure": rec.measure,
            "measure_hd": merit.optimality_measure_hd(rec.gap, rec.tau, c.H, c.D),
            "v_residual": rec.v_residual,
        }
    out = {
        "solver": solver,
        "problem": problem.name,
        "n": problem.n,
        "termination": result.termination,
        "outer_count": result.outer_count,
        "iterations": result.iterations,
        "backend": result.backend,
        "final": final,
        "constants": {"H": c.H, "R": c.R, "D": c.D, "L_F": c.L_F, "L_G": c.L_G,
                      "map_scale": result.scale},
        "monotonicity_defects": dict(problem.defects),
        "flags": list(result.flags),
        "final_z": [float(x) for x in result.final_z],
    }
    if result.certificate is not None:
        cert = dict(result.certificate)
        e = cert.pop("errors")
        cert["errors"] = {"eps_sub": e.eps_sub, "eps_up": e.eps_up,
                          "eps_low": e.eps_low, "eps_low_hat": e.eps_low_hat}
        out["certificate"] = cert
    if extra:
        out.update(extra)
    out["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return out


def write_json(path, obj):
    atomic_write(path, core.dumps(obj) + "\n")
