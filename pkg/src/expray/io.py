"""CSV/JSON persistence for ray traces and orbit records.

Ray CSV columns: ``t,re,im,d_re,d_im,depth,residual`` in descending t, floats
written with ``repr`` so they round-trip exactly.  For dynamic rays d is
d g_s^kappa(t) / d kappa; for parameter rays (which add ``newton_iters``) it
is the same derivative at the solved parameter.  Each CSV gets a JSON sidecar
``<name>.json`` with the run metadata.
"""

from __future__ import annotations

import csv
import json
import os

from .address import format_address

RAY_COLUMNS = ("t", "re", "im", "d_re", "d_im", "depth", "residual")
PARAM_COLUMNS = RAY_COLUMNS + ("newton_iters",)


def sidecar_path(csv_path) -> str:
    root, _ = os.path.splitext(os.fspath(csv_path))
    return root + ".json"


def dump_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def ray_trace_meta(trace) -> dict:
    return {
        "kind": "dynamic_ray",
        "address": format_address(trace.address),
        "kappa": [trace.kappa.real, trace.kappa.imag],
        "samples": len(trace.samples),
        "truncation": trace.truncation.to_json(),
        "failures": [{"t": t, "reason": msg} for t, msg in trace.failures],
    }


def write_ray_trace(path, trace, extra: dict | None = None) -> str:
    rows = [(repr(p.t), repr(p.value.real), repr(p.value.imag), repr(p.dvalue_dkappa.real),
             repr(p.dvalue_dkappa.imag), p.depth, repr(p.residual))
            for p in trace.samples]
    _write_rows(path, RAY_COLUMNS, rows)
    meta = ray_trace_meta(trace)
    meta.update(extra or {})
    side = sidecar_path(path)
    dump_json(side, meta)
    return side


def param_ray_meta(samples, t_s: float | None = None) -> dict:
    first = samples[0]
    return {
        "kind": "parameter_ray",
        "address": format_address(first.address),
        "samples": len(samples),
        "seed": [first.seed.real, first.seed.imag],
        "path_length": samples[-1].path_length,
        "t_s_estimate": t_s,
    }


def write_param_ray(path, samples, t_s: float | None = None, extra: dict | None = None) -> str:
    rows = [(repr(p.t), repr(p.kappa.real), repr(p.kappa.imag), repr(p.dg_dkappa.real),
             repr(p.dg_dkappa.imag), p.depth, repr(p.residual), p.newton_iters)
            for p in samples]
    _write_rows(path, PARAM_COLUMNS, rows)
    meta = param_ray_meta(samples, t_s)
    meta.update(extra or {})
    side = sidecar_path(path)
    dump_json(side, meta)
    return side


def read_ray_csv(path) -> list[dict]:
    """Rows as dicts of floats (ints for depth and newton_iters)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ints = ("depth", "newton_iters")
    return [{k: int(v) if k in ints else float(v) for k, v in r.items()} for r in rows]
