"""expray command line.

Exit codes
----------
0  success
2  usage error (bad flags, config or address literal, potential outside the domain)
3  truncation: the traced ray ended prematurely (output files are still written)
4  numerical failure: no convergence, stuck continuation, failed round trip
5  not escaping / not a fast address

Options may also come from a JSON config file (``--config``): an object whose
keys are option names (``t_lo`` or ``t-lo``).  Command-line flags override the
file, which overrides the built-in defaults.  Unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import dynamics, params, rays, render
from .address import classify_speed, format_address, parse_address, potential_bound
from .errors import (AddressSyntaxError, BoundaryStrip, ContinuationStuck, DomainError,
                     NoConvergence, NotEscaping, NotFastAddress, OverflowDepth,
                     RoundtripFailure)
from .io import dump_json, write_param_ray, write_ray_trace

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TRUNCATED = 3
EXIT_CONVERGENCE = 4
EXIT_NOT_ESCAPING = 5

# options whose values may start with '-' (negative coordinates)
_VALUE_FLAGS = ("--kappa", "--grid", "--center")


class UsageError(Exception):
    pass


def parse_complex(text) -> complex:
    """'re,im', a bare real, or a Python complex literal."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    text = str(text).strip()
    try:
        if "," in text:
            re_, im = text.split(",")
            z = complex(float(re_), float(im))
        else:
            z = complex(text.replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise UsageError(f"non-finite complex number {text!r}")
    return z


def parse_grid(text, budget: int, r_esc: float = dynamics.R_ESC) -> render.GridSpec:
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(",")
    if len(parts) != 6:
        raise UsageError("--grid needs cx,cy,w,h,pw,ph")
    try:
        cx, cy, w, h = (float(v) for v in parts[:4])
        pw, ph = int(parts[4]), int(parts[5])
        return render.GridSpec(complex(cx, cy), w, h, pw, ph, budget, r_esc)
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

DEFAULTS = {
    "kmax": 60,
    "t_lo": 1.0,
    "t_hi": 10.0,
    "samples": 50,
    "eps": None,            # command-specific
    "budget": dynamics.BUDGET,
    "grid": "0,0,8,8,200,200",
    "threads": None,
    "json": False,
    "overlay": [],
}

COMMAND_KEYS = {
    "address": {"address", "kmax", "json"},
    "ray-dyn": {"address", "kappa", "t_lo", "t_hi", "samples", "eps", "out", "json"},
    "ray-par": {"address", "t_lo", "t_hi", "samples", "eps", "out", "json"},
    "endpoint": {"address", "eps", "budget", "out", "json"},
    "classify": {"kappa", "budget", "eps", "json"},
    "render-par": {"grid", "budget", "out", "counts", "threads", "overlay", "t_lo", "t_hi",
                   "samples", "json"},
    "render-dyn": {"kappa", "grid", "budget", "out", "counts", "threads", "overlay", "t_lo",
                   "t_hi", "samples", "json"},
}

EPS_DEFAULT = {"ray-dyn": rays.EPS, "ray-par": params.EPS, "endpoint": params.EPS,
               "classify": 1e-8}


def _add(p: argparse.ArgumentParser, key: str):
    S = argparse.SUPPRESS
    opts = {
        "address": lambda: p.add_argument("--address", default=S, help="address literal, e.g. p:|0 or f:2.0"),
        "kappa": lambda: p.add_argument("--kappa", default=S, help="parameter re,im"),
        "kmax": lambda: p.add_argument("--kmax", type=int, default=S,
                                       help="window end for the t_s estimate (default 60)"),
        "t_lo": lambda: p.add_argument("--t-lo", dest="t_lo", type=float, default=S),
        "t_hi": lambda: p.add_argument("--t-hi", dest="t_hi", type=float, default=S),
        "samples": lambda: p.add_argument("--samples", type=int, default=S),
        "eps": lambda: p.add_argument("--eps", type=float, default=S, help="residual tolerance"),
        "budget": lambda: p.add_argument("--budget", type=int, default=S, help="iteration budget"),
        "grid": lambda: p.add_argument("--grid", default=S, help="cx,cy,w,h,pw,ph"),
        "out": lambda: p.add_argument("--out", default=S, help="output file"),
        "counts": lambda: p.add_argument("--counts", default=S, help="also write escape counts CSV"),
        "threads": lambda: p.add_argument("--threads", type=int, default=S,
                                          help="worker threads (default: EXPRAY_THREADS or 1)"),
        "overlay": lambda: p.add_argument("--overlay", action="append", default=S,
                                          help="address of a ray to draw (repeatable)"),
        "json": lambda: p.add_argument("--json", action="store_true", default=S,
                                       help="machine-readable JSON on stdout"),
    }
    opts[key]()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expray",
        description="Dynamic and parameter rays of exp(z) + kappa.",
        epilog="exit codes: 0 ok, 2 usage, 3 truncation, 4 convergence, 5 not escaping/not fast")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "address": "minimal potential and speed class of an address",
        "ray-dyn": "trace a dynamic ray g_s^kappa to CSV",
        "ray-par": "trace a parameter ray G_s to CSV",
        "endpoint": "landing parameter of the ray of a fast address",
        "classify": "address and potential of an escaping parameter",
        "render-par": "escape image of the parameter plane (PPM)",
        "render-dyn": "escape image of the dynamical plane of kappa (PPM)",
    }
    for name, keys in COMMAND_KEYS.items():
        p = sub.add_parser(name, help=helps[name])
        if name == "address":
            p.add_argument("literal", nargs="?", help="address literal (or --address)")
        p.add_argument("--config", help="JSON file with option values")
        for key in ("address", "kappa", "kmax", "t_lo", "t_hi", "samples", "eps", "budget",
                    "grid", "out", "counts", "threads", "overlay", "json"):
            if key in keys:
                _add(p, key)
    return parser


def _fix_negative_values(argv):
    """Glue '--kappa -2,0' into '--kappa=-2,0' so argparse sees a value."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def resolve_options(command: str, ns: argparse.Namespace) -> dict:
    """Merge defaults < config file < flags into one dict of options."""
    keys = COMMAND_KEYS[command]
    opts = {k: DEFAULTS[k] for k in keys if k in DEFAULTS}
    if "eps" in keys:
        opts["eps"] = EPS_DEFAULT[command]
    if getattr(ns, "config", None):
        try:
            with open(ns.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        for raw, value in cfg.items():
            key = raw.replace("-", "_")
            if key not in keys:
                raise UsageError(f"unknown config key {raw!r} for {command}")
            opts[key] = value
    for key in keys:
        if hasattr(ns, key):
            opts[key] = getattr(ns, key)
    if command == "address" and ns.literal is not None:
        opts["address"] = ns.literal
    for key in ("address", "kappa", "out"):
        if key in keys and key not in opts:
            if key == "out" and command in ("ray-dyn", "ray-par", "endpoint"):
                continue
            raise UsageError(f"{command} needs --{key}")
    return opts


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _emit(opts, payload: dict, text: str):
    if opts.get("json"):
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _cz(z: complex) -> list[float]:
    return [z.real, z.imag]


def cmd_address(opts) -> int:
    s = parse_address(opts["address"])
    bound = potential_bound(s, k_max=int(opts["kmax"]))
    speed = classify_speed(s)
    payload = {"address": format_address(s), "t_s": bound.t_s, "exact": bound.exact,
               "delta": bound.delta, "speed": speed.name.lower()}
    text = (f"address  {format_address(s)}\n"
            f"t_s      {bound.t_s!r} ({'exact' if bound.exact else f'estimate, +-{bound.delta:.3g}'})\n"
            f"speed    {speed.name.lower()}")
    _emit(opts, payload, text)
    return EXIT_OK


def cmd_ray_dyn(opts) -> int:
    s = parse_address(opts["address"])
    kappa = parse_complex(opts["kappa"])
    trace = rays.trace_ray(kappa, s, float(opts["t_lo"]), float(opts["t_hi"]),
                           int(opts["samples"]), eps=float(opts["eps"]))
    if opts.get("out"):
        write_ray_trace(opts["out"], trace)
    payload = {"address": format_address(s), "kappa": _cz(kappa),
               "samples": len(trace.samples), "failures": len(trace.failures),
               "truncation": trace.truncation.to_json(), "out": opts.get("out")}
    end = trace.truncation
    text = (f"{len(trace.samples)} samples, {len(trace.failures)} failures, "
            + ("complete" if isinstance(end, rays.Complete) else f"premature end at t = {end.at_t!r}"))
    _emit(opts, payload, text)
    if not trace.samples and trace.failures:
        return EXIT_CONVERGENCE
    if isinstance(end, rays.PrematureEnd):
        return EXIT_TRUNCATED
    return EXIT_OK


def cmd_ray_par(opts) -> int:
    s = parse_address(opts["address"])
    samples = params.trace_parameter_ray(s, float(opts["t_lo"]), float(opts["t_hi"]),
                                         int(opts["samples"]), eps=float(opts["eps"]))
    t_s = rays.minimal_potential(s)
    if opts.get("out"):
        write_param_ray(opts["out"], samples, t_s)
    payload = {"address": format_address(s), "samples": len(samples),
               "path_length": samples[-1].path_length,
               "max_residual": max(p.residual for p in samples), "out": opts.get("out")}
    _emit(opts, payload, f"{len(samples)} samples, max residual "
                         f"{payload['max_residual']:.3g}")
    return EXIT_OK


def cmd_endpoint(opts) -> int:
    s = parse_address(opts["address"])
    land = params.land_endpoint(s, eps=float(opts["eps"]), budget=int(opts["budget"]))
    payload = {"address": format_address(s), "kappa": _cz(land.kappa), "t_s": land.t_s,
               "t_s_delta": land.t_s_delta, "residual": land.sample.residual,
               "newton_iters": land.sample.newton_iters,
               "path_length": land.sample.path_length, "verdict": "escaping"}
    if opts.get("out"):
        dump_json(opts["out"], payload)
    _emit(opts, payload, f"kappa*  {land.kappa!r}\nt_s     {land.t_s!r}\n"
                         f"residual {land.sample.residual:.3g}")
    return EXIT_OK


def cmd_classify(opts) -> int:
    kappa = parse_complex(opts["kappa"])
    r = params.classify_parameter(kappa, budget=int(opts["budget"]), eps=float(opts["eps"]))
    payload = {"kappa": _cz(kappa), "verdict": "escaping", "address": format_address(r.address),
               "address_prefix": list(r.address_prefix), "t": r.t,
               "verified_kappa": _cz(r.verified_kappa), "roundtrip_error": r.roundtrip_error}
    _emit(opts, payload, f"address  {format_address(r.address)} (observed "
                         f"{list(r.address_prefix)})\nt        {r.t!r}\n"
                         f"roundtrip error {r.roundtrip_error:.3g}")
    return EXIT_OK


def _render(opts, kappa=None) -> int:
    grid = parse_grid(opts["grid"], int(opts["budget"]))
    threads = opts.get("threads")
    if kappa is None:
        image = render.render_parameter_plane(grid, threads=threads)
    else:
        image = render.render_dynamic_plane(kappa, grid, threads=threads)
    traces = []
    truncated = False
    for lit in opts.get("overlay") or []:
        s = parse_address(lit)
        t_lo = max(float(opts["t_lo"]), rays.minimal_potential(s))
        if kappa is None:
            traces.append(params.trace_parameter_ray(s, t_lo, float(opts["t_hi"]),
                                                     int(opts["samples"])))
        else:
            tr = rays.trace_ray(kappa, s, t_lo, float(opts["t_hi"]), int(opts["samples"]))
            truncated |= isinstance(tr.truncation, rays.PrematureEnd)
            traces.append(tr)
    rgb = render.overlay_rays(image, traces)
    render.write_ppm(opts["out"], rgb)
    if opts.get("counts"):
        render.write_counts_csv(opts["counts"], image)
    n_esc = int(image.escaped.sum())
    payload = {"out": opts["out"], "pixels": grid.px_w * grid.px_h, "escaped": n_esc,
               "overlays": len(traces), "truncated": truncated}
    _emit(opts, payload, f"wrote {opts['out']}: {n_esc} of {grid.px_w * grid.px_h} pixels escaping")
    return EXIT_OK


def cmd_render_par(opts) -> int:
    return _render(opts)


def cmd_render_dyn(opts) -> int:
    return _render(opts, parse_complex(opts["kappa"]))


COMMANDS = {
    "address": cmd_address, "ray-dyn": cmd_ray_dyn, "ray-par": cmd_ray_par,
    "endpoint": cmd_endpoint, "classify": cmd_classify,
    "render-par": cmd_render_par, "render-dyn": cmd_render_dyn,
}


def _fail(opts, code: int, kind: str, exc: Exception, **extra) -> int:
    payload = {"error": kind, "message": str(exc), "exit_code": code, **extra}
    if opts.get("json"):
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"expray: {kind}: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = _fix_negative_values(sys.argv[1:] if argv is None else list(argv))
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    opts = {"json": getattr(ns, "json", False)}
    try:
        opts = resolve_options(ns.command, ns)
        return COMMANDS[ns.command](opts)
    except (UsageError, AddressSyntaxError, DomainError, BoundaryStrip, OverflowDepth) as exc:
        return _fail(opts, EXIT_USAGE, type(exc).__name__, exc)
    except (NoConvergence, ContinuationStuck, RoundtripFailure) as exc:
        return _fail(opts, EXIT_CONVERGENCE, type(exc).__name__, exc)
    except NotEscaping as exc:
        verdict = exc.verdict.to_json() if exc.verdict is not None else None
        return _fail(opts, EXIT_NOT_ESCAPING, "NotEscaping", exc, verdict=verdict)
    except NotFastAddress as exc:
        return _fail(opts, EXIT_NOT_ESCAPING, "NotFastAddress", exc)
    except ValueError as exc:
        return _fail(opts, EXIT_USAGE, type(exc).__name__, exc)


if __name__ == "__main__":
    sys.exit(main())
