"""Command-line front-end: ``blaschke-lab <command> [flags]``.

Exit status: 0 when the verdict HOLDS (or the command just computes), 1 when
it FAILS, 2 when INCONCLUSIVE, 3 on usage or input errors (with a JSON error
object on standard error).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .conditions import (
    CONVERGENT,
    DIVERGENT,
    blaschke_functional,
    check_implication,
    check_L_bound,
    classify_series,
    evaluate_inequality_C,
    green_identity_report,
    make_test_function,
)
from .conditions.report import FAILS, HOLDS, INCONCLUSIVE, ConditionReport, dumps
from .conditions.functionals import SumTrace, charge_of
from .domains import disk, moebius_image, unit_disk, whole_plane
from .errors import BlaschkeLabError
from .exprcore.grid import GridField, fmt15, sample_grid, write_grid_csv
from .exprcore.parser import parse_function
from .potential.green import GreenKernel, green_domain
from .potential.measures import MeasureEstimate, hahn_jordan_split
from .zerolocator import Box, ZeroSequence, zeros_of

EXIT = {HOLDS: 0, FAILS: 1, INCONCLUSIVE: 2}
USAGE_EXIT = 3
COMMANDS = ("zeros", "green", "riesz", "blaschke", "implication", "inequality-c", "identity",
            "l-bound", "validate-v")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument decoding ---------------------------------------------------------

def parse_real(text):
    """Reals such as ``0.5``, ``1e-3`` or ``1/256``."""
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a real number: {text!r}") from None


def parse_complex(text):
    """Complex numbers written with ``i`` (``0.3-0.2i``, ``i``, ``-0.5``)."""
    s = str(text).strip().replace(" ", "")
    try:
        return complex(s.replace("i", "j")) if s not in ("i", "+i", "-i") else complex(s.replace("i", "1j"))
    except ValueError:
        pass
    spec = parse_function(s)
    vals = spec.evaluate(np.array([0j, 1 + 0j]))
    if vals[0] != vals[1] or not np.isfinite(vals[0]):
        raise UsageError(f"not a complex constant: {text!r}")
    return complex(vals[0])


def parse_domain(text):
    """``unitdisk``, ``disk:c,r``, ``moebius:a,b,c,d``, ``plane`` or ``box:x0,y0,x1,y1``."""
    s = str(text).strip()
    kind, _, rest = s.partition(":")
    parts = [p for p in rest.split(",")] if rest else []
    if kind == "unitdisk" and not parts:
        return unit_disk()
    if kind == "plane" and not parts:
        return whole_plane()
    if kind == "disk" and len(parts) == 2:
        return disk(parse_complex(parts[0]), parse_real(parts[1]))
    if kind == "moebius" and len(parts) == 4:
        return moebius_image(*(parse_complex(p) for p in parts))
    if kind == "box" and len(parts) == 4:
        x0, y0, x1, y1 = (parse_real(p) for p in parts)
        return Box(x0, y0, x1, y1)
    raise UsageError(f"cannot read domain {text!r}")


def read_spec_text(value):
    """Expression text, or the contents of a file when written as ``@path``."""
    value = str(value)
    if value.startswith("@"):
        return Path(value[1:]).read_text(encoding="utf-8").strip()
    return value


def parse_spec(value):
    if value is None:
        return None
    return parse_function(read_spec_text(value))


def build_domain(args):
    D = parse_domain(args.domain)
    if isinstance(D, Box):
        raise UsageError("--domain must be a disk, Moebius image or the plane")
    if args.d0 is None:
        return D
    try:
        rho = parse_real(args.d0)
    except UsageError:
        inner = parse_domain(args.d0)
    else:
        centre = complex(D.from_disk(0.0)) if D.kind != "plane" else 0j
        inner = disk(centre, rho)
    return D.with_inner(inner)


def build_test_function(text, domain, h=None, strict=True):
    """``loginv``, ``greenpole:z0``, ``power:q``, ``custom:file`` or a JSON file path."""
    s = str(text)
    kind, _, rest = s.partition(":")
    if s.endswith(".json"):
        data = json.loads(Path(s).read_text(encoding="utf-8"))
        kind = data.get("kind")
        params = {}
        if "z0" in data:
            params["z0"] = parse_complex(data["z0"])
        if "q" in data:
            params["q"] = parse_real(data["q"])
        if "function" in data:
            params["function"] = parse_function(str(data["function"]))
        if kind is None:
            raise UsageError("test function file needs a 'kind'")
        return make_test_function(kind, domain, strict=strict, h=h, **params)
    if kind == "loginv" and not rest:
        return make_test_function("loginv", domain, strict=strict, h=h)
    if kind == "greenpole":
        return make_test_function("greenpole", domain, strict=strict, h=h, z0=parse_complex(rest or "0"))
    if kind == "power":
        return make_test_function("power", domain, strict=strict, h=h, q=parse_real(rest or "2"))
    if kind == "custom" and rest:
        fn = parse_function(Path(rest).read_text(encoding="utf-8").strip())
        return make_test_function("custom", domain, strict=strict, h=h, function=fn)
    raise UsageError(f"cannot read test function {text!r}")


# -- plot data -----------------------------------------------------------------

def plot_csv(data):
    """CSV text for a GridField (``re,im,value``), a SumTrace (``k,abs_zk,partial_sum``) or a measure."""
    buf = io.StringIO()
    if isinstance(data, GridField):
        buf.write("re,im,value\n")
        nodes = data.nodes().ravel()
        vals = np.where(data.mask, data.values, np.nan).ravel()
        for p, v in zip(nodes, vals):
            buf.write(f"{fmt15(p.real)},{fmt15(p.imag)},{fmt15(v)}\n")
    elif isinstance(data, SumTrace):
        buf.write("k,abs_zk,partial_sum\n")
        for k, a, s in data.rows():
            buf.write(f"{k},{fmt15(a)},{fmt15(s)}\n")
    elif isinstance(data, MeasureEstimate):
        buf.write("re,im,value\n")
        for p, m in zip(data.carriers(), data.masses()):
            buf.write(f"{fmt15(p.real)},{fmt15(p.imag)},{fmt15(m)}\n")
    elif isinstance(data, ZeroSequence):
        buf.write("re,im,mult,err\n")
        for e in data.entries:
            buf.write(f"{fmt15(e.location.real)},{fmt15(e.location.imag)},{e.multiplicity},"
                      f"{fmt15(e.refinement_error)}\n")
    else:
        raise TypeError(f"no plot format for {type(data).__name__}")
    return buf.getvalue()


def emit_plot_data(data, path):
    """Write plot-ready CSV (see :func:`plot_csv`) to ``path``; rows in deterministic order."""
    path = Path(path)
    if isinstance(data, GridField):
        write_grid_csv(data, path)
    else:
        path.write_text(plot_csv(data), encoding="utf-8")
    return path


def read_plot_csv(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


# -- commands ------------------------------------------------------------------

def _report(obj, plot=None):
    return {"json": obj, "plot": plot}


def cmd_zeros(args):
    f = parse_spec(args.f)
    if f is None:
        raise UsageError("--f is required")
    region = parse_domain(args.region or args.domain)
    Z = zeros_of(f, region)
    body = {"command": "zeros", "f": f.text(), "region": region.describe(), "zeros": Z.to_list(),
            "count": len(Z), "total_multiplicity": Z.total_multiplicity()}
    return HOLDS, _report(body, Z)


def cmd_green(args):
    D = parse_domain(args.domain)
    z0 = parse_complex(args.z0 or "0")
    body = {"command": "green", "domain": D.describe(), "z0": z0}
    if args.z:
        pts = [parse_complex(z) for z in args.z]
        body["values"] = [{"z": z, "value": float(green_domain(D, z, z0))} for z in pts]
    h = parse_real(args.h) if args.h else 1.0 / 64
    field = None
    if args.format == "csv" or not args.z:
        x0, y0, x1, y1 = D.bbox()
        field = sample_grid(GreenKernel(D, z0), complex(x0, y0), complex(x1, y1), h, real=True)
        body["grid"] = field.metadata()
    return HOLDS, _report(body, field)


def cmd_riesz(args):
    M = parse_spec(args.M)
    if M is None:
        raise UsageError("--M is required")
    D = build_domain(args)
    h = parse_real(args.h) if args.h else 1.0 / 128
    nu = charge_of(M, D, h, args.method)
    split = hahn_jordan_split(nu)
    body = {"command": "riesz", "M": M.text(), "domain": D.describe(), "h": h, "method": args.method,
            "total_mass": nu.total_mass(), "positive_mass": split.positive.total_mass(),
            "negative_mass": split.negative.total_mass(),
            "atoms": nu.to_dict()["atoms"], "cells": int(len(nu.cell_masses)), "flags": list(nu.flags)}
    return HOLDS, _report(body, nu)


def _zeros_arg(args, f, D):
    if args.zeros:
        return ZeroSequence.load(args.zeros, truncated=args.truncated)
    if f is None:
        raise UsageError("--f or --zeros is required")
    return zeros_of(f, D.without_inner())


def cmd_blaschke(args):
    D = build_domain(args)
    v = build_test_function(args.v, D)
    f = parse_spec(args.f)
    Z = _zeros_arg(args, f, D)
    trace = blaschke_functional(v, Z)
    bound = parse_real(args.bound) if args.bound is not None else None
    series = classify_series(trace, bound)
    verdict = {CONVERGENT: HOLDS, DIVERGENT: FAILS}.get(series["classification"], INCONCLUSIVE)
    report = ConditionReport(
        condition="blaschke", verdict=verdict, lhs=trace.total, rhs=bound if bound is not None else float("inf"),
        trace=trace.to_list(), grid={"h": float("nan"), "nodes": 0},
        tolerances={}, inputs={"f": f.text() if f else None, "zeros": args.zeros, "v": v.describe(),
                               "domain": D.describe()},
        details={"series": series, "sum": trace.total})
    return verdict, _report(report.to_dict(), trace)


def cmd_implication(args):
    D = build_domain(args)
    v = build_test_function(args.v, D)
    f = parse_spec(args.f)
    M = parse_spec(args.M) if args.M else parse_function("0")
    Z = ZeroSequence.load(args.zeros, truncated=args.truncated) if args.zeros else None
    h = parse_real(args.h) if args.h else 1.0 / 256
    bound = parse_real(args.bound) if args.bound is not None else None
    report = check_implication(f, M, v, Z=Z, h=h, bound=bound)
    return report.verdict, _report(report.to_dict())


def cmd_inequality_c(args):
    D = build_domain(args)
    vs = [build_test_function(t, D) for t in (args.v_list or ["loginv"])]
    u = parse_spec(args.u)
    M = parse_spec(args.M) if args.M else parse_function("0")
    if u is None:
        raise UsageError("--u is required")
    z0 = parse_complex(args.z0 or "0")
    b = parse_real(args.b) if args.b is not None else None
    dtilde = parse_domain(args.dtilde) if args.dtilde else None
    h = parse_real(args.h) if args.h else 1.0 / 256
    report = evaluate_inequality_C(u, M, vs, z0, b=b, dtilde=dtilde, h=h)
    return report.verdict, _report(report.to_dict())


def cmd_identity(args):
    D = build_domain(args)
    v = build_test_function(args.v, D)
    M = parse_spec(args.M)
    if M is None:
        raise UsageError("--M is required")
    h = parse_real(args.h) if args.h else 1.0 / 256
    report = green_identity_report(M, v, h)
    return report.verdict, _report(report.to_dict())


def cmd_l_bound(args):
    D = parse_domain(args.domain)
    u0 = parse_spec(args.u0)
    f = parse_spec(args.f)
    M = parse_spec(args.M) if args.M else parse_function("0")
    if args.z is None or args.r is None:
        raise UsageError("--z and --r are required")
    eps = parse_real(args.eps) if args.eps is not None else 0.5
    report = check_L_bound(u0, f, M, parse_complex(args.z[0]), parse_real(args.r), eps, D)
    return report.verdict, _report(report.to_dict())


def cmd_validate_v(args):
    D = build_domain(args)
    h = parse_real(args.h) if args.h else None
    v = build_test_function(args.v, D, h=h, strict=False)
    rep = v.validation
    body = {"command": "validate-v", "v": v.describe(), "domain": D.describe(), "b": v.b,
            "b_bound": v.b_bound, **rep.to_dict()}
    return (HOLDS if rep.passed else FAILS), _report(body)


HANDLERS = {
    "zeros": cmd_zeros, "green": cmd_green, "riesz": cmd_riesz, "blaschke": cmd_blaschke,
    "implication": cmd_implication, "inequality-c": cmd_inequality_c, "identity": cmd_identity,
    "l-bound": cmd_l_bound, "validate-v": cmd_validate_v,
}


def build_parser():
    p = _Parser(prog="blaschke-lab", description="Blaschke-type condition toolkit")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--f", help="holomorphic function spec (or @file)")
    p.add_argument("--M", help="majorant spec (real role)")
    p.add_argument("--u", help="subharmonic function spec (real role)")
    p.add_argument("--u0", help="subharmonic function spec for the L-bound")
    p.add_argument("--v", dest="v_list", action="append",
                   help="loginv | greenpole:z0 | power:q | custom:file | file.json (repeatable)")
    p.add_argument("--domain", default="unitdisk", help="unitdisk | disk:c,r | moebius:a,b,c,d | plane")
    p.add_argument("--d0", default="0.5", help="radius of D0 around the chart centre, or a domain spec")
    p.add_argument("--dtilde", help="intermediate domain for the (C) inequality")
    p.add_argument("--region", help="search region for zeros (domain spec or box:x0,y0,x1,y1)")
    p.add_argument("--zeros", help="JSON zero list file")
    p.add_argument("--truncated", action="store_true", help="mark a --zeros list as a truncated sequence")
    p.add_argument("--b", help="bound of the test functions on ∂D0")
    p.add_argument("--bound", help="user bound for divergence of a truncated sum")
    p.add_argument("--z0", help="pole / evaluation point in D0")
    p.add_argument("--z", action="append", help="evaluation point (repeatable for green)")
    p.add_argument("--r", help="circle radius for the L-bound")
    p.add_argument("--h", help="grid spacing")
    p.add_argument("--eps", help="epsilon for the L-bound")
    p.add_argument("--method", default="auto", choices=("auto", "atomic", "grid"))
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--format", default="json", choices=("json", "csv"))
    p.add_argument("--config", help="JSON file whose keys override the flags")
    return p


def _apply_config(args):
    if not args.config:
        return args
    data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise UsageError("--config must hold a JSON object")
    for key, value in data.items():
        name = key.replace("-", "_")
        if name == "v":
            name, value = "v_list", value if isinstance(value, list) else [value]
        if name in ("command", "config") or not hasattr(args, name):
            raise UsageError(f"unknown config key {key!r}")
        setattr(args, name, value)
    return args


def run(argv=None, stdout=None, stderr=None):
    """Parse ``argv``, run the command, write the output; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = _apply_config(build_parser().parse_args(argv))
        args.v = (args.v_list or ["loginv"])[0]
        if args.z is not None and isinstance(args.z, str):
            args.z = [args.z]
        verdict, out = HANDLERS[args.command](args)
        if args.format == "csv":
            if out["plot"] is None:
                raise UsageError(f"command {args.command!r} has no CSV output")
            text = plot_csv(out["plot"])
        else:
            text = dumps(out["json"])
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            stdout.write(text)
        return EXIT[verdict]
    except (UsageError, BlaschkeLabError, OSError, ValueError, KeyError, TypeError) as exc:
        message = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
        err = {"error": {"type": type(exc).__name__, "message": message}}
        stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return USAGE_EXIT


def main(argv=None):
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
