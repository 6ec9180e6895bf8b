"""Command-line front end: ``ramif eval | derive | verify``.

Exit codes: 0 success / all checks pass, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import List, Optional

import mpmath
import numpy as np

from . import __version__
from . import solver as so
from .lattice import DEFAULT_RADII_MGF, DEFAULT_RADIUS_ERS, eval_Ers, eval_G, eval_mgf
from .point import DEFAULT_PRECISION, parse_complex

log = logging.getLogger("ramif")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- configuration ---------------------------------------------------------------------

def load_config(path: Optional[str]) -> dict:
    """Optional key = value file for environment concerns (cache_dir, threads)."""
    if not path:
        return {}
    parser = configparser.ConfigParser()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    parser.read_string("[ramif]\n" + text)
    return dict(parser["ramif"])


def cache_dir(config: dict) -> Path:
    env = os.environ.get("RAMIF_CACHE")
    if env:
        return Path(env)
    if "cache_dir" in config:
        return Path(config["cache_dir"]).expanduser()
    return Path.home() / ".cache" / "ramif"


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
        return v
    return conv


def _point(text):
    try:
        z = parse_complex(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as a complex number")
    if z.imag <= 0:
        raise argparse.ArgumentTypeError(f"{text} is not in the upper half plane")
    return z


def _indices(text):
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _grid(text):
    """x0:x1:nx,y0:y1:ny"""
    try:
        xs, ys = text.split(",")
        x0, x1, nx = xs.split(":")
        y0, y1, ny = ys.split(":")
        return (float(x0), float(x1), int(nx)), (float(y0), float(y1), int(ny))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like x0:x1:nx,y0:y1:ny, got {text!r}")


# -- eval ------------------------------------------------------------------------------

def _evaluator(args):
    if args.kind == "ers":
        if args.r is None or args.s is None:
            raise UsageError("eval ers needs --r and --s")
        if args.r < 0 or args.s < 0 or args.r + args.s < 1:
            raise UsageError("eval ers needs r, s >= 0 and r + s >= 1 (the weight-zero sum diverges)")
        radius = args.radius or DEFAULT_RADIUS_ERS
        return lambda z: eval_Ers(args.r, args.s, z, radius)
    if args.kind == "mgf":
        if not args.indices:
            raise UsageError("eval mgf needs --indices, e.g. --indices 2,1,1")
        idx = args.indices
        if not 2 <= len(idx) <= 4 or min(idx) < 1:
            raise UsageError("eval mgf takes 2 to 4 positive indices")
        radius = args.radius or DEFAULT_RADII_MGF[len(idx)]
        return lambda z: eval_mgf(idx, z, radius)
    if args.k is None or args.k < 4 or args.k % 2:
        raise UsageError("eval G needs an even --k >= 4")
    terms = args.terms

    def g(z):
        v = eval_G(args.k, z, terms)
        # sigma_{k-1}(n) <= 2 n^(k-1): the omitted terms form a dominated geometric series
        qa = abs(np.exp(2j * np.pi * z))
        T = terms + 1
        ratio = qa * ((T + 1) / T) ** (args.k - 1)
        return v, 2 * T ** (args.k - 1) * qa ** T / (1 - ratio) if ratio < 1 else float("inf")
    return g


def cmd_eval(args, config) -> int:
    f = _evaluator(args)
    if args.grid:
        return _eval_grid(args, f)
    if args.z is None:
        raise UsageError("eval needs --z (or --grid)")
    t0 = time.perf_counter()
    try:
        res = f(args.z)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    secs = time.perf_counter() - t0
    value, err = (res.value, res.error) if hasattr(res, "value") else res
    value = complex(value)
    if args.format == "json":
        out = {"kind": args.kind, "z": [args.z.real, args.z.imag],
               "value": [value.real, value.imag], "error": float(err)}
        if args.timing:
            out["seconds"] = round(secs, 3)
        print(json.dumps(out, sort_keys=True))
    else:
        print(f"value  {value.real:.16g} {value.imag:+.16g}i")
        print(f"bound  {float(err):.3g}")
        print(f"time   {secs:.3f}s")
    return EXIT_OK


def _eval_grid(args, f) -> int:
    (x0, x1, nx), (y0, y1, ny) = args.grid
    if nx < 1 or ny < 1 or min(y0, y1) <= 0:
        raise UsageError("grid needs positive counts and y > 0")
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["x", "y", "re", "im", "error"])
        for y in np.linspace(y0, y1, ny):
            for x in np.linspace(x0, x1, nx):
                res = f(complex(x, y))
                value, err = (res.value, res.error) if hasattr(res, "value") else res
                value = complex(value)
                w.writerow([f"{x:.12g}", f"{y:.12g}", repr(value.real), repr(value.imag), f"{float(err):.3e}"])
    finally:
        if args.csv:
            out.close()
    return EXIT_OK


# -- derive ----------------------------------------------------------------------------------

def _parse_constants(items: List[str]) -> dict:
    out = {}
    for item in items or []:
        name, _, val = item.partition("=")
        if not val:
            raise UsageError(f"--constant expects NAME=VALUE, got {item!r}")
        try:
            with mpmath.workprec(256):
                out[name] = mpmath.mpf(val)
        except ValueError as exc:
            raise UsageError(f"constant {name} is not a number: {val!r}") from exc
    return out


def cache_path(root: Path, length, a, b, c, k, q_order, precision, constants) -> Path:
    parts = [f"L{length}", f"w{a}"] if length == 1 else [f"L{length}", f"a{a}", f"b{b}"]
    if c is not None:
        parts.append(f"c{c}")
    parts += [f"k{k}", f"N{q_order}", f"P{precision}"]
    if constants:
        blob = json.dumps(sorted((k, str(v)) for k, v in constants.items())).encode()
        parts.append(hashlib.sha1(blob).hexdigest()[:10])
    return root / ("_".join(parts) + ".json")


def derive(length, a, b, c, k, q_order, precision, constants, root: Path, echo=print):
    """Solve (or load) one family and return (path, family, cached)."""
    N = q_order or so.DEFAULT_Q_ORDER[length]
    if length == 3:
        # reject out-of-scope parameters before touching the prerequisites
        so.check_scope(3, a, b, c, k)
        for pa, pb in dict.fromkeys([(b, c), (a, b)]):
            p, _, hit = derive(2, pa, pb, None, 0, N, precision, {}, root, echo)
            echo(f"prerequisite F(0)[{2 * pa + 2},{2 * pb + 2}]: {p}" + (" (cached)" if hit else ""))
    path = cache_path(root, length, a, b, c, k, N, precision, constants)
    if path.exists():
        fam = so.family_from_json_dict(json.loads(path.read_text()))
        return path, fam, True
    if length == 1:
        fam = so.eisenstein_family(a, N, precision)
    elif length == 2:
        fam = so.length2_family(a, b, k, N, precision, constants or None)
    else:
        fam = so.length3_family(a, b, c, N, precision, constants or None)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(fam.to_json_dict(), sort_keys=True))
    tmp.replace(path)
    return path, fam, False


def cmd_derive(args, config) -> int:
    root = cache_dir(config)
    if args.length == 1:
        if args.a is None and args.w is None:
            raise UsageError("derive --length 1 needs --w (total weight)")
        a = args.w if args.w is not None else args.a
        b = c = None
    else:
        if args.a is None or args.b is None:
            raise UsageError("derive needs --a and --b")
        a, b = args.a, args.b
        c = args.c
        if args.length == 3 and c is None:
            raise UsageError("derive --length 3 needs --c")
        if args.length == 3 and args.k:
            raise UsageError("length-three families with k >= 1 need correction terms that are "
                             "not yet known (an open problem); only k = 0 is supported")
    constants = _parse_constants(args.constant)
    if args.solvable:
        if args.length != 2:
            raise UsageError("--solvable applies to length-two families")
        try:
            spec = so.build_system(2, a, b, k=args.k, q_order=args.q_order, precision_bits=args.precision)
            C, _ = so.solvability_constant(spec)
        except so.OutOfScope as exc:
            raise UsageError(str(exc)) from exc
        constants[so.constant_name(2 * a + 2, 2 * b + 2, k=args.k)] = C.real
    try:
        path, fam, hit = derive(args.length, a, b, c, args.k, args.q_order, args.precision,
                                constants, root)
    except so.OutOfScope as exc:
        raise UsageError(str(exc)) from exc
    resid, where = so.verify_family(fam) if hit else (fam.residual, fam.worst)
    status = "cached" if hit else "solved"
    print(f"{fam.spec.label} {status}: {path}")
    print(f"residual {resid:.3g}" + (f" at {where}" if where and fam.flagged else ""))
    if fam.flagged:
        print("residual above the precision threshold; see the solvability constant "
              "(ramif.solver.solvability_constant)", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- verify ----------------------------------------------------------------------------------

def cmd_verify(args, config) -> int:
    from . import identities as ids
    from . import suite

    if args.suite:
        reports = [fn() for fn in suite.CRITERIA.values()]
    else:
        if args.identity not in ids.IDENTITIES:
            print(f"unknown identity {args.identity!r}; available: "
                  f"{', '.join(sorted(ids.IDENTITIES))}", file=sys.stderr)
            return EXIT_USAGE
        reports = [ids.run_identity(args.identity)]
    for rep in reports:
        if args.format == "json":
            print(rep.to_json(timing=args.timing))
        else:
            print(rep.summary())
    if args.output:
        Path(args.output).write_text(json.dumps([r.to_json_dict(args.timing) for r in reports],
                                                indent=1, sort_keys=True))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# -- entry point -----------------------------------------------------------------------------

GLOBAL_DEFAULTS = {"precision": DEFAULT_PRECISION, "format": "table", "timing": False,
                   "config": None, "verbose": False}


def _common(defaults: bool) -> argparse.ArgumentParser:
    # shared options, accepted before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda k: GLOBAL_DEFAULTS[k]) if defaults else (lambda k: argparse.SUPPRESS)
    p.add_argument("--precision", type=_positive(int), default=d("precision"),
                   help="working precision in bits (default 128)")
    p.add_argument("--format", choices=("table", "json"), default=d("format"))
    p.add_argument("--timing", action="store_true", default=d("timing"),
                   help="include wall-clock time in JSON output")
    p.add_argument("--config", default=d("config"), help="key = value file (cache_dir, threads)")
    p.add_argument("-v", "--verbose", action="store_true", default=d("verbose"))
    return p


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ramif", description=__doc__.splitlines()[0],
                                parents=[_common(True)])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    common = _common(False)

    e = sub.add_parser("eval", help="evaluate a lattice sum or Eisenstein series", parents=[common])
    e.add_argument("kind", choices=("ers", "mgf", "G"))
    e.add_argument("--r", type=int)
    e.add_argument("--s", type=int)
    e.add_argument("--k", type=int, help="weight of G")
    e.add_argument("--indices", type=_indices)
    e.add_argument("--z", type=_point)
    e.add_argument("--radius", type=_positive(int))
    e.add_argument("--terms", type=_positive(int), default=200, help="q-series terms for G")
    e.add_argument("--grid", type=_grid, help="x0:x1:nx,y0:y1:ny point grid, written as CSV")
    e.add_argument("--csv", help="CSV file for --grid (default stdout)")
    e.set_defaults(func=cmd_eval)

    d = sub.add_parser("derive", help="solve a family and cache it", parents=[common])
    d.add_argument("--length", type=int, choices=(1, 2, 3), required=True)
    d.add_argument("--w", type=_positive(int), help="total weight (length one)")
    d.add_argument("--a", type=_positive(int))
    d.add_argument("--b", type=_positive(int))
    d.add_argument("--c", type=_positive(int))
    d.add_argument("--k", type=int, default=0)
    d.add_argument("--q-order", type=_positive(int))
    d.add_argument("--constant", action="append", metavar="NAME=VALUE",
                   help="free Eisenstein constant, e.g. C2_4_6=0.8586")
    d.add_argument("--solvable", action="store_true",
                   help="set the family's own constant to the value that makes the system solvable")
    d.set_defaults(func=cmd_derive)

    v = sub.add_parser("verify", help="run identity checks", parents=[common])
    g = v.add_mutually_exclusive_group(required=True)
    g.add_argument("--identity")
    g.add_argument("--suite", choices=("desk",))
    v.add_argument("--output", help="also write the reports to this JSON file")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except UsageError as exc:
        print(f"ramif: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
