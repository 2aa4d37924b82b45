"""Command-line surface: generate symbols, apply operators, evaluate
norms and functionals, run identity checks, and execute suite configs.

Machine-readable JSON goes to stdout; human-readable summaries go to
stderr under --verbose.  Output paths are never overwritten silently;
pass --force.  Domain boxes are given as ``lo:hi`` (use the
``--domain=-1:1`` form for negative bounds).
"""

from __future__ import annotations

import argparse
import sys

from . import verify as verify_mod
from .errors import ConfigError, FracmaxError
from .grid import (
    Cube,
    CubeFamily,
    Domain,
    make_corpus,
    parse_corpus_id,
    read_gfn,
    write_csv,
    write_gfn,
)
from .maxop import FracParams, maximal, maximal_commutator, nonlinear_commutator
from .oscfun import FunctionalKind, OscFunctionalSpec, sup_functional
from .reporting import dump_json, write_cube_values_csv
from .varlex import luxemburg_norm, parse_exponent_spec


def _parse_box(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise FracmaxError(f"bad domain spec {text!r}; expected lo:hi")


def _domain_from_args(args) -> Domain:
    lo, hi = _parse_box(args.domain)
    if args.dim == 1:
        return Domain(1, lo, hi, args.cells)
    return Domain(2, (lo, lo), (hi, hi), (args.cells, args.cells))


def _family_from_args(args, cells: int) -> CubeFamily:
    if args.scales == "dyadic":
        return CubeFamily.dyadic(cells, args.stride)
    return CubeFamily.all_scales(cells, args.stride)


def _load_function(path):
    f, is_exp = read_gfn(path)
    if is_exp:
        raise FracmaxError(f"{path} holds an exponent field, not a function")
    return f


def _emit(payload, verbose: bool, summary: str = "") -> None:
    print(dump_json(payload))
    if verbose and summary:
        print(summary, file=sys.stderr)


def _add_family_flags(sub) -> None:
    sub.add_argument("--scales", choices=("dyadic", "all"), default="dyadic")
    sub.add_argument("--stride", type=int, default=1)


def _add_domain_flags(sub, cells=256) -> None:
    sub.add_argument("--domain", default="-1:1", help="box as lo:hi")
    sub.add_argument("--cells", type=int, default=cells)
    sub.add_argument("--dim", type=int, choices=(1, 2), default=1)


def _cmd_gen(args) -> int:
    dom = _domain_from_args(args)
    name, params = parse_corpus_id(args.symbol)
    params.setdefault("beta", args.beta)
    params.setdefault("c", args.c)
    params.setdefault("seed", args.seed)
    b = make_corpus(name, dom, **params)
    write_gfn(b, args.output, force=args.force)
    if args.csv:
        write_csv(b, args.csv, force=args.force)
    _emit({"written": str(args.output), "symbol": args.symbol,
           "cells": list(dom.cells), "lo": list(dom.lo), "hi": list(dom.hi)},
          args.verbose, f"wrote {args.output}")
    return 0


def _cmd_maxop(args) -> int:
    f = _load_function(args.input)
    fam = _family_from_args(args, min(f.domain.cells))
    out = maximal(f, FracParams(args.gamma), fam)
    write_gfn(out, args.output, force=args.force)
    _emit({"written": str(args.output), "gamma": args.gamma,
           "max": float(out.samples.max())}, args.verbose,
          f"max value {out.samples.max():.6g}")
    return 0


def _cmd_comm(args) -> int:
    b = _load_function(args.symbol_file)
    f = _load_function(args.input)
    fam = _family_from_args(args, min(f.domain.cells))
    gp = FracParams(args.alpha)
    if args.kind == "nonlinear":
        out = nonlinear_commutator(b, f, gp, fam)
    else:
        out = maximal_commutator(b, f, gp, fam, mode=args.mode)
    write_gfn(out, args.output, force=args.force)
    _emit({"written": str(args.output), "kind": args.kind,
           "alpha": args.alpha,
           "range": [float(out.samples.min()), float(out.samples.max())]},
          args.verbose, f"{args.kind} commutator written")
    return 0


def _cmd_norm(args) -> int:
    f = _load_function(args.input)
    p = parse_exponent_spec(args.exponent, f.domain)
    result = luxemburg_norm(f, p)
    _emit(result, args.verbose, f"norm {result.value:.12g}")
    return 0


def _cmd_functional(args) -> int:
    b = _load_function(args.symbol_file)
    dom = b.domain
    kind = FunctionalKind.parse(args.kind)
    s = args.s
    if s.startswith("const:"):
        s_val = float(s.split(":", 1)[1])
    else:
        s_val = parse_exponent_spec(s, dom)
    spec = OscFunctionalSpec(kind=kind, alpha=args.alpha, beta=args.beta,
                             s=s_val, inner_q=args.inner_q,
                             gamma_for_max=args.gamma_for_max)
    fam = _family_from_args(args, min(dom.cells))
    report = sup_functional(b, spec, fam, collect=args.dump_cubes is not None)
    if args.dump_cubes:
        write_cube_values_csv(args.dump_cubes, dom.dim, report.cube_values,
                              force=args.force)
    payload = report.to_dict()
    payload.update(kind=kind.value, alpha=args.alpha, beta=args.beta,
                   s=args.s)
    _emit(payload, args.verbose,
          f"sup {report.sup_value:.6g} over {report.cubes_evaluated} cubes")
    return 0


def _cmd_check(args) -> int:
    entry: dict = {"kind": args.name, "cells": args.cells, "seed": args.seed}
    lo, hi = _parse_box(args.domain)
    half = (hi - lo) / 2.0
    domain_cfg = {"dim": args.dim, "half_width": half, "cells": args.cells}
    family_cfg = {"policy": args.scales, "stride": args.stride}
    if args.symbol:
        entry["symbols"] = args.symbol
    if args.alpha is not None:
        entry["alphas"] = [args.alpha]
        entry["alpha"] = args.alpha
    if args.beta is not None:
        entry["beta"] = args.beta
    if args.gamma is not None:
        entry["gamma"] = args.gamma
    if args.exponent is not None:
        entry["exponent"] = args.exponent
    if args.pairs is not None:
        entry["pairs"] = args.pairs
    reports = verify_mod._run_check_entry(entry, domain_cfg, family_cfg, 0)
    payload = [r.to_dict() for r in reports]
    ok = all(r.passed for r in reports)
    _emit(payload, args.verbose,
          f"{args.name}: {'all pass' if ok else 'FAILURES'} "
          f"({len(reports)} records)")
    return 0 if ok else 1


def _cmd_verify(args) -> int:
    if args.config is None:
        from importlib.resources import files

        config = verify_mod.load_config(
            files("fracmax").joinpath("data/default_suite.toml")
        )
    else:
        config = verify_mod.load_config(args.config)
    records, code = verify_mod.run_suite(
        config, report_path=args.report, plots_dir=args.plots,
        threads=args.threads,
    )
    if args.report is None:
        print(dump_json(records))
    if args.verbose:
        failed = [r for r in records if not r.get("pass", True)]
        print(f"{len(records)} records, {len(failed)} failures",
              file=sys.stderr)
        for r in failed:
            print(f"  FAIL {r.get('check', r.get('name'))}", file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracmax",
        description="Discretized fractional maximal operators, commutators, "
                    "variable-exponent norms, and their verification harness.",
    )
    parser.add_argument("--verbose", action="store_true",
                        help="human-readable summaries on stderr")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker cap for suite experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a corpus symbol")
    p.add_argument("--symbol", required=True)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    _add_domain_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--csv", default=None, help="also export CSV here")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("maxop", help="apply the fractional maximal operator")
    p.add_argument("--gamma", type=float, default=0.0)
    _add_family_flags(p)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_maxop)

    p = sub.add_parser("comm", help="apply a commutator")
    p.add_argument("--kind", choices=("nonlinear", "maximal"), required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--mode", choices=("brute", "fast"), default="brute")
    _add_family_flags(p)
    p.add_argument("-b", "--symbol-file", required=True)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_comm)

    p = sub.add_parser("norm", help="Luxemburg norm of a grid function")
    p.add_argument("--exponent", required=True,
                   help="const:<value> or file:<path>")
    p.add_argument("-i", "--input", required=True)
    p.set_defaults(func=_cmd_norm)

    p = sub.add_parser("functional", help="sup of an oscillation functional")
    p.add_argument("--kind", required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--s", default="const:1")
    p.add_argument("--inner-q", type=float, default=1.0)
    p.add_argument("--gamma-for-max", type=float, default=0.0)
    _add_family_flags(p)
    p.add_argument("-b", "--symbol-file", required=True)
    p.add_argument("--dump-cubes", default=None,
                   help="CSV of per-cube values")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_functional)

    p = sub.add_parser("check", help="run one identity/inequality check")
    p.add_argument("--name", required=True,
                   choices=verify_mod._CHECK_KINDS)
    p.add_argument("--symbol", action="append", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--exponent", default=None)
    p.add_argument("--pairs", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    _add_domain_flags(p, cells=128)
    _add_family_flags(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("verify", help="run a verification suite config")
    p.add_argument("--config", default=None,
                   help="TOML suite; bundled default when omitted")
    p.add_argument("--report", default=None, help="write JSON report here")
    p.add_argument("--plots", default=None,
                   help="render per-study CSV + PNG figures here")
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FracmaxError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except FileExistsError as exc:
        print(f"refusing to overwrite: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
