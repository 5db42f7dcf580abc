"""Command-line entry point.

Exit status: 0 on success, 1 on bad input (expression syntax, malformed JSON,
invalid parameters), 2 when a size guard stops the run.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields
from typing import List, Optional

from . import __version__
from .automaton import build_from_function, export_dot, load_machine
from .config import RunConfig, load_config
from .errors import GuardError
from .expr import ConsistentUpTo, check_lipschitz, eval_mod
from .grammar import parse_expr
from .padic import check_prime, parse_padic
from .plot import (ClassifyPolicy, classify, grid_line_cells, mirror_check, occupancy,
                   render)
from .transitivity import (check_absolute_transitive, check_complete_transitive,
                           sufficient_condition_certificate, word_transitive_up_to)
from .words import Word

FORMAT_VERSION = 1

QUADRATIC = "2*x^2+3*x+1"
LACUNARY = "x+(x^2|-131065)"
FIGURES = [(QUADRATIC, 16), (QUADRATIC, 18), (QUADRATIC, 20), (QUADRATIC, 23),
           (LACUNARY, 16), (LACUNARY, 17), (LACUNARY, 18), (LACUNARY, 22)]


# ---------------------------------------------------------------------------
# helpers


def _int_list(text: str) -> List[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _const(text: str):
    name, sep, val = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), int(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"constant {name!r} needs an integer value")


def _report(obj: dict, kind: str, args) -> dict:
    out = {"format": kind, "version": FORMAT_VERSION, "p": args.p}
    if getattr(args, "expr", None):
        out["expr"] = args.expr
    if getattr(args, "machine", None):
        out["machine"] = os.path.basename(args.machine)
    out.update(obj)
    return out


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write(path: str, data: bytes) -> None:
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(data)


def _expr(args):
    if not args.expr:
        raise ValueError("an expression is required (--expr)")
    return parse_expr(args.expr, args.p, args.consts)


def _target(args):
    """Machine file if given, else the expression."""
    if args.machine:
        m = load_machine(args.machine)
        if m.prime != args.p and args.p_given:
            raise ValueError(f"machine is over F_{m.prime} but --p {args.p} was given")
        args.p = m.prime
        return m
    return _expr(args)


def _emit(args, text: str) -> None:
    out = getattr(args, "out", None)
    if out:
        _write(out, text.encode())
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args) -> int:
    e = _expr(args)
    try:
        xv = int(args.x)
    except ValueError:
        xv = parse_padic(args.x).residue
    print(eval_mod(e, xv, args.k))
    if args.check:
        res = check_lipschitz(e, args.k, trials=args.trials, seed=args.seed)
        if isinstance(res, ConsistentUpTo):
            print(f"ConsistentUpTo level={res.level} trials={res.trials}")
        else:
            print(f"Violation x={res.x} y={res.y} level={res.level}")
            return 1
    return 0


def cmd_automaton_run(args) -> int:
    a = _target(args)
    if not getattr(a, "finite", False):
        a = build_from_function(a)
    w = Word.parse(args.word, args.p)
    print(a.run(w))
    return 0


def cmd_automaton_dot(args) -> int:
    a = _target(args)
    if not getattr(a, "finite", False):
        a = build_from_function(a)
        if args.depth is None:
            raise ValueError("--depth is required for expression-built automata")
    _emit(args, export_dot(a, args.depth))
    return 0


def cmd_transit_levels(args) -> int:
    rep = word_transitive_up_to(_target(args), args.max_n)
    if args.json:
        _emit(args, _dump(_report(rep.to_json(), "transit-levels", args)))
    else:
        lines = [f"{lv.n}\t{lv.status}" for lv in rep.levels]
        _emit(args, "\n".join(lines) + "\n")
        print(rep.verdict, file=sys.stderr)
    return 0


def _pair_text(rep) -> str:
    lines = [f"verdict\t{rep.verdict}"]
    for r in rep.results:
        head = f"{r.x}|" if r.x is not None else ""
        tail = f"y={r.prefix}" if r.found else f"exhausted<={r.exhausted_up_to}"
        lines.append(f"{head}{r.w}->{r.w_prime}\t{tail}")
    if rep.refuted:
        lines.append("refuted\t" + " ".join(str(w) for w in rep.refuted))
    return "\n".join(lines) + "\n"


def cmd_transit_complete(args) -> int:
    rep = check_complete_transitive(_target(args), args.n, args.lmax, jobs=args.jobs)
    _emit(args, _dump(_report(rep.to_json(), "transit-complete", args)) if args.json
          else _pair_text(rep))
    return 0


def cmd_transit_absolute(args) -> int:
    rep = check_absolute_transitive(_target(args), args.n, args.xlen, args.lmax, jobs=args.jobs)
    _emit(args, _dump(_report(rep.to_json(), "transit-absolute", args)) if args.json
          else _pair_text(rep))
    return 0


def cmd_transit_certify(args) -> int:
    cert = sufficient_condition_certificate(_expr(args), args.bound)
    if args.json:
        _emit(args, _dump(_report(cert.to_json(), "certificate", args)))
    else:
        lines = [f"class\t{cert.cls}"]
        if cert.ok:
            lines += [f"v\t{cert.v}", f"mode\t{cert.mode}",
                      f"second_derivative\t{json.dumps(cert.second, sort_keys=True)}"]
            lines += [f"condition\t{c}" for c in cert.conditions]
        else:
            lines.append(f"reason\t{cert.reason}")
        _emit(args, "\n".join(lines) + "\n")
    return 0


def _default_m(args) -> int:
    return args.m if args.m is not None else min(args.k, 10)


def cmd_plot(args) -> int:
    e = _expr(args)
    m = _default_m(args)
    grid = occupancy(e, args.k, m, jobs=args.jobs, stream=args.stream)
    meta = {"version": FORMAT_VERSION, "expr": args.expr}
    outs = args.out or []
    if not outs:
        sys.stdout.write(render(grid, "json", **meta).decode())
    for path in outs:
        ext = os.path.splitext(path)[1].lstrip(".").lower()
        if ext == "png":
            from .figures import grid_figure, save_figure
            save_figure(grid_figure(grid, f"{args.expr}  k={args.k}, m={m}"), path)
        else:
            _write(path, render(grid, ext, **meta))
    if outs:
        st = grid.stats()
        print(f"occupied {st['occupied']}/{st['total_cells']} alpha_hat {st['alpha_hat']:.6f}")
    return 0


def cmd_measure(args) -> int:
    e = _expr(args)
    m = args.m if args.m is not None else 6
    policy = ClassifyPolicy(ks=tuple(args.ks), m=m)
    cls = classify(e, policy, jobs=args.jobs)
    if args.figure:
        from .figures import save_figure, trend_figure
        save_figure(trend_figure(cls.trend, args.expr), args.figure)
    if args.json:
        _emit(args, _dump(_report(cls.to_json(), "measure", args)))
    else:
        t = cls.trend
        lines = ["k\talpha_fixed\talpha_refined"]
        lines += [f"{k}\t{a:.6f}\t{b:.6f}" for k, a, b in zip(t.ks, t.alpha_fixed, t.alpha_refined)]
        lines.append(f"verdict\t{cls.verdict} (heuristic)")
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_mirror(args) -> int:
    e = _expr(args)
    rep = mirror_check(e, args.k)
    d = rep.to_json()
    if args.m is not None:
        neg = -e
        d["cells"] = {"m": args.m,
                      "occupied_f": occupancy(e, args.k, args.m).occupied,
                      "occupied_neg_f": occupancy(neg, args.k, args.m).occupied,
                      "grid_line_cells_f": grid_line_cells(e, args.k, args.m),
                      "grid_line_cells_neg_f": grid_line_cells(neg, args.k, args.m)}
    if args.json:
        _emit(args, _dump(_report(d, "mirror", args)))
    else:
        _emit(args, "".join(f"{key}\t{val}\n" for key, val in d.items()))
    return 0


def cmd_repro_figures(args) -> int:
    from .figures import panel_figure, save_figure
    outdir = args.out or "figs"
    os.makedirs(outdir, exist_ok=True)
    grids, titles, summary = [], [], []
    for idx, (text, k) in enumerate(FIGURES, 1):
        e = parse_expr(text, 2)
        m = args.m if args.m is not None else min(k, 10)
        grid = occupancy(e, k, m, jobs=args.jobs)
        name = f"fig{idx}"
        _write(os.path.join(outdir, name + ".pgm"), render(grid, "pgm"))
        _write(os.path.join(outdir, name + ".json"),
               render(grid, "json", version=FORMAT_VERSION, expr=text, figure=idx))
        grids.append(grid)
        titles.append(f"{name}: {text}, k={k}")
        summary.append(f"{name},{text},{k},{m},{grid.occupied},{grid.total_cells}")
    _write(os.path.join(outdir, "figures.csv"),
           ("figure,expr,k,m,occupied,total_cells\n" + "\n".join(summary) + "\n").encode())
    save_figure(panel_figure(grids, titles), os.path.join(outdir, "panel.png"))
    print("\n".join(summary))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=None, help="prime (default 2)")
    common.add_argument("--expr", default=None, help="function expression, e.g. '2*x^2+3*x+1'")
    common.add_argument("--machine", default=None, help="finite machine JSON file")
    common.add_argument("--const", type=_const, action="append", default=[],
                        metavar="NAME=VALUE", help="bind a named constant")
    common.add_argument("--config", default=None, help="key=value or JSON config file")
    common.add_argument("--jobs", type=int, default=None,
                        help="worker threads (default from PADIC_AUTOMATA_JOBS or 1)")
    common.add_argument("--seed", type=int, default=None)

    def single_out(sp):
        sp.add_argument("--out", default=None, help="write to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="padic-automata",
                                     description="p-adic automata toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("eval", parents=[common], help="evaluate f(x) mod p^k")
    sp.add_argument("--x", required=True, help="integer or p-adic literal p:k:digits")
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--check", action="store_true", help="also run the sampled 1-Lipschitz check")
    sp.add_argument("--trials", type=int, default=10_000)
    sp.set_defaults(func=cmd_eval)

    ap = sub.add_parser("automaton", help="automaton tools").add_subparsers(dest="action", required=True)
    sp = ap.add_parser("run", parents=[common], help="feed a word to a machine")
    sp.add_argument("--word", required=True, help="input word, most significant letter first")
    sp.set_defaults(func=cmd_automaton_run)
    sp = ap.add_parser("dot", parents=[common], help="Graphviz export")
    sp.add_argument("--depth", type=int, default=None)
    single_out(sp)
    sp.set_defaults(func=cmd_automaton_dot)

    tp = sub.add_parser("transit", help="transitivity checks").add_subparsers(dest="action", required=True)
    sp = tp.add_parser("levels", parents=[common], help="word transitivity for n = 1..N")
    sp.add_argument("--max-n", dest="max_n", type=int, default=None)
    sp.add_argument("--json", action="store_true")
    single_out(sp)
    sp.set_defaults(func=cmd_transit_levels)
    for name, fn in (("complete", cmd_transit_complete), ("absolute", cmd_transit_absolute)):
        sp = tp.add_parser(name, parents=[common], help=f"{name} transitivity witnesses")
        sp.add_argument("--n", type=int, default=None)
        sp.add_argument("--lmax", type=int, default=None)
        if name == "absolute":
            sp.add_argument("--xlen", type=int, default=None)
        sp.add_argument("--json", action="store_true")
        single_out(sp)
        sp.set_defaults(func=fn)
    sp = tp.add_parser("certify", parents=[common], help="sufficient-condition certificate")
    sp.add_argument("--bound", type=int, default=None)
    sp.add_argument("--json", action="store_true")
    single_out(sp)
    sp.set_defaults(func=cmd_transit_certify)

    sp = sub.add_parser("plot", parents=[common], help="rasterize E_k(f)")
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--m", type=int, default=None, help="grid exponent (default min(k, 10))")
    sp.add_argument("--out", action="append", default=None,
                    help="output file (.pgm, .csv, .json or .png); repeatable")
    sp.add_argument("--stream", action="store_true", help="lift the point-count guard")
    sp.set_defaults(func=cmd_plot)

    sp = sub.add_parser("measure", parents=[common], help="occupancy trend and heuristic class")
    sp.add_argument("--ks", type=_int_list, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--figure", default=None, help="write a trend plot (PNG)")
    single_out(sp)
    sp.set_defaults(func=cmd_measure)

    sp = sub.add_parser("mirror", parents=[common], help="pointwise check of f versus -f")
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--m", type=int, default=None, help="also compare occupied cells on this grid")
    sp.add_argument("--json", action="store_true")
    single_out(sp)
    sp.set_defaults(func=cmd_mirror)

    rp = sub.add_parser("repro", help="reproduction harness").add_subparsers(dest="action", required=True)
    sp = rp.add_parser("figures", parents=[common], help="regenerate the eight occupancy figures")
    sp.add_argument("--m", type=int, default=None, help="grid exponent (default min(k, 10))")
    single_out(sp)
    sp.set_defaults(func=cmd_repro_figures)
    return parser


def _apply_config(args) -> None:
    """Fill unset options from the config file (or built-in defaults)."""
    cfg = load_config(args.config) if args.config else RunConfig()
    args.p_given = args.p is not None
    for f in fields(RunConfig):
        if f.name == "consts":
            continue
        if hasattr(args, f.name) and getattr(args, f.name) is None:
            setattr(args, f.name, getattr(cfg, f.name))
    consts = dict(cfg.consts)
    consts.update(dict(args.const))
    args.consts = consts
    check_prime(args.p)
    if args.jobs < 1:
        raise ValueError("--jobs must be >= 1")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return args.func(args)
    except GuardError as exc:
        print(f"error: {exc} (raise the limit or narrow the parameters)", file=sys.stderr)
        return 2
    except (ValueError, OSError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
