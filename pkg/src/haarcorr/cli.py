"""
Command-line front end. Every subcommand writes one table (CSV with a
header and a trailing ``# seed=..., version=..., config_hash=...`` line, or
JSON lines ending with a ``meta`` object). Output bytes depend only on the
configuration and seed, never on the worker count.

    haarcorr scaling --times 0,1,0,1 --q 4,8,16 --mode exact
    haarcorr second-moment --times 0,1,0,1 --q 8,16,32 --mode mc --n 20000 --seed 7
    haarcorr cobweb --diagram "4; 0-2, 1-3"
    haarcorr verify theorem4 --T 2 --q 4,8,16
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from typing import Any, Sequence

from . import __version__, cobweb, correlators, haar_mc, oracle, otoc, perm, verify, weingarten
from .expression import parse_expression

SEED_ENV = "HAARCORR_SEED"
MIN_Q = 2


class UsageError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _qs(args) -> list[int]:
    qs = args.q
    if any(q < MIN_Q for q in qs):
        raise UsageError(f"every q must be >= {MIN_Q}, got {qs}")
    return qs


def _even_qs(args) -> list[int]:
    qs = _qs(args)
    odd = [q for q in qs if q % 2]
    if odd:
        raise UsageError(f"the default Z = diag(+1, -1) needs even q; got {odd}")
    return qs


def _num(x: float) -> float:
    # normalise -0.0 so identical runs print identically
    return float(x) + 0.0


def _complex_cols(prefix: str, z: complex) -> dict[str, float]:
    return {f"{prefix}re": _num(z.real), f"{prefix}im": _num(z.imag)}


# -- subcommands ---------------------------------------------------------------------

def cmd_wg(args) -> list[dict[str, Any]]:
    if args.sigma:
        sigmas = [perm.parse_cycles(args.sigma, args.n)]
    else:
        sigmas = [perm.representative(ct) for ct in perm.partitions(args.n)]
    rows = []
    for q in _qs(args):
        for s in sigmas:
            rows.append({
                "n": args.n, "q": q, "sigma": perm.format_cycles(s),
                "cycle_type": "-".join(map(str, perm.cycle_type(s))),
                "wg_exact": _num(float(weingarten.wg_exact(args.n, q, s, exact=True))),
                "wg_leading": _num(weingarten.wg_leading(args.n, q, s)),
            })
    return rows


def _estimate_row(q: int, mode: str, exact_fn, mc_fn) -> dict[str, Any]:
    if mode == "exact":
        val, se = exact_fn(q), complex(0.0, 0.0)
    else:
        est = mc_fn(q)
        val, se = est.mean, est.std_error
    return {"q": q, **_complex_cols("", val), "se_re": _num(se.real), "se_im": _num(se.imag)}


def cmd_avg_corr(args) -> list[dict[str, Any]]:
    t = correlators.parse_times(args.times)
    rows = []
    for q in _even_qs(args):
        row = _estimate_row(
            q, args.mode,
            lambda q: correlators.avg_correlator_exact(t, q),
            lambda q: haar_mc.estimate(correlators.correlator_expression(t, correlators.default_z(q)),
                                       q, args.n, args.seed, args.workers))
        rows.append({"times": ",".join(map(str, t.times)), **row})
    return rows


def cmd_moments(args) -> list[dict[str, Any]]:
    if bool(args.expr) == bool(args.times):
        raise UsageError("give exactly one of --expr or --times")
    rows = []
    if args.expr:
        for q in _qs(args):
            ops = {"Z": correlators.default_z(q)} if "Z" in args.expr else {}
            expr = parse_expression(args.expr, ops, q)
            rows.append(_estimate_row(
                q, args.mode,
                lambda q: oracle.haar_average(expr, q, workers=args.workers).value,
                lambda q: haar_mc.estimate(expr, q, args.n, args.seed, args.workers)))
        return rows
    ts = [correlators.parse_times(s) for s in args.times.split(";")]
    conj = correlators.parse_conj(args.conj) if args.conj else tuple([False] * len(ts))
    if len(conj) != len(ts):
        raise UsageError(f"{len(ts)} sequences but {len(conj)} conjugation flags")
    power = 2 * (len(ts) // 2)
    for q in _even_qs(args):
        row = _estimate_row(
            q, args.mode,
            lambda q: correlators.avg_product_exact(ts, conj, q, workers=args.workers),
            lambda q: correlators.avg_product_mc(ts, conj, q, args.n, args.seed, workers=args.workers))
        row[f"re_times_q{power}"] = _num(row["re"] * q ** power)
        rows.append(row)
    return rows


def cmd_second_moment(args) -> list[dict[str, Any]]:
    t = correlators.parse_times(args.times)
    partner = correlators.parse_times(args.partner) if args.partner else t
    probe = correlators.scaling_probe(t, _even_qs(args), mode=args.mode, partner=partner,
                                      n_samples=args.n, seed=args.seed, workers=args.workers)
    rows = []
    for r in probe:
        se = r.std_error if r.std_error is not None else 0j
        rows.append({"q": r.q, **_complex_cols("", r.value), "se_re": _num(se.real / r.q ** 2),
                     "compensated": _num(r.compensated.real), "compensated_se": _num(se.real),
                     "symmetry_factor": correlators.symmetry_factor(t) if correlators.cyclic_equivalent(t, partner) else 0})
    return rows


def cmd_scaling(args) -> list[dict[str, Any]]:
    t = correlators.parse_times(args.times)
    probe = correlators.scaling_probe(t, _even_qs(args), mode=args.mode, n_samples=args.n,
                                      seed=args.seed, workers=args.workers)
    return [{"q": r.q, **_complex_cols("", r.value), "re_times_q2": _num(r.compensated.real)} for r in probe]


def cmd_otoc(args) -> list[dict[str, Any]]:
    layers = otoc.parse_layers(args.layers, args.T)
    methods = ["exact", "theorem4"] if args.mode == "both" else [args.mode]
    rows = []
    for q in _even_qs(args):
        for method in methods:
            se = 0j
            if method == "exact":
                val = otoc.otoc_exact(layers, q, workers=args.workers)
            elif method == "theorem4":
                val = otoc.theorem4_value(layers, q)
            else:
                est = otoc.otoc_mc(layers, q, args.n, args.seed, workers=args.workers)
                val, se = est.mean, est.std_error
            rows.append({"q": q, "T": args.T, "layers": otoc.format_layers(layers), "method": method,
                         **_complex_cols("", val), "se_re": _num(se.real), "re_times_q2": _num(val.real * q * q)})
    return rows


def _cobweb_row(d: cobweb.CobwebDiagram) -> dict[str, Any]:
    rep = cobweb.reduce(d)
    row = {"diagram": cobweb.format_diagram(d), "E": d.n_edges, "loops": cobweb.count_loops(d),
           "crossings": cobweb.crossings(d), "E_reduced": rep.reduced.n_edges,
           "removed_parallel": rep.removed_parallel, "removed_bubble": rep.removed_bubble,
           "loops_reduced": cobweb.count_loops(rep.reduced)}
    if d.arc_length is not None:
        row["nonvanishing"] = int(cobweb.decorated_value(d, 2) != 0)
    return row


def cmd_cobweb(args) -> list[dict[str, Any]]:
    if bool(args.diagram) == bool(args.enumerate):
        raise UsageError("give exactly one of --diagram or --enumerate")
    if args.diagram:
        d = cobweb.parse_diagram(args.diagram)
        if args.log:
            print(cobweb.reduce(d).log() or "already reduced", file=sys.stderr)
        return [_cobweb_row(d)]
    rows = []
    for d in sorted(cobweb.enumerate_leading(args.enumerate), key=lambda d: d.chords):
        row = _cobweb_row(d)
        row.update({f"E_{r}_{b}": v for (r, b), v in d.chord_classes().items()})
        rows.append(row)
    return rows


def cmd_verify(args) -> list[dict[str, Any]]:
    names = list(verify.CHECKS) if args.check == "all" else [args.check]
    rows = []
    for name in names:
        kwargs = _verify_kwargs(name, args)
        res = verify.CHECKS[name](**kwargs)
        print(res.line(), file=sys.stderr)
        rows.append({"check": name, "passed": int(res.passed), "detail": res.detail})
    return rows


def _verify_kwargs(name: str, args) -> dict[str, Any]:
    kw: dict[str, Any] = {}
    if args.q is not None:
        key = {"diaconis": "qs", "weingarten": "band_qs", "theorem1": "even_qs", "theorem2": "qs",
               "theorem3": "mc_qs", "theorem4": "qs", "haar": "q"}.get(name)
        if key == "q":
            kw[key] = args.q[0]
        elif key:
            kw[key] = args.q
    if name == "theorem4" and args.T is not None:
        kw["T"] = args.T
        if args.T != 2 and args.layers is None:
            raise UsageError("--layers is required for T != 2")
    if name == "theorem4" and args.layers is not None:
        kw["layer"] = args.layers
    if name in ("theorem3", "haar", "cobweb"):
        kw["seed"] = args.seed
    if name == "cobweb" and args.samples is not None:
        kw["samples"] = args.samples
    if name in ("theorem3", "haar") and args.n is not None:
        kw["n_samples"] = args.n
    if name in ("theorem3", "haar"):
        kw["workers"] = args.workers
    return kw


# -- plumbing ---------------------------------------------------------------------------

COMMANDS = {
    "wg": cmd_wg, "avg-corr": cmd_avg_corr, "moments": cmd_moments, "second-moment": cmd_second_moment,
    "scaling": cmd_scaling, "otoc": cmd_otoc, "cobweb": cmd_cobweb, "verify": cmd_verify,
}
_NOT_HASHED = {"output", "workers", "func", "log"}


def config_hash(args) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_HASHED}
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def render(rows: Sequence[dict[str, Any]], fmt: str, meta: dict[str, Any]) -> str:
    buf = io.StringIO()
    if fmt == "json":
        for row in rows:
            buf.write(json.dumps(row, ensure_ascii=False) + "\n")
        buf.write(json.dumps({"meta": meta}, ensure_ascii=False) + "\n")
        return buf.getvalue()
    fields: list[str] = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    buf.write("# " + ", ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    return buf.getvalue()


def _add_common(p: argparse.ArgumentParser, q_default: str | None = None, mode: bool = False) -> None:
    p.add_argument("--q", type=_int_list, default=_int_list(q_default) if q_default else None,
                   required=q_default is None, help="comma-separated dimensions")
    if mode:
        p.add_argument("--mode", choices=("exact", "mc"), default="exact")
        p.add_argument("--n", type=int, default=10_000, help="Monte Carlo samples")


def build_parser() -> argparse.ArgumentParser:
    default_seed = int(os.environ.get(SEED_ENV, "0"))
    parser = argparse.ArgumentParser(prog="haarcorr", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=default_seed, help=f"global seed (default ${SEED_ENV} or 0)")
    shared.add_argument("--format", choices=("csv", "json"), default="csv")
    shared.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
    shared.add_argument("--workers", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wg", parents=[shared], help="exact and leading-order Weingarten values")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", help='1-based cycle notation, e.g. "(1 2)"; default: one per cycle type')
    _add_common(p)

    p = sub.add_parser("avg-corr", parents=[shared], help="average of one correlator")
    p.add_argument("--times", required=True)
    _add_common(p, mode=True)

    p = sub.add_parser("moments", parents=[shared], help="average of a product of correlators or a trace expression")
    p.add_argument("--times", help='sequences separated by ";", e.g. "0,1;0,2"')
    p.add_argument("--conj", help='conjugation flags, e.g. "+-"')
    p.add_argument("--expr", help='trace expression, e.g. "tr[ U^2 ] * tr[ U^-2 ]"')
    _add_common(p, mode=True)

    p = sub.add_parser("second-moment", parents=[shared], help="<Z(t)><Z(t')>^* with q^2 compensation")
    p.add_argument("--times", required=True)
    p.add_argument("--partner", help="second sequence (default: same as --times)")
    _add_common(p, mode=True)

    p = sub.add_parser("scaling", parents=[shared], help="q sweep of one correlator")
    p.add_argument("--times", required=True)
    _add_common(p, mode=True)

    p = sub.add_parser("otoc", parents=[shared], help="physical OTOC: exact, Monte Carlo or leading-order formula")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--layers", default="", help='e.g. "1,1b;2,2b" (T-1 entries)')
    p.add_argument("--mode", choices=("exact", "mc", "theorem4", "both"), default="both")
    p.add_argument("--n", type=int, default=10_000)
    _add_common(p)

    p = sub.add_parser("cobweb", parents=[shared], help="cobweb diagram report or leading-family enumeration")
    p.add_argument("--diagram", help='"2E; a-b, c-d, ..." with optional "; colors: T"')
    p.add_argument("--enumerate", type=int, metavar="T", help="list the leading diagrams for arc length T")
    p.add_argument("--log", action="store_true", help="print the reduction steps to stderr")

    p = sub.add_parser("verify", parents=[shared], help="run an acceptance check")
    p.add_argument("check", choices=(*verify.CHECKS, "all"))
    p.add_argument("--q", type=_int_list)
    p.add_argument("--T", type=int)
    p.add_argument("--layers")
    p.add_argument("--samples", type=int)
    p.add_argument("--n", type=int)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rows = COMMANDS[args.command](args)
    except (UsageError, ValueError, KeyError) as exc:
        print(f"haarcorr {args.command}: error: {exc}", file=sys.stderr)
        return 2
    meta = {"seed": args.seed, "version": __version__, "config_hash": config_hash(args)}
    text = render(rows, args.format, meta)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        try:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"haarcorr: cannot write {args.output}: {exc}", file=sys.stderr)
            return 2
    if args.command == "verify" and not all(r["passed"] for r in rows):
        return 1
    return 0
