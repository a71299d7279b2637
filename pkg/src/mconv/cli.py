"""Command-line surface.  All inputs and outputs are the JSON documents of the
owning modules; everything is deterministic (there is no RNG anywhere in the
product path).

Exit status: 0 success / verdict pass, 1 verdict fail, 2 usage or validation error."""

from __future__ import annotations

import argparse
import json
import sys

from .convolution import mc, mc_selfcheck
from .errors import MconvError
from .fields import make_residue_map, rational_field
from .groups import reduce_tuple, sl_certificate
from .linalg import jordan_data
from .pipeline import PipelineConfig, run_pipeline
from .tuples import (
    construct_T,
    construct_rank_one,
    deserialize,
    entry_census,
    rank_one_from_json,
    serialize,
    tensor_rank_one,
)

MODES = {"sl": "SL", "slpm": "SL_plus_minus"}


def _load_tuple(path):
    with open(path, "rb") as fh:
        return deserialize(fh.read())


def _write_json(doc, path):
    if path == "-":
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_tuple(t, path):
    if path == "-":
        sys.stdout.write(serialize(t).decode() + "\n")
        return
    with open(path, "wb") as fh:
        fh.write(serialize(t))
        fh.write(b"\n")


def cmd_construct(args):
    t = construct_T(args.m, args.r)
    _write_tuple(t, args.output)
    return 0


def cmd_rank_one(args):
    c = construct_rank_one(args.pattern, args.r, rational_field())
    _write_json(c.to_json_dict(), args.output)
    return 0


def cmd_tensor(args):
    t = _load_tuple(args.tuple)
    with open(args.rank_one, "r", encoding="utf-8") as fh:
        c = rank_one_from_json(json.load(fh))
    _write_tuple(tensor_rank_one(t, c), args.output)
    return 0


def cmd_convolve(args):
    t = _load_tuple(args.input)
    lam = t.field.element(_parse_scalar(args.lam, t.field))
    _write_tuple(mc(t, lam), args.output)
    return 0


def cmd_analyze(args):
    t = _load_tuple(args.input)
    orders = args.orders or _default_orders(t)
    doc = {
        "rank": t.n,
        "r": t.r,
        "census": entry_census(t).to_json(),
        "jordan": [
            {"index": i, **jordan_data(m, orders).to_json()}
            for i, m in enumerate(t.entries, start=1)
        ],
    }
    _write_json(doc, "-")
    return 0


def cmd_reduce(args):
    t = _load_tuple(args.input)
    rmap = make_residue_map(t.field, args.ell, args.k)
    _write_tuple(reduce_tuple(t, rmap), args.output)
    return 0


def cmd_certify(args):
    t = _load_tuple(args.input)
    cert = sl_certificate(t, mode=MODES[args.mode])
    _write_json(cert.to_json(), "-")
    return 0 if cert.verdict else 1


def cmd_pipeline(args):
    config = PipelineConfig(
        family=args.family,
        m=args.m,
        r=args.r,
        q=args.q,
        mode=MODES[args.mode] if args.mode else None,
        report_path=args.report,
    )
    report = run_pipeline(config)
    if args.report is None:
        _write_json(report.to_json_dict(), "-")
    return 0 if report.verdict else 1


def cmd_selfcheck(args):
    t = _load_tuple(args.input)
    lam = t.field.element(_parse_scalar(args.lam, t.field))
    rep = mc_selfcheck(t, lam)
    _write_json(rep, "-")
    return 0 if rep["pass"] else 1


def _parse_scalar(text, field):
    from .fields import _qparse

    return field.from_rational(_qparse(text))


def _default_orders(t):
    orders = {1, 2, 4}
    n = getattr(t.field, "order", None)
    if n:
        orders.add(n)
    if t.field.kind == "finite":
        orders.add(t.field.q - 1)
    return sorted(orders)


def build_parser():
    p = argparse.ArgumentParser(prog="mconv", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build the rank-2 tuple for (m, r)")
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--r", type=int, required=True)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_construct)

    c = sub.add_parser("rank-one", help="build a named rank-one twist tuple")
    c.add_argument("--pattern", required=True, choices=["N1", "N2", "N3", "N4", "N5", "L5"])
    c.add_argument("--r", type=int, required=True)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_rank_one)

    c = sub.add_parser("tensor", help="twist a tuple by a rank-one tuple")
    c.add_argument("tuple")
    c.add_argument("rank_one")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_tensor)

    c = sub.add_parser("convolve", help="middle convolution MC_lambda")
    c.add_argument("input")
    c.add_argument("--lambda", dest="lam", default="-1")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_convolve)

    c = sub.add_parser("analyze", help="print census and Jordan data")
    c.add_argument("input")
    c.add_argument("--orders", type=int, nargs="+")
    c.set_defaults(func=cmd_analyze)

    c = sub.add_parser("reduce", help="reduce a tuple to finite-field coefficients")
    c.add_argument("input")
    c.add_argument("--ell", type=int, required=True)
    c.add_argument("--k", type=int, default=None)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_reduce)

    c = sub.add_parser("certify", help="run the special-linear certificate battery")
    c.add_argument("input")
    c.add_argument("--mode", required=True, choices=["sl", "slpm"])
    c.set_defaults(func=cmd_certify)

    c = sub.add_parser("pipeline", help="run a full family pipeline with oracle comparison")
    c.add_argument("--family", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--r", type=int, required=True)
    c.add_argument("--q", type=int, default=None)
    c.add_argument("--mode", choices=["sl", "slpm"], default=None)
    c.add_argument("--report", default=None)
    c.set_defaults(func=cmd_pipeline)

    c = sub.add_parser("selfcheck", help="convolution consistency report for a tuple")
    c.add_argument("input")
    c.add_argument("--lambda", dest="lam", default="-1")
    c.set_defaults(func=cmd_selfcheck)

    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MconvError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
