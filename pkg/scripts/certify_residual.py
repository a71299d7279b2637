#!/usr/bin/env python3
"""Run the full residual certification for every family at one (m, r, q) and print a
compact summary of the certificate battery.

Usage:
    python scripts/certify_residual.py [--m 4] [--r 9] [--q 5]
"""

import argparse
import json

from mconv.pipeline import PipelineConfig, run_pipeline


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--r", type=int, default=9)
    ap.add_argument("--q", type=int, default=5)
    ap.add_argument("--report-dir", default=None, help="write full JSON reports here")
    args = ap.parse_args()

    for fam in (1, 2, 3, 4):
        path = f"{args.report_dir}/family{fam}_m{args.m}_r{args.r}_q{args.q}.json" if args.report_dir else None
        rep = run_pipeline(
            PipelineConfig(family=fam, m=args.m, r=args.r, q=args.q, report_path=path)
        )
        d = rep.to_json_dict()
        res = d["residual"]
        cert = res["certificate"]
        flags = " ".join(
            f"{name}={'+' if c['pass'] else 'X'}" for name, c in cert["checks"].items()
        )
        print(
            f"family {fam}: n={cert['n']} mode={cert['mode']} "
            f"oracle={'+' if d['result']['oracle']['match'] else 'X'} "
            f"verdict={'PASS' if cert['verdict'] else 'FAIL'}"
        )
        print(f"  {flags}")
        print(f"  base_change={json.dumps(res['base_change_commutes'])}")
        print(f"  theorem_bound={json.dumps(res['theorem_bound'])}", flush=True)


if __name__ == "__main__":
    main()
