"""Run every verification suite at full size and collect the JSONL reports.

    python scripts/run_suites.py --out reports.jsonl --samples 100000 --threads 4

Equivalent to ``switchheat verify all`` but keeps going across suites and
prints a pass/fail count per suite at the end.
"""

import argparse
import collections
import json
import time

from switchheat.cli import SUITES, run_suite
from switchheat.config import RunConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description="full verification run")
    ap.add_argument("--out", default="reports.jsonl")
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--k", default="1,2,3,4")
    a = ap.parse_args(argv)

    cfg = RunConfig(N=a.samples, seed=a.seed)
    ks = [int(v) for v in a.k.split(",")]
    tally = collections.Counter()
    with open(a.out, "w") as fh:
        for name in SUITES[1:]:
            t0 = time.perf_counter()
            for rec in run_suite(name, cfg, ks, a.threads):
                fh.write(json.dumps(rec, default=float) + "\n")
                tally[name, rec["pass"]] += 1
            print(f"{name:<11} pass {tally[name, True]:3d}  fail {tally[name, False]:3d}  ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
