"""Coupling bound 1 - P(A_n) against n^(1/3), written as CSV.

    python scripts/tv_decay.py --ns 10,20,40,80,160 --replicates 20000 --output tv.csv
"""
import argparse

from fisherlab import lecam
from fisherlab.report import emit_report


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", default="10,20,40,80")
    ap.add_argument("--replicates", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--output", default="-")
    args = ap.parse_args()
    fit = lecam.tv_decay_fit(0.0, [int(v) for v in args.ns.split(",")], args.replicates,
                             args.seed, workers=args.workers)
    emit_report(fit, "csv", args.output)


if __name__ == "__main__":
    main()
