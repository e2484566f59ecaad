"""Scaled gap statistics against their limit law for growing n.

    python scripts/gap_limit_table.py --ns 250,1000,4000 --replicates 2000
"""
import argparse

from fisherlab import lecam
from fisherlab.lecam import SimConfig
from fisherlab.models import ModelParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", default="250,1000,4000")
    ap.add_argument("--replicates", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    print(f"limit median {lecam.GAP_LIMIT_MEDIAN:.4f}")
    print(f"{'n':>6}{'KS left':>10}{'KS right':>10}{'median L':>10}{'median R':>10}"
          f"{'P(A_n)':>9}{'Var sqrt(n) err':>17}")
    for n in (int(v) for v in args.ns.split(",")):
        cfg = SimConfig(ModelParams.ks(), 0.0, n, args.replicates, args.seed)
        res = lecam.simulate(cfg, args.workers)
        chk = lecam.gap_limit_check(cfg, result=res)
        print(f"{n:>6}{chk.ks_left:>10.4f}{chk.ks_right:>10.4f}{chk.median_left:>10.4f}"
              f"{chk.median_right:>10.4f}{res.a_n_frequency:>9.4f}"
              f"{res.sqrtn_errors.variance():>17.4f}")


if __name__ == "__main__":
    main()
