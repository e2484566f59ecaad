"""Singular mass and remainder rates on a refined t grid, with local slopes.

Local slopes between neighbouring grid points show how slowly the singular
mass approaches its cubic regime: the curvature of the Gamma(3) distribution
function keeps the slope below 3 until t is small.

    python scripts/dqm_rates.py --model ks --tmax 0.8 --levels 10
"""
import argparse
import math

from fisherlab import dqm
from fisherlab.models import FAMILIES, ModelParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=FAMILIES, default="ks")
    ap.add_argument("--theta", type=float, default=0.0)
    ap.add_argument("--tmax", type=float, default=0.8)
    ap.add_argument("--levels", type=int, default=10)
    args = ap.parse_args()
    params = ModelParams.from_name(args.model)
    ts = [args.tmax / 2 ** k for k in range(args.levels)]
    sing = [max(dqm.singular_mass(args.theta, s * t, params) for s in (1, -1)) for t in ts]
    rem = [max(dqm.remainder_l2(args.theta, s * t, params) for s in (1, -1)) for t in ts]

    def local(vals, i):
        if i == 0 or vals[i] <= 0 or vals[i - 1] <= 0:
            return float("nan")
        return math.log(vals[i - 1] / vals[i]) / math.log(ts[i - 1] / ts[i])

    print(f"{'t':>12}{'singular':>14}{'slope':>8}{'remainder':>14}{'slope':>8}")
    for i, t in enumerate(ts):
        print(f"{t:>12.6g}{sing[i]:>14.6e}{local(sing, i):>8.4f}{rem[i]:>14.6e}{local(rem, i):>8.4f}")


if __name__ == "__main__":
    main()
