"""Fisher information, defect and sufficiency witness for every family over a theta sweep.

    python scripts/information_table.py --thetas -2,0,1,3
"""
import argparse

from fisherlab import projection
from fisherlab.models import ModelParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--thetas", default="-2,0,1,3")
    args = ap.parse_args()
    thetas = [float(t) for t in args.thetas.split(",")]
    families = [ModelParams.ks(), ModelParams.variant(0.4, 0.7), ModelParams.control()]
    print(f"{'family':<11}{'theta':>7}{'I_P':>14}{'I_Q':>14}{'defect':>12}  preserved  witness")
    for params in families:
        for theta in thetas:
            r = projection.pythagoras_check(theta, params)
            w = projection.sufficiency_witness(theta, theta + 1.0, params)
            print(f"{params.family:<11}{theta:>7.2f}{r.info_P:>14.10f}{r.info_Q:>14.10f}"
                  f"{r.defect:>12.2e}  {str(r.preserved):<9}  {w:.7f}")


if __name__ == "__main__":
    main()
