"""Command-line front end.

Exit codes: 0 success, 1 verification failure (a DQM condition, the
Pythagoras identity, the coupling identity, a limit-law or decay check, an
unwritable output), 2 usage error.  Data goes to ``--output`` (stdout by
default); diagnostics go to stderr.

``--config FILE`` reads ``key = value`` lines (keys are long option names,
with or without the leading dashes); flags given on the command line win.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import dqm, lecam, projection
from .models import FAMILIES, ModelParams
from .numerics import DEFAULT_TOL, QuadratureError
from .report import InfoTable, render

COMMANDS = ("info", "dqm", "project", "simulate", "gaps", "tvrate")


def _floats(raw: str) -> list[float]:
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {raw!r}")


def _ints(raw: str) -> list[int]:
    try:
        return [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}")


def _add_common(p: argparse.ArgumentParser, theta_list: bool = False) -> None:
    p.add_argument("--model", choices=FAMILIES, default="ks")
    p.add_argument("--alpha", type=float, default=None, help="ks_variant: mu{+1} (default 0.4)")
    p.add_argument("--beta", type=float, default=None, help="ks_variant: mixture weight (default 0.7)")
    if theta_list:
        p.add_argument("--theta", type=_floats, default=[-2.0, 0.0, 1.0, 3.0],
                       help="comma-separated parameter values")
    else:
        p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", default="-", help="output path, '-' for stdout")
    p.add_argument("--config", default=None, help="key=value file; flags override it")


def _add_sim(p: argparse.ArgumentParser, n: int, replicates: int) -> None:
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--replicates", type=int, default=replicates)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--mle-grid", type=int, default=512)
    p.add_argument("--mle-refinements", type=int, default=60)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fisherlab",
        description="Gamma location experiment with a hidden sign: Fisher information, "
                    "DQM certification and large-sample simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="Fisher information of the full and the y-only experiment")
    _add_common(p, theta_list=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("dqm", help="certify differentiability in quadratic mean")
    _add_common(p)
    p.add_argument("--t-grid", type=_floats, default=list(dqm.DEFAULT_T_GRID))
    p.add_argument("--threshold", type=float, default=dqm.SLOPE_THRESHOLD)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("project", help="score projection, information defect, sufficiency witness")
    _add_common(p)
    p.add_argument("--theta2", type=float, default=None, help="witness parameter (default theta+1)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("simulate", help="Monte Carlo of MLE, gaps and sign reconstruction")
    _add_common(p)
    _add_sim(p, n=100, replicates=1000)

    p = sub.add_parser("gaps", help="compare scaled gaps with their limit law")
    _add_common(p)
    _add_sim(p, n=4000, replicates=4000)
    p.add_argument("--ks-threshold", type=float, default=lecam.GAP_KS_THRESHOLD)
    p.add_argument("--median-tolerance", type=float, default=lecam.GAP_MEDIAN_TOLERANCE)

    p = sub.add_parser("tvrate", help="decay of the coupling bound 1 - P(A_n)")
    _add_common(p)
    p.add_argument("--n-grid", type=_ints, default=[10, 20, 40, 80])
    p.add_argument("--replicates", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    return parser


def read_config(path: str) -> list[str]:
    """Turn a key=value file into flag tokens."""
    tokens: list[str] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key == "config":
            raise ValueError(f"{path}:{lineno}: nested config files are not supported")
        tokens += [f"--{key}", value]
    return tokens


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--flag -2,0`` as ``--flag=-2,0``; argparse would read ``-2,0`` as an option."""
    out: list[str] = []
    for tok in argv:
        if (out and out[-1].startswith("--") and "=" not in out[-1]
                and tok.startswith("-") and _is_number_list(tok)):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def _is_number_list(tok: str) -> bool:
    try:
        [float(x) for x in tok.split(",")]
    except ValueError:
        return False
    return True


def _expand_config(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv[1:])
    if not argv or known.config is None:
        return argv
    try:
        tokens = read_config(known.config)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))
    return [argv[0], *tokens, *argv[1:]]


def _validate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> ModelParams:
    if args.model != "ks_variant" and (args.alpha is not None or args.beta is not None):
        parser.error("--alpha/--beta only apply to --model ks_variant")
    try:
        params = ModelParams.from_name(args.model, args.alpha, args.beta)
    except ValueError as exc:
        parser.error(str(exc))
    if getattr(args, "tol", 1.0) <= 0:
        parser.error("--tol must be positive")
    if args.command == "dqm":
        grid = args.t_grid
        if len(grid) < 3 or any(not 0 < t <= 1 for t in grid):
            parser.error("--t-grid needs at least three entries in (0, 1]")
    if args.command in ("simulate", "gaps"):
        if args.n < 2:
            parser.error("--n must be at least 2")
        if args.replicates < 1:
            parser.error("--replicates must be at least 1")
        if args.mle_grid < 3 or args.mle_refinements < 0:
            parser.error("--mle-grid must be >= 3 and --mle-refinements >= 0")
    if args.command == "gaps" and params.family != "ks":
        parser.error("gaps is only defined for --model ks")
    if args.command == "tvrate":
        g = args.n_grid
        if len(g) < 3 or g[0] < 2 or any(b <= a for a, b in zip(g, g[1:])):
            parser.error("--n-grid must be increasing, >= 2, with at least three entries")
        if args.replicates < 1:
            parser.error("--replicates must be at least 1")
    if hasattr(args, "seed") and args.seed < 0:
        parser.error("--seed must be nonnegative")
    if hasattr(args, "workers") and args.workers < 1:
        parser.error("--workers must be at least 1")
    return params


def _run(args: argparse.Namespace, params: ModelParams):
    """Returns (report, verification_ok)."""
    cmd = args.command
    if cmd == "info":
        thetas = tuple(float(t) for t in args.theta)
        table = InfoTable(
            family=params.family, theta=thetas,
            info_P=tuple(projection.fisher_info_P(t, params, args.tol) for t in thetas),
            info_Q=tuple(projection.fisher_info_Q(t, params, args.tol) for t in thetas),
        )
        return table, True
    if cmd == "dqm":
        rep = dqm.dqm_verify(args.theta, args.t_grid, params, args.threshold, args.tol)
        return rep, rep.ok
    if cmd == "project":
        info = projection.pythagoras_check(args.theta, params, args.tol)
        theta2 = args.theta + 1.0 if args.theta2 is None else args.theta2
        witness = projection.sufficiency_witness(args.theta, theta2, params)
        return projection.ProjectionSummary(params.family, info, theta2, witness), True
    if cmd in ("simulate", "gaps"):
        config = lecam.SimConfig(params, args.theta, args.n, args.replicates, args.seed,
                                 args.mle_grid, args.mle_refinements)
        if cmd == "simulate":
            return lecam.simulate(config, args.workers), True
        chk = lecam.gap_limit_check(config, args.workers, ks_threshold=args.ks_threshold,
                                    median_tolerance=args.median_tolerance)
        return chk, chk.passed
    fit = lecam.tv_decay_fit(args.theta, args.n_grid, args.replicates, args.seed,
                             params, args.workers)
    return fit, fit.passed


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _attach_negative_values(_expand_config(argv, parser))
    args = parser.parse_args(argv)
    params = _validate(args, parser)
    try:
        report, ok = _run(args, params)
    except (projection.PythagorasViolation, lecam.CouplingViolation, QuadratureError) as exc:
        print(f"fisherlab {args.command}: verification failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"fisherlab {args.command}: {exc}", file=sys.stderr)
        return 1
    text = render(report, args.format)
    if args.output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        try:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"fisherlab: cannot write {args.output}: {exc}", file=sys.stderr)
            return 1
    if not ok:
        print(f"fisherlab {args.command}: verification failed", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())
