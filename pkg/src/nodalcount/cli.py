"""Command-line front end.

Machine-readable JSON goes to stdout, log lines to stderr. Exit status is 0
on success, 1 for usage errors and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .domain import Disk, Rectangle, SpectralWindow, TrigPolynomial, enumerate_modes
from .ensemble import CoefficientVector, WaveModel
from .kacrice import (DegenerateC11, EmptyWindow, GramInconsistency, asymptotic_prediction,
                      expected_zero_count, weyl_diagnostics, write_weyl_csv)
from .montecarlo import (DEFAULT_KACRICE_GRID, ExcessExclusions, ExperimentConfig,
                         run_experiment, sig, slope_study)
from .specfun import ConvergenceError, RangeError
from .zerocount import PeriodicFunction, UnresolvedZeros, count_zeros, hopf_check, regularized_count

log = logging.getLogger("nodalcount")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so usage errors map to exit 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _domain_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--domain", choices=("disk", "rectangle"), default="disk")
    p.add_argument("--radius", type=float, default=1.0, help="disk radius")
    p.add_argument("--a", type=float, default=1.0, help="rectangle width")
    p.add_argument("--b", type=float, default=1.0, help="rectangle height")


def _window_flags(p: argparse.ArgumentParser, many: bool = False) -> None:
    p.add_argument("--window", choices=("long", "short"), default="short")
    if many:
        p.add_argument("--lambda", dest="lam", type=float, nargs="+", required=True,
                       help="one or more window parameters")
    else:
        p.add_argument("--lambda", dest="lam", type=float, required=True,
                       help="window parameter (long: [0, lambda]; short: [lambda, lambda+1])")


def _trial_flags(p: argparse.ArgumentParser, trials: int) -> None:
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--grid", type=int, default=None,
                   help="zero-scan grid size (default: 8x the sampling floor)")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")


def build_parser() -> Parser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = Parser(prog="nodalcount", formatter_class=fmt,
                    description="Boundary zeros of Gaussian random Dirichlet waves.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=Parser, required=True)

    p = sub.add_parser("sim", formatter_class=fmt, help="Monte Carlo zero counts vs Kac-Rice")
    _domain_flags(p)
    _window_flags(p)
    _trial_flags(p, 1000)
    p.add_argument("--eps", type=float, action="append", default=[],
                   help="smoothed-counter width relative to the sup norm (repeatable)")
    p.add_argument("--refine-tol", type=float, default=None,
                   help="root bracket width (default: 1e-12 x boundary length)")
    p.add_argument("--kacrice-grid", type=int, default=DEFAULT_KACRICE_GRID)
    p.add_argument("--out", default=None, help="report JSON path; per-trial CSV is written alongside")

    p = sub.add_parser("kacrice", formatter_class=fmt, help="Kac-Rice expected zero count")
    _domain_flags(p)
    _window_flags(p)
    p.add_argument("--grid", type=int, default=DEFAULT_KACRICE_GRID, help="quadrature nodes")

    p = sub.add_parser("weyl", formatter_class=fmt, help="spectral-sum ratios vs limiting constants")
    _domain_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, nargs="+", required=True)
    p.add_argument("--grid", type=int, default=256, help="boundary nodes for averaging")
    p.add_argument("--placements", type=int, default=8, help="short-window placements per lambda")
    p.add_argument("--out", default=None, help="CSV path")

    p = sub.add_parser("slopes", formatter_class=fmt, help="growth of the zero count in lambda")
    _domain_flags(p)
    _window_flags(p, many=True)
    _trial_flags(p, 0)
    p.add_argument("--kacrice-grid", type=int, default=DEFAULT_KACRICE_GRID)
    p.add_argument("--out", default=None, help="JSON path")

    p = sub.add_parser("hopf", formatter_class=fmt,
                       help="boundary zeros vs sign changes just inside the boundary")
    _domain_flags(p)
    _window_flags(p)
    _trial_flags(p, 200)
    p.add_argument("--delta", type=float, default=1e-3, help="depth of the interior curve")

    sub.add_parser("selftest", formatter_class=fmt, help="run the exact-answer checks")
    parser.subcommands = sub.choices
    return parser


def _domain(args):
    if args.domain == "disk":
        return Disk(args.radius)
    return Rectangle(args.a, args.b)


def _emit(obj: Dict) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _write_json(path: Optional[str], obj: Dict) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(json.dumps(obj, indent=2) + "\n")


def cmd_sim(args) -> int:
    cfg = ExperimentConfig(_domain(args), SpectralWindow(args.window, args.lam), args.trials,
                           args.seed, args.grid, args.refine_tol, tuple(args.eps),
                           args.kacrice_grid, args.out)
    log.info("running %d trials", args.trials)
    report = run_experiment(cfg, workers=args.workers)
    _emit(report.to_dict())
    return EXIT_OK


def cmd_kacrice(args) -> int:
    domain = _domain(args)
    window = SpectralWindow(args.window, args.lam)
    model = WaveModel(domain, window)
    res = expected_zero_count(model, grid_n=args.grid)
    _emit({"parameters": {"domain": domain.describe(), "window": window.describe(),
                          "grid": args.grid, "rule": res.rule},
           "modes": model.size,
           "kacrice_z": sig(res.z),
           "prediction": sig(asymptotic_prediction(domain, window))})
    return EXIT_OK


def cmd_weyl(args) -> int:
    domain = _domain(args)
    rows = weyl_diagnostics(domain, args.lam, grid_n=args.grid, placements=args.placements)
    if args.out:
        write_weyl_csv(args.out, rows)
    _emit({"parameters": {"domain": domain.describe(), "lambda": args.lam, "grid": args.grid,
                          "placements": args.placements},
           "rows": [{"lambda": sig(r.lam), "window": r.window, "ratio_name": r.ratio_name,
                     "value": sig(r.value), "target": sig(r.target)} for r in rows]})
    return EXIT_OK


def cmd_slopes(args) -> int:
    domain = _domain(args)
    study = slope_study(domain, args.window, args.lam, args.trials, args.seed, args.grid,
                        args.kacrice_grid, args.workers)
    out = {"parameters": {"domain": domain.describe(), "trials": args.trials, "seed": args.seed,
                          "grid": args.grid, "kacrice_grid": args.kacrice_grid}}
    out.update(study.to_dict())
    _write_json(args.out, out)
    _emit(out)
    return EXIT_OK


def cmd_hopf(args) -> int:
    domain = _domain(args)
    model = WaveModel(domain, SpectralWindow(args.window, args.lam))
    if model.size == 0:
        raise EmptyWindow("no eigenvalues in the window")
    mismatched = []
    for t in range(args.trials):
        res = hopf_check(model.draw(args.seed, t), args.delta, args.grid)
        if not res.match:
            mismatched.append({"trial": t, "boundary": res.boundary_count,
                               "interior": res.interior_count})
    _emit({"parameters": {"domain": domain.describe(), "window": args.window, "lambda": args.lam,
                          "trials": args.trials, "seed": args.seed, "delta": args.delta,
                          "grid": args.grid},
           "match_fraction": sig(1.0 - len(mismatched) / args.trials),
           "mismatched": mismatched})
    return EXIT_OK


def selftest_results() -> List[Dict]:
    """Checks whose answers are known exactly."""
    out = []
    for m in (1, 3, 5, 8):
        z = expected_zero_count(TrigPolynomial((m,)), grid_n=64).z
        out.append({"check": f"pair window m={m}: Kac-Rice Z = {2 * m}",
                    "value": z, "ok": abs(z - 2 * m) <= 1e-9})
        model = WaveModel(TrigPolynomial((m,)), None)
        counts = {count_zeros(model.draw(0, t)).count for t in range(20)}
        out.append({"check": f"pair window m={m}: every realization has {2 * m} zeros",
                    "value": sorted(counts), "ok": counts == {2 * m}})
    two_pi = 2 * math.pi
    f = PeriodicFunction(two_pi, lambda t: np.sin(3 * t), lambda t: 3 * np.cos(3 * t), None, 3.0, 32)
    zs = count_zeros(f)
    err = float(np.max(np.abs(zs.locations - np.arange(6) * math.pi / 3))) if zs.count == 6 else 1.0
    out.append({"check": "sin(3t) has 6 zeros at k*pi/3", "value": zs.count,
                "ok": zs.count == 6 and err <= 1e-12})
    g = PeriodicFunction(two_pi, np.sin, np.cos, None, 1.0, 16)
    for eps in (0.9, 0.5, 0.01):
        r = regularized_count(g, eps, 64)
        out.append({"check": f"smoothed counter of sin t at eps={eps} equals 2", "value": r,
                    "ok": abs(r - 2.0) <= 1e-12})
    one = PeriodicFunction(two_pi, lambda t: np.ones_like(t), lambda t: np.zeros_like(t), None, 1.0, 16)
    out.append({"check": "constant function has no zeros", "value": count_zeros(one).count,
                "ok": count_zeros(one).count == 0 and regularized_count(one, 0.5, 64) == 0.0})
    disk = Disk(1.0)
    for m, k, expected in ((3, 1, 6), (0, 2, 0)):
        mode = next(md for md in enumerate_modes(disk, SpectralWindow("long", 20.0))
                    if md.m == m and md.k == k and md.parity == "cos")
        wave = WaveModel(disk, None, [mode]).wave(CoefficientVector(np.array([1.0]), 0, 0))
        res = hopf_check(wave, 1e-3, 256)
        out.append({"check": f"disk mode ({m},{k}): {expected} boundary and interior crossings",
                    "value": [res.boundary_count, res.interior_count],
                    "ok": res.boundary_count == res.interior_count == expected})
    for row in out:
        if isinstance(row["value"], float):
            row["value"] = sig(row["value"])
    return out


def cmd_selftest(args) -> int:
    results = selftest_results()
    for r in results:
        log.info("%s %s", "PASS" if r["ok"] else "FAIL", r["check"])
    ok = all(r["ok"] for r in results)
    _emit({"passed": ok, "checks": results})
    return EXIT_OK if ok else EXIT_NUMERICAL


COMMANDS = {"sim": cmd_sim, "kacrice": cmd_kacrice, "weyl": cmd_weyl, "slopes": cmd_slopes,
            "hopf": cmd_hopf, "selftest": cmd_selftest}


def parse_and_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        if extra:
            sub = parser.subcommands[args.command]
            flags = sorted(o for a in sub._actions for o in a.option_strings)
            raise UsageError(f"{sub.prog}: error: unrecognized arguments: {' '.join(extra)}\n"
                             f"valid flags: {' '.join(flags)}\n{sub.format_usage()}")
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return EXIT_USAGE
    except SystemExit as exc:
        # --help and --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConvergenceError, UnresolvedZeros, ExcessExclusions, GramInconsistency,
            DegenerateC11) as exc:
        sys.stderr.write(f"nodalcount {args.command}: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except (ValueError, RangeError, TypeError) as exc:
        # EmptyWindow is a ValueError: an empty window is a parameter mistake
        sys.stderr.write(f"nodalcount {args.command}: error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(parse_and_dispatch())
