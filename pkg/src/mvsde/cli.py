"""Command-line surface: config-driven experiments and quick checks.

Subcommands
-----------
simulate           one run; writes the final snapshot and a report
strong-rate        time-step self-convergence on a dyadic chain
poc-rate           particle-count convergence against a coupled
                   reference
moment-stability   tamed versus plain arms on a coarse grid
ergodic            synchronous-coupling contraction run
probe-assumptions  evaluates the documented inequality sets for a
                   family on random clouds
selftest           fast invariant suite (taming dominance,
                   antisymmetry, W2 oracles, refinement coupling)

Exit codes: 0 on a passing verdict or plain completion, 2 on a failing
verdict (including any probe inequality that does not hold), 1 on
errors such as invalid configs. --threads overrides the worker count
(fallback: the MVSDE_THREADS variable, then the config); changing it
never changes a byte of the outputs. --seed and --out override the
config in place.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import config as config_mod
from .experiments import (run_ergodic_contraction, run_moment_stability,
                          run_poc_rate, run_simulate, run_strong_rate)
from .metrics import w2
from .model import FAMILIES, eval_drift_b, eval_kernel_f, make_model
from .probes import documented_sets, probe_assumptions
from .rng import level_increments, make_tableau
from .taming import TamedModel, tamed_drift_b, tamed_kernel_f

_EXPERIMENT_RUNNERS = {
    "simulate": run_simulate,
    "strong-rate": run_strong_rate,
    "poc-rate": run_poc_rate,
    "moment-stability": run_moment_stability,
    "ergodic": run_ergodic_contraction,
}


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; here 2 means a failed verdict,
    # so usage problems surface as exceptions mapped to exit 1
    def error(self, message):
        raise _ArgumentError("%s: %s" % (self.prog, message))


def _build_parser():
    parser = _Parser(prog="mvsde",
                     description="tamed particle schemes for "
                                 "measure-dependent SDEs")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in _EXPERIMENT_RUNNERS:
        sp = sub.add_parser(name, help="run the %s experiment" % name)
        sp.add_argument("--config", help="INI config file path")
        sp.add_argument("--seed", type=int, help="override [run] seed")
        sp.add_argument("--out", help="override [run] out_dir")
        sp.add_argument("--threads", type=int,
                        help="worker count (fallback: MVSDE_THREADS, "
                             "then the config)")

    pp = sub.add_parser("probe-assumptions",
                        help="evaluate inequality sets on random clouds")
    pp.add_argument("--family", default="cubic-mean-field",
                    choices=sorted(FAMILIES))
    pp.add_argument("--d", type=int, default=1)
    pp.add_argument("--set", dest="sets", action="append",
                    help="inequality set (repeatable; default: the "
                         "family's documented sets)")
    pp.add_argument("--count", type=int, default=10000)
    pp.add_argument("--radius", type=float, default=5.0)
    pp.add_argument("--seed", type=int, default=97)

    sub.add_parser("selftest", help="fast invariant suite")
    return parser


def _resolve_config(args):
    if args.config:
        with open(args.config) as fh:
            cfg = config_mod.parse_config(fh.read())
        if cfg.experiment != args.command:
            raise config_mod.ConfigError(
                "config is for experiment %r but the %r subcommand "
                "was invoked" % (cfg.experiment, args.command))
    else:
        cfg = config_mod.make_config(args.command)
    if args.seed is not None:
        cfg.seed = int(args.seed)
    if args.out is not None:
        cfg.out_dir = args.out
    if args.threads is not None:
        cfg.threads = int(args.threads)
    elif os.environ.get("MVSDE_THREADS"):
        cfg.threads = int(os.environ["MVSDE_THREADS"])
    if cfg.threads < 1:
        raise config_mod.ConfigError("threads must be >= 1, got %d"
                                     % cfg.threads)
    return cfg


def _run_experiment(args):
    cfg = _resolve_config(args)
    report = _EXPERIMENT_RUNNERS[args.command](cfg)
    if isinstance(report, dict):  # simulate
        print("final p0-moment %r after %d steps"
              % (report["final_moment"], report["steps_run"]))
        print("wrote %s" % report["snapshot_path"])
        print("wrote %s" % report["json_path"])
        return 2 if report["verdict"]["status"] == "fail" else 0
    if report.kind in ("strong_rate", "poc_rate"):
        for lev, err, se, cnt in zip(report.levels, report.errors,
                                     report.stderrs, report.diverged):
            print("level %-8s error %r stderr %r diverged %d"
                  % (lev, err, se, cnt))
        if report.fit is not None:
            print("fitted slope %.4f (r^2 %.4f)"
                  % (report.fit.slope, report.fit.r_squared))
    elif report.kind == "moment_stability":
        for arm, sup, step, cnt in zip(report.arms, report.sup_moments,
                                       report.divergence_steps,
                                       report.diverged):
            print("arm %-6s sup p0-moment %r divergence step %s "
                  "(diverged reps %d)" % (arm, sup, step, cnt))
    else:  # ergodic
        print("W2 %r at t=%r -> %r at t=%r over %d recorded times"
              % (report.w2_first, report.times[0], report.w2_last,
                 report.times[-1], len(report.times)))
        if report.decay_rate is not None:
            print("fitted decay rate %.4f (r^2 %.4f)"
                  % (report.decay_rate, report.r_squared))
    status = report.verdict["status"]
    print("verdict: %s" % status)
    print("wrote %s" % report.csv_path)
    print("wrote %s" % report.json_path)
    return 2 if status == "fail" else 0


def _run_probes(args):
    model = make_model(args.family, d=args.d)
    sets = args.sets or list(documented_sets(model))
    if not sets:
        print("family %r documents no inequality sets" % args.family)
        return 0
    failed = 0
    total = 0
    for aset in sets:
        reports = probe_assumptions(model, aset, count=args.count,
                                    radius=args.radius, seed=args.seed)
        for rep in reports:
            total += 1
            ok = "pass" if rep.holds else "FAIL"
            print("%-4s %s/%s worst_margin=%.6g fitted=%r"
                  % (ok, aset, rep.assumption_id, rep.worst_margin,
                     rep.fitted_constant))
            if not rep.holds:
                failed += 1
    print("%d inequalities evaluated, %d failed" % (total, failed))
    return 2 if failed else 0


def _selftest():
    """Fast invariant suite; prints one line per block."""
    rng = np.random.default_rng(20240817)
    failures = []

    def check(name, ok):
        print("%-24s %s" % (name, "ok" if ok else "FAIL"))
        if not ok:
            failures.append(name)

    # taming dominance: |b^n| <= |b|, scaled bound, off-variant identity
    ok = True
    for family in ("cubic-mean-field", "ergodic-dissipative"):
        model = make_model(family, d=2)
        xs = rng.normal(scale=3.0, size=(400, 2))
        tm = TamedModel(model, 64, "finite")
        off = TamedModel(model, 64, "off")
        b_raw = eval_drift_b(model, 0.0, xs, xs)
        b_tam = tamed_drift_b(tm, 0.0, xs, xs)
        b_off = tamed_drift_b(off, 0.0, xs, xs)
        nr = np.sqrt((b_raw * b_raw).sum(-1))
        nt = np.sqrt((b_tam * b_tam).sum(-1))
        ok = ok and bool((nt <= nr).all()) and np.array_equal(b_off, b_raw)
        r = np.sqrt((xs * xs).sum(-1))
        mask = r > 0
        bound = math.sqrt(64.0) * nr[mask] / r[mask] ** (2 * model.q)
        ok = ok and bool((nt[mask] <= bound).all())
    check("taming dominance", ok)

    # kernel antisymmetry survives taming exactly
    model = make_model("cubic-mean-field", d=3)
    tm = TamedModel(model, 16, "finite")
    x = rng.normal(size=(300, 3))
    y = rng.normal(size=(300, 3))
    fs = tamed_kernel_f(tm, x, y) + tamed_kernel_f(tm, y, x)
    raw = eval_kernel_f(model, x, y) + eval_kernel_f(model, y, x)
    check("kernel antisymmetry",
          bool((fs == 0.0).all()) and bool((raw == 0.0).all()))

    # W2 oracles: interleaved pair, two-atom closed form, identity
    a = np.array([[0.0], [2.0]])
    b = np.array([[1.0], [3.0]])
    ok = w2(a, b) == 1.0 and w2(a, a) == 0.0
    c = np.array([[0.0, 0.0], [1.0, 1.0]])
    d = np.array([[2.0, 0.0], [0.0, 1.0]])
    straight = 4.0 + 1.0
    crossed = 1.0 + 2.0
    ok = ok and abs(w2(c, d, method="exact_assignment")
                    - math.sqrt(min(straight, crossed) / 2.0)) < 1e-12
    for _ in range(5):
        u = rng.normal(size=(16, 1))
        v = rng.normal(size=(16, 1))
        ok = ok and abs(w2(u, v, method="sorted_1d")
                        - w2(u, v, method="exact_assignment")) < 1e-10
    check("W2 oracles", ok)

    # refinement coupling: coarse increments are exact fine sums and
    # the total Brownian motion is level-independent
    tab = make_tableau(7, 3, 2, 1.0, 64)
    fine = level_increments(tab, 64)
    ok = True
    for n in (8, 16, 32):
        coarse = level_increments(tab, n)
        folded = fine.reshape(n, 64 // n, 3, 2).sum(axis=1)
        ok = ok and np.array_equal(coarse, folded)
        ok = ok and np.array_equal(coarse.sum(axis=0), fine.sum(axis=0))
    check("refinement coupling", ok)

    if failures:
        print("selftest FAILED: %s" % ", ".join(failures))
        return 2
    print("selftest passed")
    return 0


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "selftest":
            return _selftest()
        if args.command == "probe-assumptions":
            return _run_probes(args)
        return _run_experiment(args)
    except _ArgumentError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (config_mod.ConfigError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
