"""Experiment drivers: rate fits, stability contrasts, contraction runs.

Four drivers turn the particle scheme into structured reports:

run_strong_rate
    time-step self-convergence on a dyadic level chain, every level
    coupled to the finest one through a shared Brownian tableau
run_poc_rate
    particle-count convergence against a larger reference system that
    shares the Brownian streams and initial draws of the first N
    particles (the independent-copies system whose one-particle law the
    sharp statements couple against is not simulable, so the coupled
    reference is always the larger particle system itself)
run_moment_stability
    tamed versus plain Euler arms on a deliberately coarse grid,
    tracking the running p0-moment and any divergence step
run_ergodic_contraction
    synchronous coupling of two initial laws under the ergodic taming
    variant, with an exponential fit of the W2 decay

Every driver writes <name>_errors.csv (columns level, error, stderr,
diverged_count) and <name>_report.json into cfg.out_dir and returns a
report object. Reports embed the resolved config, the package version
and the pairwise backend, but never timestamps or the thread count, so
a rerun with the same config and seed is byte-identical at any
parallelism level. Monte Carlo repetition m runs on seed + m; reps are
independent tasks merged in index order; report assembly is
single-threaded.

When the config carries assumption constants the drivers compute

    rho1   = Lhat_bsig_1 - Lhat_bsig_2 - 4 L_fg_1 - L_b_1 - L_b_2
             - 4 L_f_1
    rho2   = min(L_bsig_1/2, L_bsig_4) - (L_bsig_2 + L_bsig_5)
             + 2 min(L_fg_1/2, L_fg_3) - 4 max(L_b_1, L_b_3)
             - 2 max(L_b_2, L_b_4) - 16 max(L_f_1, L_f_2)
    h_star = min((L_bsig_1 / (2 L_bsig_3))^2, (L_fg_1 / (2 L_fg_2))^2)

and refuse to run when rho1 <= 0 or when the coarsest step size
satisfies h >= min(h_star, 1/(2 rho1)); rho2 is reported, never gating.
"""

import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._core import backend_name
from ._version import VERSION
from .ensemble import snapshot_csv
from .metrics import fit_loglog_slope, w2
from .model import make_model
from .rng import make_tableau, parse_initial
from .scheme import MomentTracker, StateRecorder, make_grid, simulate
from .taming import TamedModel

# particle norm beyond which a run counts as diverged even while finite
DIVERGENCE_NORM = 1e10

REQUIRED_CONSTANTS = (
    "Lhat_bsig_1", "Lhat_bsig_2", "L_b_1", "L_b_2", "L_f_1",
    "L_bsig_1", "L_bsig_2", "L_bsig_3", "L_bsig_4", "L_bsig_5",
    "L_fg_1", "L_fg_2", "L_fg_3", "L_b_3", "L_b_4", "L_f_2")
OPTIONAL_CONSTANTS = ("Lhat_fg_1",)


def theoretical_constants(consts):
    """Contraction quantities from user-supplied assumption constants.

    Returns {"rho1": .., "rho2": .., "h_star": ..} computed exactly by
    the formulas in the module docstring. Raises ValueError when any
    required constant is missing.
    """
    missing = [k for k in REQUIRED_CONSTANTS if k not in consts]
    if missing:
        raise ValueError("incomplete assumption constants; missing: %s"
                         % ", ".join(missing))
    c = {k: float(v) for k, v in consts.items()}
    rho1 = (c["Lhat_bsig_1"] - c["Lhat_bsig_2"] - 4.0 * c["L_fg_1"]
            - c["L_b_1"] - c["L_b_2"] - 4.0 * c["L_f_1"])
    rho2 = (min(c["L_bsig_1"] / 2.0, c["L_bsig_4"])
            - (c["L_bsig_2"] + c["L_bsig_5"])
            + 2.0 * min(c["L_fg_1"] / 2.0, c["L_fg_3"])
            - 4.0 * max(c["L_b_1"], c["L_b_3"])
            - 2.0 * max(c["L_b_2"], c["L_b_4"])
            - 16.0 * max(c["L_f_1"], c["L_f_2"]))
    h_star = min((c["L_bsig_1"] / (2.0 * c["L_bsig_3"])) ** 2,
                 (c["L_fg_1"] / (2.0 * c["L_fg_2"])) ** 2)
    return {"rho1": rho1, "rho2": rho2, "h_star": h_star}


def check_step_bound(h, consts):
    """Refuse step sizes outside the contraction regime.

    Raises ValueError when rho1 <= 0 or h >= min(h_star, 1/(2 rho1));
    returns the theoretical_constants dict otherwise.
    """
    tc = theoretical_constants(consts)
    if tc["rho1"] <= 0.0:
        raise ValueError(
            "rho1 = %r is not positive; the supplied assumption "
            "constants admit no contracting step size" % (tc["rho1"],))
    half = 1.0 / (2.0 * tc["rho1"])
    bound = min(tc["h_star"], half)
    if h >= bound:
        raise ValueError(
            "step size h = %r violates h < min(h_star, 1/(2 rho1)) = "
            "min(%r, %r) = %r" % (h, tc["h_star"], half, bound))
    return tc


def _warn_p_range(kind, p, p0, q):
    # rate guarantees hold for p <= p0/(3q+1) (time-step rate) and
    # p <= 2 p0/(q+1) (particle rate); warn outside, never refuse
    if kind == "strong_rate":
        limit = p0 / (3.0 * q + 1.0)
        label = "p <= p0/(3q+1)"
    else:
        limit = 2.0 * p0 / (q + 1.0)
        label = "p <= 2p0/(q+1)"
    if p > limit:
        warnings.warn(
            "p = %g exceeds the guaranteed range %s = %g for p0 = %g, "
            "q = %g; the fitted rate may degrade" % (p, label, limit,
                                                     p0, q),
            stacklevel=3)


@dataclass
class RateReport:
    """Per-level errors with a log-log rate fit and verdict booleans."""

    kind: str
    levels: list
    errors: list
    stderrs: list
    diverged: list
    fit: object
    verdict: dict
    config: dict
    csv_path: str = ""
    json_path: str = ""


@dataclass
class StabilityReport:
    """Tamed and plain arms: running-moment sup and divergence step."""

    kind: str
    arms: list
    sup_moments: list
    stderrs: list
    diverged: list
    divergence_steps: list
    series: dict
    verdict: dict
    config: dict
    csv_path: str = ""
    json_path: str = ""


@dataclass
class ErgodicReport:
    """Coupled W2 decay series, exponential fit, stabilization checks."""

    kind: str
    times: list
    w2: list
    stderrs: list
    diverged: int
    decay_rate: object
    r_squared: object
    w2_first: float
    w2_last: float
    stabilization: list
    constants: object
    verdict: dict
    config: dict
    csv_path: str = ""
    json_path: str = ""


_ECHO_FIELDS = (
    "experiment", "config_version", "seed", "reps", "p", "p0",
    "family", "d", "l", "measure_mode", "params",
    "T", "n", "levels", "n_max",
    "N", "N_levels", "N_ref", "probe_count", "initial", "initial_b",
    "variant", "method", "projections", "cap",
    "slope_lo", "slope_hi", "r2_min", "ratio_max",
    "max_divergence_step", "constants")


def _config_echo(cfg):
    # threads and out_dir deliberately absent: neither may change a byte
    # of the report
    echo = {}
    for name in _ECHO_FIELDS:
        v = getattr(cfg, name, None)
        if isinstance(v, tuple):
            v = list(v)
        elif isinstance(v, dict):
            v = {k: v[k] for k in sorted(v)}
        echo[name] = v
    echo["software_version"] = VERSION
    echo["backend"] = backend_name()
    return echo


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        v = float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _fit_dict(fit):
    if fit is None:
        return None
    return {"slope": fit.slope, "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "points": [[a, b] for a, b in fit.points]}


def _cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _emit(cfg, name, rows, report_dict):
    """Write <name>_errors.csv and <name>_report.json under out_dir."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    csv_path = os.path.join(cfg.out_dir, name + "_errors.csv")
    json_path = os.path.join(cfg.out_dir, name + "_report.json")
    with open(csv_path, "w") as fh:
        fh.write("level,error,stderr,diverged_count\n")
        for level, err, se, cnt in rows:
            fh.write("%s,%s,%s,%d\n" % (_cell(level), _cell(err),
                                        _cell(se), int(cnt)))
    with open(json_path, "w") as fh:
        json.dump(_jsonable(report_dict), fh, indent=2)
        fh.write("\n")
    return csv_path, json_path


def _map_reps(worker, reps, threads):
    """worker(m) for m in range(reps), results merged in index order."""
    if threads <= 1:
        return [worker(m) for m in range(reps)]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(worker, range(reps)))


def _aggregate_levels(results, n_levels, p):
    """Combine per-rep (mean |diff|^p, diverged) pairs per level.

    error(level) = [mean over surviving reps of the per-rep particle
    means]^(1/p); stderr is the sample deviation of the per-rep
    p-th-root values over sqrt(reps).
    """
    errors, stderrs, diverged = [], [], []
    for i in range(n_levels):
        vals = [rep[i][0] for rep in results if rep[i][1] == 0]
        diverged.append(sum(rep[i][1] for rep in results))
        if not vals:
            errors.append(float("inf"))
            stderrs.append(float("inf"))
            continue
        errors.append(float(np.mean(vals)) ** (1.0 / p))
        roots = [v ** (1.0 / p) for v in vals]
        if len(roots) > 1:
            stderrs.append(float(np.std(roots, ddof=1))
                           / math.sqrt(len(roots)))
        else:
            stderrs.append(0.0)
    return errors, stderrs, diverged


def _rate_verdict(xs, errors, diverged, cfg, exploratory=False):
    """Fit and verdict shared by the two rate drivers."""
    total_div = sum(diverged)
    finite = [e for e in errors if math.isfinite(e)]
    if finite and all(e == 0.0 for e in finite):
        verdict = {"status": "degenerate", "slope_in_band": None,
                   "r2_ok": None, "no_divergence": total_div == 0}
        return None, verdict
    try:
        fit = fit_loglog_slope(xs, errors)
    except ValueError:
        status = "fail" if total_div > 0 else "degenerate"
        verdict = {"status": status, "slope_in_band": None,
                   "r2_ok": None, "no_divergence": total_div == 0}
        return None, verdict
    slope_ok = cfg.slope_lo <= fit.slope <= cfg.slope_hi
    r2_ok = fit.r_squared >= cfg.r2_min
    no_div = total_div == 0
    if exploratory:
        status = "exploratory"
    else:
        status = "pass" if (slope_ok and r2_ok and no_div) else "fail"
    verdict = {"status": status, "slope_in_band": slope_ok,
               "r2_ok": r2_ok, "no_divergence": no_div}
    return fit, verdict


def run_strong_rate(cfg):
    """Time-step self-convergence over a dyadic level chain.

    Within a repetition all levels and the n_max reference run on one
    Brownian tableau from identical initial draws, so differences are
    pure discretization error. Per particle the error is the max over
    the level's own grid of the distance to the reference at the same
    times; error(n) = [mean over reps and particles of that max to the
    p]^(1/p), fitted against h = 1/n in log-log.

    Returns RateReport; emits strong_rate_errors.csv / _report.json.
    """
    model = make_model(cfg.family, d=cfg.d, l=cfg.l, params=cfg.params)
    levels = [int(v) for v in cfg.levels]
    if not levels:
        raise ValueError("strong-rate needs a nonempty level chain")
    n_max = int(cfg.n_max)
    for n in levels:
        if n < 1 or n_max % n != 0:
            raise ValueError("level n = %d does not divide n_max = %d"
                             % (n, n_max))
    if max(levels) >= n_max:
        raise ValueError("n_max = %d must exceed every level (max %d)"
                         % (n_max, max(levels)))
    if cfg.constants:
        check_step_bound(1.0 / min(levels), cfg.constants)
    _warn_p_range("strong_rate", cfg.p, cfg.p0, model.q)
    law = parse_initial(cfg.initial)
    T = float(cfg.T)
    p = float(cfg.p)
    stride = n_max // max(levels)
    fine_total = int(round(n_max * T))
    rec_steps = tuple(range(0, fine_total + 1, stride))

    def one_rep(m):
        tab = make_tableau(cfg.seed + m, cfg.N, model.l, T, n_max)
        rec = StateRecorder(steps=rec_steps)
        ref = simulate(TamedModel(model, n_max, cfg.variant),
                       make_grid(T, n_max), tab, initial=law,
                       callbacks=[rec])
        if ref.overflow_flag:
            return [(None, 1) for _ in levels]
        fine = np.stack(rec.states)
        out = []
        for n in levels:
            rec_c = StateRecorder(stride=1)
            ens = simulate(TamedModel(model, n, cfg.variant),
                           make_grid(T, n), tab, initial=law,
                           callbacks=[rec_c])
            if ens.overflow_flag:
                out.append((None, 1))
                continue
            coarse = np.stack(rec_c.states)
            # level-n step j sits at fine recorded index j*(lmax/n)
            sel = fine[np.arange(coarse.shape[0]) * (max(levels) // n)]
            diff = coarse - sel
            dist = np.sqrt(np.sum(diff * diff, axis=-1)).max(axis=0)
            out.append((float(np.mean(dist ** p)), 0))
        return out

    results = _map_reps(one_rep, int(cfg.reps), int(cfg.threads))
    errors, stderrs, diverged = _aggregate_levels(results, len(levels), p)
    fit, verdict = _rate_verdict([1.0 / n for n in levels], errors,
                                 diverged, cfg)
    report = RateReport(kind="strong_rate", levels=levels, errors=errors,
                        stderrs=stderrs, diverged=diverged, fit=fit,
                        verdict=verdict, config=_config_echo(cfg))
    rows = list(zip(levels, errors, stderrs, diverged))
    body = {"kind": report.kind, "levels": report.levels,
            "errors": report.errors, "stderrs": report.stderrs,
            "diverged": report.diverged, "fit": _fit_dict(fit),
            "verdict": verdict, "config": report.config}
    report.csv_path, report.json_path = _emit(cfg, "strong_rate", rows,
                                              body)
    return report


def _poc_single_rep(tm, grid, tab, sizes, n_ref, probe_count, law, p):
    """One repetition of the coupled-reference estimator.

    Returns [(mean |X_T^{i,N} - X_T^{i,n_ref}|^p over probed i, 0)] per
    size, or (None, 1) where either run diverged. Exposed separately so
    the N = n_ref coupling identity is directly checkable.
    """
    ref = simulate(tm, grid, tab, initial=law, n_particles=n_ref)
    out = []
    for size in sizes:
        if ref.overflow_flag:
            out.append((None, 1))
            continue
        ens = simulate(tm, grid, tab, initial=law, n_particles=size)
        if ens.overflow_flag:
            out.append((None, 1))
            continue
        k = min(size, probe_count)
        diff = ens.states[:k] - ref.states[:k]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        out.append((float(np.mean(dist ** p)), 0))
    return out


def run_poc_rate(cfg):
    """Particle-count convergence against a coupled larger reference.

    The size-N run and the size-N_ref reference share initial draws and
    Brownian streams for the first N particles, so their gap estimates
    the particle-count error up to constants. error(N) aggregates the
    first min(N, probe_count) particles across reps; the fit is error
    versus N in log-log. Models outside the pairwise measure mode are
    reported with verdict status "exploratory" and never pass or fail.

    Returns RateReport; emits poc_rate_errors.csv / _report.json.
    """
    model = make_model(cfg.family, d=cfg.d, l=cfg.l, params=cfg.params)
    sizes = [int(v) for v in cfg.N_levels]
    if not sizes:
        raise ValueError("poc-rate needs a nonempty ensemble-size chain")
    n_ref = int(cfg.N_ref)
    if n_ref <= max(sizes):
        raise ValueError("N_ref = %d must exceed every ensemble size "
                         "(max %d)" % (n_ref, max(sizes)))
    if cfg.constants:
        check_step_bound(1.0 / int(cfg.n), cfg.constants)
    _warn_p_range("poc_rate", cfg.p, cfg.p0, model.q)
    law = parse_initial(cfg.initial)
    T = float(cfg.T)
    p = float(cfg.p)
    n = int(cfg.n)
    grid = make_grid(T, n)
    probe_count = int(cfg.probe_count)
    tm_n = n

    def one_rep(m):
        tab = make_tableau(cfg.seed + m, n_ref, model.l, T, n)
        tm = TamedModel(model, tm_n, cfg.variant)
        return _poc_single_rep(tm, grid, tab, sizes, n_ref, probe_count,
                               law, p)

    results = _map_reps(one_rep, int(cfg.reps), int(cfg.threads))
    errors, stderrs, diverged = _aggregate_levels(results, len(sizes), p)
    fit, verdict = _rate_verdict(
        sizes, errors, diverged, cfg,
        exploratory=(model.measure_mode != "pairwise"))
    report = RateReport(kind="poc_rate", levels=sizes, errors=errors,
                        stderrs=stderrs, diverged=diverged, fit=fit,
                        verdict=verdict, config=_config_echo(cfg))
    rows = list(zip(sizes, errors, stderrs, diverged))
    body = {"kind": report.kind, "levels": report.levels,
            "errors": report.errors, "stderrs": report.stderrs,
            "diverged": report.diverged, "fit": _fit_dict(fit),
            "verdict": verdict, "config": report.config}
    report.csv_path, report.json_path = _emit(cfg, "poc_rate", rows,
                                              body)
    return report


class _DivergenceTracker:
    """First step index outside the trust region (non-finite or huge)."""

    def __init__(self, threshold=DIVERGENCE_NORM):
        self.threshold = float(threshold)
        self.step = None

    def observe(self, ens, grid):
        if self.step is not None:
            return
        x = ens.states
        if not np.isfinite(x).all():
            self.step = ens.t_index
            return
        r2 = np.sum(x * x, axis=-1).max()
        if r2 > self.threshold * self.threshold:
            self.step = ens.t_index


def run_moment_stability(cfg):
    """Tamed versus plain Euler arms on the same model and grid.

    Arm "tamed" uses cfg.variant from cfg.initial; arm "plain" runs
    taming off from cfg.initial_b. Both arms of a repetition share one
    Brownian tableau. Per arm the report carries the worst sup of the
    running p0-moment across reps, the count of diverged reps, the
    earliest divergence step (first step with a non-finite state or a
    particle norm above 1e10), and the repetition-0 moment series.

    Verdict: status is "pass" exactly when the tamed arm never
    diverged; "plain_diverged_within_bound" records whether the plain
    arm left the trust region by cfg.max_divergence_step.

    Returns StabilityReport; emits moment_stability_errors.csv /
    _report.json.
    """
    model = make_model(cfg.family, d=cfg.d, l=cfg.l, params=cfg.params)
    n = int(cfg.n)
    T = float(cfg.T)
    grid = make_grid(T, n)
    if cfg.constants:
        check_step_bound(1.0 / n, cfg.constants)
    law_a = parse_initial(cfg.initial)
    law_b = parse_initial(cfg.initial_b if cfg.initial_b else cfg.initial)
    arms = (("tamed", cfg.variant, law_a), ("plain", "off", law_b))

    def one_rep(m):
        tab = make_tableau(cfg.seed + m, cfg.N, model.l, T, n)
        res = []
        for label, variant, law in arms:
            tracker = MomentTracker(cfg.p0)
            diverge = _DivergenceTracker()
            simulate(TamedModel(model, n, variant), grid, tab,
                     initial=law, callbacks=[tracker, diverge])
            res.append((label, max(tracker.values), diverge.step,
                        tracker.times, tracker.values))
        return res

    results = _map_reps(one_rep, int(cfg.reps), int(cfg.threads))
    labels = [a[0] for a in arms]
    sups, stderrs, div_counts, div_steps = [], [], [], []
    series = {}
    for i, label in enumerate(labels):
        arm_sups = [rep[i][1] for rep in results]
        arm_steps = [rep[i][2] for rep in results if rep[i][2] is not None]
        sups.append(float(max(arm_sups)))
        finite = [s for s in arm_sups if math.isfinite(s)]
        if len(finite) == len(arm_sups) and len(finite) > 1:
            stderrs.append(float(np.std(finite, ddof=1))
                           / math.sqrt(len(finite)))
        else:
            stderrs.append(0.0)
        div_counts.append(len(arm_steps))
        div_steps.append(min(arm_steps) if arm_steps else None)
        series[label] = {"t": list(results[0][i][3]),
                         "moment": list(results[0][i][4])}
    tamed_finite = div_counts[0] == 0 and math.isfinite(sups[0])
    plain_within = (div_steps[1] is not None
                    and div_steps[1] <= int(cfg.max_divergence_step))
    verdict = {"status": "pass" if tamed_finite else "fail",
               "tamed_finite": tamed_finite,
               "plain_diverged_within_bound": plain_within,
               "contrast": tamed_finite and div_counts[1] > 0}
    report = StabilityReport(kind="moment_stability", arms=labels,
                             sup_moments=sups, stderrs=stderrs,
                             diverged=div_counts,
                             divergence_steps=div_steps, series=series,
                             verdict=verdict, config=_config_echo(cfg))
    rows = list(zip(labels, sups, stderrs, div_counts))
    body = {"kind": report.kind, "arms": labels,
            "sup_moments": sups, "stderrs": stderrs,
            "diverged": div_counts, "divergence_steps": div_steps,
            "series": series, "verdict": verdict,
            "config": report.config}
    report.csv_path, report.json_path = _emit(cfg, "moment_stability",
                                              rows, body)
    return report


def _semilog_fit(ts, ys):
    """OLS of log(y) against t; returns (slope, intercept, r_squared)."""
    t = np.asarray(ts, dtype=np.float64)
    y = np.log(np.asarray(ys, dtype=np.float64))
    mt = float(np.mean(t))
    my = float(np.mean(y))
    vt = float(np.sum((t - mt) ** 2))
    if vt == 0.0:
        raise ValueError("all fit times coincide")
    slope = float(np.sum((t - mt) * (y - my))) / vt
    intercept = my - slope * mt
    resid = y - (intercept + slope * t)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - my) ** 2))
    if ss_tot > 0.0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    return slope, intercept, r2

# fit window for the decaying segment: drop the initial transient and
# any points that have fallen to the synchronous-coupling float floor
_SEG_T_LO_FRAC = 0.125
_SEG_REL_FLOOR = 1e-12


def run_ergodic_contraction(cfg):
    """Synchronous coupling of two initial laws under ergodic taming.

    Both ensembles run on the same Brownian tableau; W2 between their
    empirical laws is recorded on a logarithmic time grid and fitted as
    log W2 ~ decay_rate * t over the decaying segment (times past
    T/8 whose W2 still exceeds 1e-12 of the initial value). The
    stabilization entries report W2 between the first ensemble's own
    empirical laws at times (t, 2t), a Cauchy-style diagnostic that the
    chain settles.

    Requires cfg.variant == "ergodic". With assumption constants in the
    config the run refuses h >= min(h_star, 1/(2 rho1)) and reports
    rho1, rho2, h_star.

    Returns ErgodicReport; emits ergodic_errors.csv / _report.json.
    """
    model = make_model(cfg.family, d=cfg.d, l=cfg.l, params=cfg.params)
    if cfg.variant != "ergodic":
        raise ValueError("ergodic contraction requires taming variant "
                         "'ergodic', got %r" % (cfg.variant,))
    n = int(cfg.n)
    T = float(cfg.T)
    grid = make_grid(T, n)
    total = grid.total_steps
    constants = None
    if cfg.constants:
        constants = dict(cfg.constants)
        constants.update(check_step_bound(1.0 / n, cfg.constants))
    law_a = parse_initial(cfg.initial)
    law_b = parse_initial(cfg.initial_b if cfg.initial_b else cfg.initial)

    pair_specs = ((T / 20.0, T / 10.0), (T / 4.0, T / 2.0), (T / 2.0, T))
    pair_steps = []
    for t1, t2 in pair_specs:
        k1 = min(total, max(0, int(round(t1 * n))))
        k2 = min(total, max(0, int(round(t2 * n))))
        if k1 < k2:
            pair_steps.append((k1, k2))
    log_ks = np.unique(np.rint(np.geomspace(1, total, 32)).astype(int))
    rec_steps = sorted(set([0, total]) | set(log_ks.tolist())
                       | set(k for pair in pair_steps for k in pair))

    def w2_cfg(a, b):
        return w2(a, b, method=cfg.method, n_projections=cfg.projections,
                  cap=cfg.cap)

    def one_rep(m):
        tab = make_tableau(cfg.seed + m, cfg.N, model.l, T, n)
        tm = TamedModel(model, n, cfg.variant)
        rec_a = StateRecorder(steps=rec_steps)
        rec_b = StateRecorder(steps=rec_steps)
        ens_a = simulate(tm, grid, tab, initial=law_a, callbacks=[rec_a])
        ens_b = simulate(tm, grid, tab, initial=law_b, callbacks=[rec_b])
        if ens_a.overflow_flag or ens_b.overflow_flag:
            return None
        idx = {k: j for j, k in enumerate(rec_a.recorded_steps)}
        curve = [w2_cfg(a, b) for a, b in zip(rec_a.states, rec_b.states)]
        stab = [w2_cfg(rec_a.states[idx[k1]], rec_a.states[idx[k2]])
                for k1, k2 in pair_steps]
        return curve, stab

    results = _map_reps(one_rep, int(cfg.reps), int(cfg.threads))
    kept = [r for r in results if r is not None]
    n_div = len(results) - len(kept)
    if not kept:
        raise ValueError("every repetition diverged; nothing to report")
    curves = np.asarray([r[0] for r in kept])
    stabs = np.asarray([r[1] for r in kept])
    w2_mean = curves.mean(axis=0)
    if curves.shape[0] > 1:
        w2_se = curves.std(axis=0, ddof=1) / math.sqrt(curves.shape[0])
    else:
        w2_se = np.zeros_like(w2_mean)
    times = [k / n for k in rec_steps]
    stab_entries = [{"t1": k1 / n, "t2": k2 / n,
                     "w2": float(stabs[:, j].mean())}
                    for j, (k1, k2) in enumerate(pair_steps)]

    w2_first = float(w2_mean[0])
    w2_last = float(w2_mean[-1])
    ts = np.asarray(times)
    ys = np.asarray(w2_mean)
    seg = (ts >= _SEG_T_LO_FRAC * T) & (ys > 0.0)
    if w2_first > 0.0:
        seg &= ys > _SEG_REL_FLOOR * w2_first
    decay_rate = None
    r_squared = None
    if np.all(ys == 0.0):
        verdict = {"status": "degenerate", "decay_negative": None,
                   "r2_ok": None, "ratio_ok": None,
                   "stabilization_decreasing": None}
    elif int(seg.sum()) < 2:
        verdict = {"status": "fail", "decay_negative": False,
                   "r2_ok": False, "ratio_ok": False,
                   "stabilization_decreasing": None}
    else:
        decay_rate, _, r_squared = _semilog_fit(ts[seg], ys[seg])
        decay_neg = decay_rate < 0.0
        r2_ok = r_squared >= cfg.r2_min
        ratio_ok = w2_last < cfg.ratio_max * w2_first
        stab_dec = None
        if len(stab_entries) >= 2:
            stab_dec = stab_entries[-1]["w2"] < stab_entries[0]["w2"]
        status = "pass" if (decay_neg and r2_ok and ratio_ok) else "fail"
        verdict = {"status": status, "decay_negative": decay_neg,
                   "r2_ok": r2_ok, "ratio_ok": ratio_ok,
                   "stabilization_decreasing": stab_dec}
    report = ErgodicReport(kind="ergodic", times=times,
                           w2=[float(v) for v in w2_mean],
                           stderrs=[float(v) for v in w2_se],
                           diverged=n_div, decay_rate=decay_rate,
                           r_squared=r_squared, w2_first=w2_first,
                           w2_last=w2_last, stabilization=stab_entries,
                           constants=constants, verdict=verdict,
                           config=_config_echo(cfg))
    rows = [(t, e, s, n_div)
            for t, e, s in zip(times, report.w2, report.stderrs)]
    body = {"kind": report.kind, "times": report.times, "w2": report.w2,
            "stderrs": report.stderrs, "diverged": n_div,
            "decay_rate": decay_rate, "r_squared": r_squared,
            "w2_first": w2_first, "w2_last": w2_last,
            "stabilization": stab_entries, "constants": constants,
            "verdict": verdict, "config": report.config}
    report.csv_path, report.json_path = _emit(cfg, "ergodic", rows, body)
    return report


def run_simulate(cfg):
    """Single simulation; writes the final snapshot and a small report.

    Returns a dict with the final p0-moment, the sup over time, the
    divergence step if any, and the paths written.
    """
    model = make_model(cfg.family, d=cfg.d, l=cfg.l, params=cfg.params)
    n = int(cfg.n)
    T = float(cfg.T)
    grid = make_grid(T, n)
    if cfg.constants:
        check_step_bound(1.0 / n, cfg.constants)
    law = parse_initial(cfg.initial)
    tab = make_tableau(int(cfg.seed), cfg.N, model.l, T, n)
    tracker = MomentTracker(cfg.p0)
    diverge = _DivergenceTracker()
    ens = simulate(TamedModel(model, n, cfg.variant), grid, tab,
                   initial=law, callbacks=[tracker, diverge])
    os.makedirs(cfg.out_dir, exist_ok=True)
    snap_path = os.path.join(cfg.out_dir, "simulate_final.csv")
    snapshot_csv(ens, snap_path, grid.t_at(ens.t_index))
    verdict = {"status": "pass" if diverge.step is None else "fail",
               "finite": diverge.step is None}
    body = {"kind": "simulate", "final_moment": tracker.values[-1],
            "sup_moment": max(tracker.values),
            "divergence_step": diverge.step,
            "steps_run": int(ens.t_index), "verdict": verdict,
            "config": _config_echo(cfg)}
    json_path = os.path.join(cfg.out_dir, "simulate_report.json")
    with open(json_path, "w") as fh:
        json.dump(_jsonable(body), fh, indent=2)
        fh.write("\n")
    body["snapshot_path"] = snap_path
    body["json_path"] = json_path
    return body
