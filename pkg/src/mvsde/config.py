"""Run configuration: a flat INI document, validated and canonical.

Grammar (config_version 1)
--------------------------
Eight sections, all keys single-valued; '#' and ';' start comments.

[run]        config_version, experiment (simulate | strong-rate |
             poc-rate | moment-stability | ergodic), seed, reps,
             threads, out_dir, p, p0
[model]      family, d, l, measure_mode, plus the family's own
             parameters as bare keys (q, lam, sigma0, ...)
[grid]       T, n, levels (comma-separated), n_max
[ensemble]   N, N_levels (comma-separated), N_ref, probe_count,
             initial, initial_b (law strings, see rng.parse_initial)
[taming]     variant
[metric]     method, projections, cap
[bands]      slope_lo, slope_hi, r2_min, ratio_max,
             max_divergence_step
[constants]  the assumption constants; when the section is present all
             sixteen required keys must be present (Lhat_fg_1 is
             accepted optionally), rho1 must be positive and the run's
             coarsest step must satisfy h < min(h_star, 1/(2 rho1))

Every key is optional; defaults depend on the experiment kind and are
filled in by parse_config, so emit_config(parse_config(text)) is the
fully resolved canonical form and parsing that form again round-trips
exactly. Validation collects every violated constraint before raising.

Threads resolve at run time (flag, then MVSDE_THREADS, then this file)
and never affect any numeric output.
"""

import configparser

from dataclasses import dataclass

from .experiments import (OPTIONAL_CONSTANTS, REQUIRED_CONSTANTS,
                          check_step_bound)
from .metrics import W2_METHODS
from .model import make_model
from .rng import parse_initial
from .taming import VARIANTS

EXPERIMENTS = ("simulate", "strong-rate", "poc-rate",
               "moment-stability", "ergodic")

CONFIG_VERSION = 1


class ConfigError(ValueError):
    """Syntax error or the full list of violated constraints."""


_BASE_DEFAULTS = dict(
    config_version=CONFIG_VERSION,
    seed=12345,
    reps=32,
    threads=1,
    out_dir="out",
    p=2.0,
    p0=4.0,
    family="cubic-mean-field",
    d=1,
    l=None,
    measure_mode=None,
    params={},
    T=1.0,
    n=128,
    levels=(),
    n_max=1024,
    N=64,
    N_levels=(),
    N_ref=1024,
    probe_count=16,
    initial="gaussian 0.0 1.0",
    initial_b=None,
    variant="finite",
    method="sorted_1d",
    projections=64,
    cap=512,
    slope_lo=0.40,
    slope_hi=0.60,
    r2_min=0.95,
    ratio_max=0.05,
    max_divergence_step=20,
    constants=None,
)

_EXPERIMENT_DEFAULTS = {
    "simulate": dict(reps=1),
    "strong-rate": dict(levels=(16, 32, 64, 128, 256, 512),
                        initial="gaussian 0.0 0.5"),
    "poc-rate": dict(reps=16, family="pairwise-vlasov", n=64,
                     N_levels=(16, 32, 64, 128, 256), N_ref=1024,
                     slope_lo=-0.65, slope_hi=-0.35, r2_min=0.0),
    "moment-stability": dict(reps=4, T=100.0, n=2,
                             initial_b="point 3.0"),
    "ergodic": dict(reps=1, family="ergodic-dissipative",
                    variant="ergodic", T=20.0, n=100, N=256,
                    initial_b="gaussian 5.0 1.0", r2_min=0.9),
}


@dataclass
class RunConfig:
    """Fully resolved run configuration (canonical values)."""

    experiment: str
    config_version: int
    seed: int
    reps: int
    threads: int
    out_dir: str
    p: float
    p0: float
    family: str
    d: int
    l: int
    measure_mode: str
    params: dict
    T: float
    n: int
    levels: tuple
    n_max: int
    N: int
    N_levels: tuple
    N_ref: int
    probe_count: int
    initial: str
    initial_b: str
    variant: str
    method: str
    projections: int
    cap: int
    slope_lo: float
    slope_hi: float
    r2_min: float
    ratio_max: float
    max_divergence_step: int
    constants: object = None


def _canonical_law(text):
    law = parse_initial(text)
    if law["kind"] == "point":
        return "point %r" % (float(law["center"]),)
    spread = law["radius"] if law["kind"] == "uniform_ball" else law["scale"]
    return "%s %r %r" % (law["kind"], float(law["center"]), float(spread))


def make_config(experiment="strong-rate", **overrides):
    """Build a validated RunConfig from per-experiment defaults.

    Unknown keyword names raise; constraint violations raise
    ConfigError listing every problem. Pass validate=False to skip the
    cross-field checks (used by the parser to collect its own list).
    """
    validate = overrides.pop("validate", True)
    merged = dict(_BASE_DEFAULTS)
    merged.update(_EXPERIMENT_DEFAULTS.get(experiment, {}))
    unknown = [k for k in overrides if k not in merged]
    if unknown:
        raise ConfigError("unknown config keys: %s"
                          % ", ".join(sorted(unknown)))
    merged.update(overrides)
    merged["experiment"] = experiment

    # resolve derived values so the emitted form is canonical
    if merged["l"] is None:
        merged["l"] = merged["d"]
    if merged["initial_b"] is None:
        merged["initial_b"] = merged["initial"]
    merged["levels"] = tuple(int(v) for v in merged["levels"])
    merged["N_levels"] = tuple(int(v) for v in merged["N_levels"])
    if merged["constants"] is not None:
        merged["constants"] = {str(k): float(v)
                               for k, v in merged["constants"].items()}
    try:
        model = make_model(merged["family"], d=merged["d"], l=merged["l"],
                           params=merged["params"])
        merged["params"] = dict(model.params)
        if merged["measure_mode"] is None:
            merged["measure_mode"] = model.measure_mode
    except (ValueError, TypeError):
        pass  # reported by _violations
    try:
        merged["initial"] = _canonical_law(merged["initial"])
        merged["initial_b"] = _canonical_law(merged["initial_b"])
    except ValueError:
        pass  # reported by _violations
    if merged["measure_mode"] is None:
        merged["measure_mode"] = ""

    cfg = RunConfig(**merged)
    if validate:
        problems = _violations(cfg)
        if problems:
            raise ConfigError(
                "invalid configuration (%d problem%s):\n%s"
                % (len(problems), "s" if len(problems) != 1 else "",
                   "\n".join("  - " + p for p in problems)))
    return cfg


def _whole(x):
    return abs(x - round(x)) <= 1e-9 * max(1.0, abs(x))


def _check_chain(name, chain, problems):
    if not chain:
        return
    last = None
    for v in chain:
        if v < 1:
            problems.append("%s entries must be >= 1, got %d" % (name, v))
            return
        if last is not None and v != 2 * last:
            problems.append("%s must be a doubling chain n0*2^k, got %s"
                            % (name, ",".join(str(u) for u in chain)))
            return
        last = v


def _violations(cfg):
    """Every violated constraint, as human-readable strings."""
    problems = []
    if cfg.experiment not in EXPERIMENTS:
        problems.append("unknown experiment %r; known: %s"
                        % (cfg.experiment, ", ".join(EXPERIMENTS)))
    if cfg.config_version != CONFIG_VERSION:
        problems.append("unsupported config_version %r (this build "
                        "reads %d)" % (cfg.config_version,
                                       CONFIG_VERSION))
    if cfg.reps < 1:
        problems.append("reps must be >= 1, got %d" % cfg.reps)
    if cfg.threads < 1:
        problems.append("threads must be >= 1, got %d" % cfg.threads)
    if not cfg.p > 0:
        problems.append("p must be positive, got %r" % (cfg.p,))
    if not cfg.p0 >= 2:
        problems.append("p0 must be >= 2, got %r" % (cfg.p0,))
    if cfg.d < 1 or cfg.l < 1:
        problems.append("dimensions must be >= 1, got d=%d l=%d"
                        % (cfg.d, cfg.l))

    model = None
    try:
        model = make_model(cfg.family, d=max(cfg.d, 1), l=max(cfg.l, 1),
                           params=cfg.params)
    except (ValueError, TypeError) as exc:
        problems.append(str(exc))
    if model is not None and cfg.measure_mode not in ("", None,
                                                      model.measure_mode):
        problems.append("measure_mode %r does not match family %r "
                        "(which is %r)" % (cfg.measure_mode, cfg.family,
                                           model.measure_mode))

    if not cfg.T > 0:
        problems.append("T must be positive, got %r" % (cfg.T,))
    if cfg.n < 1:
        problems.append("n must be >= 1, got %d" % cfg.n)
    elif cfg.T > 0 and not _whole(cfg.n * cfg.T):
        problems.append("n*T must be a whole number of steps, got "
                        "n=%d T=%r" % (cfg.n, cfg.T))

    if cfg.experiment == "strong-rate":
        if not cfg.levels:
            problems.append("strong-rate needs [grid] levels")
        _check_chain("levels", cfg.levels, problems)
        for lev in cfg.levels:
            if lev >= 1 and cfg.n_max % lev != 0:
                problems.append("level n = %d does not divide "
                                "n_max = %d" % (lev, cfg.n_max))
            if cfg.T > 0 and not _whole(lev * cfg.T):
                problems.append("level n = %d gives a fractional step "
                                "count for T = %r" % (lev, cfg.T))
        if cfg.levels and max(cfg.levels) >= cfg.n_max:
            problems.append("n_max = %d must exceed every level "
                            "(max %d)" % (cfg.n_max, max(cfg.levels)))
        if cfg.T > 0 and not _whole(cfg.n_max * cfg.T):
            problems.append("n_max*T must be a whole number of steps, "
                            "got n_max=%d T=%r" % (cfg.n_max, cfg.T))

    if cfg.experiment == "poc-rate":
        if not cfg.N_levels:
            problems.append("poc-rate needs [ensemble] N_levels")
        _check_chain("N_levels", cfg.N_levels, problems)
        if cfg.N_levels and cfg.N_ref <= max(cfg.N_levels):
            problems.append("N_ref = %d must exceed every ensemble "
                            "size (max %d)" % (cfg.N_ref,
                                               max(cfg.N_levels)))
        if cfg.probe_count < 1:
            problems.append("probe_count must be >= 1, got %d"
                            % cfg.probe_count)

    if cfg.N < 1:
        problems.append("N must be >= 1, got %d" % cfg.N)

    for label, law in (("initial", cfg.initial),
                       ("initial_b", cfg.initial_b)):
        try:
            parse_initial(law)
        except ValueError as exc:
            problems.append("%s: %s" % (label, exc))

    if cfg.variant not in VARIANTS:
        problems.append("unknown taming variant %r; known: %s"
                        % (cfg.variant, ", ".join(VARIANTS)))
    elif cfg.experiment == "ergodic" and cfg.variant != "ergodic":
        problems.append("the ergodic experiment requires taming "
                        "variant 'ergodic', got %r" % (cfg.variant,))

    if cfg.method not in W2_METHODS:
        problems.append("unknown W2 method %r; known: %s"
                        % (cfg.method, ", ".join(W2_METHODS)))
    if cfg.projections < 1:
        problems.append("projections must be >= 1, got %d"
                        % cfg.projections)
    if cfg.cap < 1:
        problems.append("cap must be >= 1, got %d" % cfg.cap)

    if not cfg.slope_lo < cfg.slope_hi:
        problems.append("slope band is empty: slope_lo=%r slope_hi=%r"
                        % (cfg.slope_lo, cfg.slope_hi))
    if not 0.0 <= cfg.r2_min <= 1.0:
        problems.append("r2_min must lie in [0, 1], got %r"
                        % (cfg.r2_min,))
    if not cfg.ratio_max > 0:
        problems.append("ratio_max must be positive, got %r"
                        % (cfg.ratio_max,))
    if cfg.max_divergence_step < 1:
        problems.append("max_divergence_step must be >= 1, got %d"
                        % cfg.max_divergence_step)

    if cfg.constants is not None:
        known = set(REQUIRED_CONSTANTS) | set(OPTIONAL_CONSTANTS)
        unknown = sorted(set(cfg.constants) - known)
        if unknown:
            problems.append("unknown assumption constants: %s"
                            % ", ".join(unknown))
        missing = [k for k in REQUIRED_CONSTANTS
                   if k not in cfg.constants]
        if missing:
            problems.append("assumption constants incomplete; "
                            "missing: %s" % ", ".join(missing))
        elif not unknown:
            if cfg.experiment == "strong-rate" and cfg.levels:
                h_run = 1.0 / min(cfg.levels)
            else:
                h_run = 1.0 / max(cfg.n, 1)
            try:
                check_step_bound(h_run, cfg.constants)
            except ValueError as exc:
                problems.append(str(exc))
    return problems


_SECTIONS = {
    "run": ("config_version", "experiment", "seed", "reps", "threads",
            "out_dir", "p", "p0"),
    "model": ("family", "d", "l", "measure_mode"),
    "grid": ("T", "n", "levels", "n_max"),
    "ensemble": ("N", "N_levels", "N_ref", "probe_count", "initial",
                 "initial_b"),
    "taming": ("variant",),
    "metric": ("method", "projections", "cap"),
    "bands": ("slope_lo", "slope_hi", "r2_min", "ratio_max",
              "max_divergence_step"),
}

_INT_KEYS = {"config_version", "seed", "reps", "threads", "d", "l", "n",
             "n_max", "N", "N_ref", "probe_count", "projections", "cap",
             "max_divergence_step"}
_FLOAT_KEYS = {"p", "p0", "T", "slope_lo", "slope_hi", "r2_min",
               "ratio_max"}
_LIST_KEYS = {"levels", "N_levels"}


def _parse_scalar(key, raw, problems):
    raw = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _LIST_KEYS:
            if not raw:
                return ()
            return tuple(int(s.strip()) for s in raw.split(","))
    except ValueError:
        problems.append("key %r: cannot parse %r" % (key, raw))
        return None
    return raw


def parse_config(text):
    """Parse and validate an INI config; returns a resolved RunConfig.

    Raises ConfigError with the parser's line number on syntax errors,
    or with every violated constraint listed on semantic errors.
    """
    cp = configparser.ConfigParser(interpolation=None,
                                   inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # constants are case-sensitive
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config syntax error: %s" % exc)

    problems = []
    overrides = {}
    for section in cp.sections():
        if section == "constants":
            consts = {}
            for key, raw in cp.items(section):
                try:
                    consts[key] = float(raw)
                except ValueError:
                    problems.append("constant %r: cannot parse %r"
                                    % (key, raw.strip()))
            overrides["constants"] = consts
            continue
        if section not in _SECTIONS:
            problems.append("unknown section [%s]" % section)
            continue
        known = _SECTIONS[section]
        for key, raw in cp.items(section):
            if key in known:
                val = _parse_scalar(key, raw, problems)
                if val is not None:
                    overrides[key] = val
            elif section == "model":
                try:
                    overrides.setdefault("params", {})[key] = float(raw)
                except ValueError:
                    problems.append("model parameter %r: cannot parse "
                                    "%r" % (key, raw.strip()))
            else:
                problems.append("unknown key %r in section [%s]"
                                % (key, section))

    experiment = overrides.pop("experiment", "strong-rate")
    try:
        cfg = make_config(experiment, validate=False, **overrides)
        problems.extend(_violations(cfg))
    except ConfigError as exc:
        problems.append(str(exc))
        cfg = None
    if problems:
        raise ConfigError(
            "invalid configuration (%d problem%s):\n%s"
            % (len(problems), "s" if len(problems) != 1 else "",
               "\n".join("  - " + p for p in problems)))
    return cfg


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(str(int(u)) for u in v)
    return str(v)


def emit_config(cfg):
    """Canonical INI text for a RunConfig; parse_config round-trips it."""
    lines = ["[run]",
             "config_version = %d" % cfg.config_version,
             "experiment = %s" % cfg.experiment,
             "seed = %d" % cfg.seed,
             "reps = %d" % cfg.reps,
             "threads = %d" % cfg.threads,
             "out_dir = %s" % cfg.out_dir,
             "p = %s" % _fmt(cfg.p),
             "p0 = %s" % _fmt(cfg.p0),
             "",
             "[model]",
             "family = %s" % cfg.family,
             "d = %d" % cfg.d,
             "l = %d" % cfg.l,
             "measure_mode = %s" % cfg.measure_mode]
    for key in sorted(cfg.params):
        lines.append("%s = %s" % (key, _fmt(float(cfg.params[key]))))
    lines += ["",
              "[grid]",
              "T = %s" % _fmt(cfg.T),
              "n = %d" % cfg.n,
              "levels = %s" % _fmt(cfg.levels),
              "n_max = %d" % cfg.n_max,
              "",
              "[ensemble]",
              "N = %d" % cfg.N,
              "N_levels = %s" % _fmt(cfg.N_levels),
              "N_ref = %d" % cfg.N_ref,
              "probe_count = %d" % cfg.probe_count,
              "initial = %s" % cfg.initial,
              "initial_b = %s" % cfg.initial_b,
              "",
              "[taming]",
              "variant = %s" % cfg.variant,
              "",
              "[metric]",
              "method = %s" % cfg.method,
              "projections = %d" % cfg.projections,
              "cap = %d" % cfg.cap,
              "",
              "[bands]",
              "slope_lo = %s" % _fmt(cfg.slope_lo),
              "slope_hi = %s" % _fmt(cfg.slope_hi),
              "r2_min = %s" % _fmt(cfg.r2_min),
              "ratio_max = %s" % _fmt(cfg.ratio_max),
              "max_divergence_step = %d" % cfg.max_divergence_step]
    if cfg.constants is not None:
        lines += ["", "[constants]"]
        order = [k for k in REQUIRED_CONSTANTS if k in cfg.constants]
        order += [k for k in OPTIONAL_CONSTANTS if k in cfg.constants]
        order += sorted(set(cfg.constants) - set(order))
        for key in order:
            lines.append("%s = %s" % (key, _fmt(float(cfg.constants[key]))))
    return "\n".join(lines) + "\n"
