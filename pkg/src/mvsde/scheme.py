"""Fully explicit (tamed) Euler stepping for interacting particles.

One step at level n with step size h = 1/n advances every particle from
the old ensemble state and the old empirical measure:

    X'_i = X_i + (b_n(X_i, mu) + (1/N) sum_j f_n(X_i, X_j)) h
               + (sigma_n(X_i, mu) + (1/N) sum_j g_n(X_i, X_j)) dW_i

where the _n subscript is the taming transform of the wrapped model.
Nothing reads the updated buffer during a step, so the result does not
depend on particle evaluation order; the kernel sums use a fixed
ascending-j accumulation per particle (see mvsde._core), which makes whole
trajectories reproducible bit for bit, including across the compiled and
fallback backends.
"""

import os

import numpy as np

from . import model as model_mod
from . import rng as rng_mod
from .ensemble import make_ensemble, empirical_moment, snapshot_csv
from .taming import TamedModel, taming_parameters, _rpow
from ._core import pair_aggregate

SCHEME_KINDS = ("tamed_euler", "plain_euler")

# target float64 count per pulled increment block
_CHUNK_ELEMENTS = 1 << 22


class TimeGrid:
    """Uniform grid on [0, T] with mesh h = 1/n.

    n * T must be a whole number; t_k = k / n for k = 0 .. n*T.
    """

    __slots__ = ("T", "n", "h", "total_steps")

    def __init__(self, T, n):
        self.T = float(T)
        self.n = int(n)
        if self.n < 1:
            raise ValueError("n must be >= 1")
        self.h = 1.0 / self.n
        self.total_steps = rng_mod._whole_steps(self.n, self.T)

    def k_n(self, t):
        """Last grid point at or before t: floor(n t) / n."""
        return np.floor(self.n * np.asarray(t, dtype=np.float64)) / self.n

    def t_at(self, k):
        return np.asarray(k, dtype=np.float64) / self.n

    def __repr__(self):
        return "TimeGrid(T=%g, n=%d)" % (self.T, self.n)


def make_grid(T, n):
    return TimeGrid(T, n)


def _effective_taming(tm, kind):
    if kind not in SCHEME_KINDS:
        raise ValueError("unknown scheme kind %r; known: %s"
                         % (kind, ", ".join(SCHEME_KINDS)))
    if kind == "plain_euler" and tm.variant != "off":
        return TamedModel(tm.base, tm.n, "off")
    return tm


def step(ens, tm, grid, tableau=None, kind="tamed_euler", dW=None):
    """Advance the ensemble by one step of the explicit scheme.

    Parameters
    ----------
    ens : ParticleEnsemble
    tm : TamedModel
    grid : TimeGrid
    tableau : BrownianTableau, optional
        Source of the increment when dW is not given.
    kind : str
        "tamed_euler" uses the wrapped taming variant, "plain_euler"
        forces taming off.
    dW : (N, l) array, optional
        Increment block for this step (first N rows of the tableau level).

    Returns
    -------
    bool
        False once the ensemble has overflowed, True otherwise.
    """
    if ens.overflow_flag:
        return False
    tm = _effective_taming(tm, kind)
    base = tm.base
    par = taming_parameters(tm)
    x = ens.states
    n_part = ens.N

    if dW is None:
        if tableau is None:
            raise ValueError("need a tableau or an explicit dW")
        block = rng_mod.level_increments(tableau, grid.n, ens.t_index,
                                         ens.t_index + 1)
        dW = block[0, :n_part, :]

    # self part and measure coupling, all from the old state; inf/nan
    # propagate silently into the overflow flag below
    with np.errstate(over="ignore", invalid="ignore"):
        mean = x.mean(axis=0)
        b = model_mod._self_drift(base, x)
        if base.measure_mode == "pairwise":
            if base.kap_pair != 0.0:
                b = b + base.kap_pair * (mean - x)
        elif base.lam != 0.0:
            b = b + base.lam * mean

        k = min(base.d, base.l)
        s_diag = np.full((n_part, k), base.s0)
        if base.s1 != 0.0:
            s_diag = s_diag + base.s1 * x[:, :k]
        if base.c_s != 0.0:
            s_diag = s_diag + base.c_s * (mean - x)[:, :k]

        if par["gamma"] != 0.0:
            r2 = np.sum(x * x, axis=-1)
            den = 1.0 + par["gamma"] * _rpow(r2, par["e_self"])
            b = b / den[:, None]
            if par["tame_sigma"]:
                s_diag = s_diag / den[:, None]

        f_sum, g_sum = pair_aggregate(
            x, base.kf1, base.kfq, base.q_f, base.c_g,
            par["gamma"], par["e_kernel"],
            1.0 if par["tame_g"] else 0.0)

        out = ens.scratch
        np.add(x, (b + f_sum) * grid.h, out=out)
        out[:, :k] += (s_diag + g_sum[:, :k]) * dW[:, :k]

    ens.swap_buffers()
    ens.t_index += 1
    if not np.isfinite(ens.states).all():
        ens.overflow_flag = True
        ens.diverged_step = ens.t_index
        return False
    return True


def simulate(tm, grid, tableau, kind="tamed_euler", initial=None,
             initial_states=None, n_particles=None, callbacks=()):
    """Run the explicit scheme over the whole grid.

    Parameters
    ----------
    tm : TamedModel
    grid : TimeGrid
        grid.n must divide tableau.n_max and grid.T must not exceed the
        tableau horizon.
    kind : str
        Scheme kind, see `step`.
    initial : dict, optional
        Initial law (see rng.initial_law); defaults to a point mass at 0.
    initial_states : (N, d) array, optional
        Explicit initial positions, overriding `initial`.
    n_particles : int, optional
        Use only the first n_particles streams of the tableau (defaults
        to tableau.N); smaller runs share noise and initial draws with
        larger ones.
    callbacks : iterable
        Objects whose observe(ens, grid) is called after initialization
        and after every step.

    Returns
    -------
    ParticleEnsemble
        Final state; overflow_flag/diverged_step record divergence.
    """
    n_part = tableau.N if n_particles is None else int(n_particles)
    if n_part < 1 or n_part > tableau.N:
        raise ValueError("n_particles must be in [1, %d]" % tableau.N)
    d = tm.base.d
    if tm.base.l != tableau.l:
        raise ValueError("model noise dimension l=%d does not match "
                         "tableau l=%d" % (tm.base.l, tableau.l))
    if initial_states is not None:
        states = np.asarray(initial_states, dtype=np.float64)
        if states.shape != (n_part, d):
            raise ValueError("initial_states must be (%d, %d)"
                             % (n_part, d))
    else:
        law = initial if initial is not None else rng_mod.initial_law()
        states = rng_mod.sample_initial(tableau, n_part, d, law)
    ens = make_ensemble(states)
    for cb in callbacks:
        cb.observe(ens, grid)

    total = grid.total_steps
    chunk = max(1, _CHUNK_ELEMENTS
                // max(1, (tableau.n_max // grid.n) * tableau.N * tableau.l))
    k = 0
    while k < total and not ens.overflow_flag:
        hi = min(total, k + chunk)
        block = rng_mod.level_increments(tableau, grid.n, k, hi)
        for j in range(k, hi):
            alive = step(ens, tm, grid, kind=kind,
                         dW=block[j - k, :n_part, :])
            for cb in callbacks:
                cb.observe(ens, grid)
            if not alive:
                break
        k = hi
    return ens


class MomentTracker:
    """Records (t, p-th empirical moment) after every step."""

    def __init__(self, p):
        self.p = float(p)
        self.times = []
        self.values = []

    def observe(self, ens, grid):
        self.times.append(float(grid.t_at(ens.t_index)))
        self.values.append(empirical_moment(ens, self.p))


class StateRecorder:
    """Copies ensemble states at selected step indices.

    Records at steps in `steps` if given, else at multiples of `stride`
    (always including step 0 and the final step).
    """

    def __init__(self, stride=1, steps=None):
        self.stride = int(stride)
        self.steps = None if steps is None else set(int(s) for s in steps)
        self.recorded_steps = []
        self.states = []

    def _want(self, k, total):
        if self.steps is not None:
            return k in self.steps
        return k % self.stride == 0 or k == total

    def observe(self, ens, grid):
        k = ens.t_index
        if self._want(k, grid.total_steps):
            self.recorded_steps.append(k)
            self.states.append(ens.states.copy())


class SnapshotWriter:
    """Writes CSV snapshots at selected step indices."""

    def __init__(self, out_dir, steps, prefix="snapshot"):
        self.out_dir = out_dir
        self.steps = set(int(s) for s in steps)
        self.prefix = prefix
        self.written = []
        os.makedirs(out_dir, exist_ok=True)

    def observe(self, ens, grid):
        k = ens.t_index
        if k in self.steps:
            t = float(grid.t_at(k))
            path = os.path.join(self.out_dir,
                                "%s_step%06d.csv" % (self.prefix, k))
            snapshot_csv(ens, path, t)
            self.written.append(path)
