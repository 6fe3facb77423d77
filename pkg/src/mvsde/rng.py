"""Deterministic Brownian increment tables with exact refinement.

Every particle owns a counter-based Philox stream keyed by (seed, particle
index), so the table's contents depend only on (seed, N, l, T, n_max) and
never on evaluation order, thread count, or which subsets are requested.
Uniform draws are mapped through the inverse normal CDF and then snapped to
the grid 2^-26 Z. Quantized increments at the finest level are integer
multiples of 2^-26 with magnitude far below 2^27, so any partial sum of up
to ~2^21 of them is exactly representable in float64: coarse-level
increments (sums of consecutive finest ones) are exact and independent of
summation order, which makes refinement couplings reproducible to the bit.

Levels n must divide n_max; the increment at level n for step k is the sum
of the n_max/n finest increments it covers. On [0, T] the finest table has
n_max*T rows per particle; with policy "store" the whole (S, N, l) block is
materialized (subject to an element cap), with "regenerate" rows are
recomputed on demand through Philox counter offsets, which yields the same
bits as the stored pass.
"""

import math

import numpy as np
from scipy.special import ndtri

# grid spacing for increment quantization
QUANT = 2.0 ** -26
# smallest uniform fed to ndtri (Generator.random can return exactly 0)
_U_FLOOR = 2.0 ** -54
_MASK64 = (1 << 64) - 1
# key whitening for the initial-condition streams
_INIT_SALT = 0x9E3779B97F4A7C15
DEFAULT_ELEMENT_CAP = 2 ** 24


class BrownianTableau:
    """Handle to a deterministic table of Brownian increments.

    Attributes
    ----------
    seed : int
    N : int
        Number of particle streams.
    l : int
        Noise dimension per particle.
    T : float
        Time horizon; n_max * T must be a whole number of steps.
    n_max : int
        Finest level; increments at the finest level have variance 1/n_max
        (up to quantization).
    policy : str
        "store" or "regenerate".
    """

    __slots__ = ("seed", "N", "l", "T", "n_max", "policy", "element_cap",
                 "total_steps", "_store", "_cache_key", "_cache_arr")

    def __init__(self, seed, N, l, T, n_max, policy, element_cap):
        self.seed = int(seed)
        self.N = int(N)
        self.l = int(l)
        self.T = float(T)
        self.n_max = int(n_max)
        self.policy = policy
        self.element_cap = int(element_cap)
        self.total_steps = _whole_steps(self.n_max, self.T)
        self._store = None
        self._cache_key = None
        self._cache_arr = None

    def __repr__(self):
        return ("BrownianTableau(seed=%d, N=%d, l=%d, T=%g, n_max=%d, "
                "policy=%r)" % (self.seed, self.N, self.l, self.T,
                                self.n_max, self.policy))


def _whole_steps(n, T):
    steps = n * T
    rounded = round(steps)
    if rounded < 1 or abs(steps - rounded) > 1e-9 * max(1.0, abs(steps)):
        raise ValueError("n*T must be a positive whole number of steps, "
                         "got n=%s T=%s" % (n, T))
    return int(rounded)


def _philox(key_lo, key_hi, block_start):
    key = np.array([key_lo & _MASK64, key_hi & _MASK64], dtype=np.uint64)
    counter = np.zeros(4, dtype=np.uint64)
    counter[0] = block_start & _MASK64
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def _stream_doubles(key_lo, key_hi, start, count):
    """Doubles [start, start+count) of the keyed stream, via counter offset.

    Philox yields 4 usable doubles per 128-bit counter block, so a window
    is realized by starting the counter at start // 4 and discarding the
    in-block remainder. This reproduces the same values a single front-to-
    back pass would produce.
    """
    block, offset = divmod(start, 4)
    gen = _philox(key_lo, key_hi, block)
    vals = gen.random(offset + count)
    return vals[offset:] if offset else vals


def _finest_chunk(tab, particle_i, s0, s1):
    """Quantized finest increments, rows [s0, s1) of particle i: (s1-s0, l)."""
    count = (s1 - s0) * tab.l
    u = _stream_doubles(tab.seed, particle_i, s0 * tab.l, count)
    u = np.where(u < _U_FLOOR, _U_FLOOR, u)
    z = ndtri(u)
    scale = math.sqrt(1.0 / tab.n_max)
    w = np.rint(z * scale / QUANT) * QUANT
    return w.reshape(s1 - s0, tab.l)


def make_tableau(seed, N, l, T, n_max, policy="store",
                 element_cap=DEFAULT_ELEMENT_CAP):
    """Create a Brownian increment table.

    Parameters
    ----------
    seed : int
        Stream seed; tables with equal (seed, N, l, T, n_max) hold equal
        values, and the first N' < N particle streams coincide with those
        of a smaller table.
    N, l : int
        Particle count and noise dimension.
    T : float
        Horizon; n_max * T must be integral.
    n_max : int
        Finest level.
    policy : str
        "store" materializes the finest table up front; "regenerate"
        recomputes windows on demand (same bits, less memory).
    element_cap : int
        Maximum stored float64 count; a "store" table larger than this
        raises instead of allocating.

    Returns
    -------
    BrownianTableau
    """
    if policy not in ("store", "regenerate"):
        raise ValueError("policy must be 'store' or 'regenerate', got %r"
                         % (policy,))
    if N < 1 or l < 1 or n_max < 1:
        raise ValueError("N, l, n_max must be >= 1")
    tab = BrownianTableau(seed, N, l, T, n_max, policy, element_cap)
    elements = tab.total_steps * tab.N * tab.l
    if policy == "store":
        if elements > tab.element_cap:
            raise ValueError(
                "tableau needs %d stored elements which exceeds the cap %d; "
                "raise element_cap or use policy='regenerate'"
                % (elements, tab.element_cap))
        store = np.empty((tab.total_steps, tab.N, tab.l))
        for i in range(tab.N):
            store[:, i, :] = _finest_chunk(tab, i, 0, tab.total_steps)
        tab._store = store
    return tab


def _level_ratio(tab, n):
    n = int(n)
    if n < 1 or tab.n_max % n != 0:
        raise ValueError("level n=%d must divide n_max=%d" % (n, tab.n_max))
    _whole_steps(n, tab.T)
    return tab.n_max // n


def _particle_finest(tab, particle_i, s0, s1):
    if tab._store is not None:
        return tab._store[s0:s1, particle_i, :]
    key = particle_i
    if tab._cache_key == key and tab._cache_arr is not None:
        return tab._cache_arr[s0:s1]
    if tab.total_steps * tab.l <= tab.element_cap:
        arr = _finest_chunk(tab, particle_i, 0, tab.total_steps)
        tab._cache_key = key
        tab._cache_arr = arr
        return arr[s0:s1]
    return _finest_chunk(tab, particle_i, s0, s1)


def increments_at_level(tab, n, particle_i, step_k):
    """Brownian increment of particle i over [step_k/n, (step_k+1)/n).

    The value is the exact float64 sum of the finest-level increments the
    interval covers, hence independent of the level at which overlapping
    windows are read.

    Returns
    -------
    (l,) float64 array
    """
    r = _level_ratio(tab, n)
    steps = _whole_steps(n, tab.T)
    if not 0 <= particle_i < tab.N:
        raise ValueError("particle index out of range")
    if not 0 <= step_k < steps:
        raise ValueError("step index out of range at level n=%d" % n)
    rows = _particle_finest(tab, particle_i, step_k * r, (step_k + 1) * r)
    return rows.sum(axis=0)


def level_increments(tab, n, step_lo=0, step_hi=None):
    """Increments for all particles at level n: (steps, N, l) block.

    Sums of quantized finest increments are exact, so the result does not
    depend on reduction order.
    """
    r = _level_ratio(tab, n)
    steps = _whole_steps(n, tab.T)
    if step_hi is None:
        step_hi = steps
    if not 0 <= step_lo <= step_hi <= steps:
        raise ValueError("step window out of range at level n=%d" % n)
    count = step_hi - step_lo
    if tab._store is not None:
        block = tab._store[step_lo * r:step_hi * r]
        return block.reshape(count, r, tab.N, tab.l).sum(axis=1)
    out = np.empty((count, tab.N, tab.l))
    for i in range(tab.N):
        rows = _finest_chunk(tab, i, step_lo * r, step_hi * r)
        out[:, i, :] = rows.reshape(count, r, tab.l).sum(axis=1)
    return out


def initial_law(kind="point", center=0.0, scale=1.0, radius=1.0):
    """Description of an initial condition sampler.

    kind "point": all particles at `center`;
    kind "gaussian": center + scale * Z, Z standard normal;
    kind "uniform_ball": uniform in the ball of given radius around center.
    """
    if kind not in ("point", "gaussian", "uniform_ball"):
        raise ValueError("unknown initial law kind %r" % (kind,))
    return dict(kind=kind, center=center, scale=float(scale),
                radius=float(radius))


def parse_initial(text):
    """Parse an initial-law string: kind followed by its numbers.

    "point 3.0"          point mass at 3.0
    "gaussian 0.0 1.0"   center 0.0, scale 1.0
    "uniform_ball 0.0 2.0"  center 0.0, radius 2.0

    Missing numbers default to center 0, scale/radius 1.
    """
    parts = str(text).split()
    if not parts:
        raise ValueError("empty initial-law string")
    kind = parts[0]
    try:
        nums = [float(s) for s in parts[1:]]
    except ValueError:
        raise ValueError("non-numeric value in initial law %r" % (text,))
    if len(nums) > 2:
        raise ValueError("initial law %r has too many values" % (text,))
    center = nums[0] if nums else 0.0
    spread = nums[1] if len(nums) > 1 else 1.0
    if kind == "uniform_ball":
        return initial_law(kind, center=center, radius=spread)
    return initial_law(kind, center=center, scale=spread)


def sample_initial(tab, n_particles, d, law):
    """Draw initial particle states from the tableau's init streams.

    Each particle uses its own keyed stream (independent of the Brownian
    streams), so the first n_particles draws agree across runs that share
    a seed regardless of ensemble size.

    Returns
    -------
    (n_particles, d) float64 array
    """
    if n_particles > tab.N:
        raise ValueError("n_particles=%d exceeds tableau N=%d"
                         % (n_particles, tab.N))
    kind = law["kind"]
    center = np.broadcast_to(np.asarray(law.get("center", 0.0),
                                        dtype=np.float64), (d,))
    out = np.empty((n_particles, d))
    if kind == "point":
        out[:] = center
        return out
    draws = d if kind == "gaussian" else d + 1
    for i in range(n_particles):
        u = _stream_doubles(tab.seed ^ _INIT_SALT, i, 0, draws)
        u = np.where(u < _U_FLOOR, _U_FLOOR, u)
        z = ndtri(u[:d])
        if kind == "gaussian":
            out[i] = center + law["scale"] * z
        else:
            nrm = math.sqrt(float(np.sum(z * z)))
            if nrm == 0.0:
                direction = np.zeros(d)
                direction[0] = 1.0
            else:
                direction = z / nrm
            out[i] = center + law["radius"] * (u[d] ** (1.0 / d)) * direction
    return out
