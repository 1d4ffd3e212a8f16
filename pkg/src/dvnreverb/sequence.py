"""
Velvet-noise pulse trains and pulse-to-filter assignment.

A pulse train places exactly one pulse in each temporal grid cell. The grid
size follows the (possibly time-varying) pulse density, each pulse gets a
random sign and, in basic dark-velvet-noise mode, a random width. In the
extended mode each pulse is routed to one dictionary filter, either by the
naive weighted-random rule or by the greedy rule that favours filters which
have not been used for a while.

Filter indices are 0-based throughout the package.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateProbabilityError, InvalidWidthError, InvariantError


def round_half_up(x):
    """Round to the nearest integer, halves towards +inf (``floor(x + 0.5)``)."""
    return np.floor(np.asarray(x, dtype=float) + 0.5).astype(np.int64)


def make_rng(seed):
    """
    Seeded random stream. A ``Generator`` (or any object with a ``random(size)``
    method) is returned unchanged.
    """
    if isinstance(seed, np.random.Generator) or hasattr(seed, "random"):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class DensityProfile:
    """Pulse density falling (or rising) linearly from start to end over ``duration`` samples."""

    start_density: float
    end_density: float
    duration: int

    def __post_init__(self):
        if not (self.start_density > 0 and self.end_density > 0):
            raise ValueError("pulse densities must be positive")
        if self.duration <= 0:
            raise ValueError("duration must be positive")

    def density_at(self, n):
        frac = np.asarray(n, dtype=float) / self.duration
        return self.start_density + (self.end_density - self.start_density) * frac

    def reversed(self):
        return DensityProfile(self.end_density, self.start_density, self.duration)


@dataclass
class PulseTrain:
    locations: np.ndarray
    signs: np.ndarray
    grid_sizes: np.ndarray
    widths: np.ndarray = None
    gains: np.ndarray = None
    filter_indices: np.ndarray = None

    def __len__(self):
        return len(self.locations)

    @property
    def cell_starts(self):
        return np.concatenate(([0.0], np.cumsum(self.grid_sizes)[:-1]))


def grid_size(density, sample_rate):
    """Average spacing in samples between pulses at ``density`` pulses/s."""
    if density <= 0 or sample_rate <= 0:
        raise ValueError("density and sample_rate must be positive")
    return sample_rate / density


def grid_cells(profile, sample_rate):
    """
    Start position and size of every grid cell that fits in the profile.

    The size of each cell is taken from the instantaneous density at the cell
    start; cells are emitted while they end no later than ``duration``.
    """
    starts, sizes = [], []
    start = 0.0
    while True:
        size = sample_rate / float(profile.density_at(start))
        if start + size > profile.duration:
            break
        starts.append(start)
        sizes.append(size)
        start += size
    return np.array(starts), np.array(sizes)


def draw_pulse_widths(count, w_min, w_max, rng):
    if w_min < 1:
        raise ValueError("w_min must be at least one sample")
    if w_max < w_min:
        raise ValueError("w_max must not be below w_min")
    r2 = make_rng(rng).random(count)
    return round_half_up(r2 * (w_max - w_min) + w_min)


def generate_pulse_train(profile, sample_rate, rng, widths=1):
    """
    Generate pulse locations and signs for a density profile.

    Parameters
    ----------
    profile : DensityProfile
    sample_rate : float
    rng : int or numpy.random.Generator
        Seed or generator. Two uniform draws per pulse are consumed: jitter
        first, then signs.
    widths : int or array_like
        Pulse widths in samples, scalar or one per grid cell.

    Returns
    -------
    PulseTrain
    """
    rng = make_rng(rng)
    starts, sizes = grid_cells(profile, sample_rate)
    count = len(starts)
    w = np.broadcast_to(np.asarray(widths, dtype=np.int64), (count,)) if np.ndim(widths) == 0 \
        else np.asarray(widths, dtype=np.int64)
    if len(w) != count:
        raise ValueError(f"expected {count} widths, got {len(w)}")
    if np.any(w < 1) or np.any(w > sizes):
        bad = int(np.flatnonzero((w < 1) | (w > sizes))[0])
        raise InvalidWidthError(f"pulse {bad}: width {w[bad]} outside [1, {sizes[bad]:.3f}]")

    r1 = rng.random(count)
    r3 = rng.random(count)
    locations = round_half_up(starts + r1 * (sizes - w))
    signs = 2 * round_half_up(r3) - 1
    return PulseTrain(
        locations=locations,
        signs=signs.astype(np.int8),
        grid_sizes=sizes,
        widths=np.array(w),
    )


def render_basic_dvn(train, length):
    """Dense basic dark-velvet-noise sequence: rectangular pulses of sign s(m) and width w(m)."""
    out = np.zeros(length)
    if len(train) == 0:
        return out
    widths = train.widths if train.widths is not None else np.ones(len(train), dtype=np.int64)
    ends = train.locations + widths
    if np.any(ends[:-1] > train.locations[1:]):
        m = int(np.flatnonzero(ends[:-1] > train.locations[1:])[0])
        raise InvariantError(f"pulses {m} and {m + 1} overlap")
    if ends[-1] > length:
        raise ValueError("length too short for the last pulse")
    for loc, w, s in zip(train.locations, widths, train.signs):
        out[loc:loc + w] = s
    return out


def _masked_probs(probs):
    probs = np.asarray(probs, dtype=float)
    if probs.ndim == 1:
        probs = probs[:, None]
    dead = ~np.any(probs > 0, axis=0)
    if np.any(dead):
        m = int(np.flatnonzero(dead)[0])
        raise DegenerateProbabilityError(f"pulse {m} has an all-zero probability vector", pulse=m)
    return probs


def naive_assign(probs, rng):
    """
    Weighted random assignment, ``k(m) = argmax_i r_i(m) p_i(m)``.

    ``probs`` has shape ``(N, M)``: one probability column per pulse. Filters
    with zero probability are never selected; ties go to the lowest index.
    """
    probs = _masked_probs(probs)
    r = make_rng(rng).random(probs.shape)
    score = np.where(probs > 0, r * probs, -np.inf)
    return np.argmax(score, axis=0)


def greedy_assign(probs, kappa, rng):
    """
    Greedy assignment ``k(m) = argmax_i (tau_i(m) + kappa r_i(m)) p_i(m)``.

    ``tau_i`` counts pulses since filter ``i`` was last chosen and starts at 0
    for every filter. Ties go to the lowest index.
    """
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    probs = _masked_probs(probs)
    n_filt, count = probs.shape
    r = make_rng(rng).random(probs.shape)
    # row-major python lists are much faster than per-step numpy calls here
    p_cols = probs.T.tolist()
    r_cols = (kappa * r).T.tolist()
    tau = [0] * n_filt
    out = np.empty(count, dtype=np.int64)
    for m in range(count):
        p = p_cols[m]
        rr = r_cols[m]
        best, best_score = -1, -np.inf
        for i in range(n_filt):
            if p[i] > 0:
                score = (tau[i] + rr[i]) * p[i]
                if score > best_score:
                    best, best_score = i, score
        out[m] = best
        for i in range(n_filt):
            tau[i] += 1
        tau[best] = 0
    return out
