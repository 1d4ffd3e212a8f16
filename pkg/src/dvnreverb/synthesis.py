"""
Render a fitted model into an impulse response.

Pulses are generated for the model's density profile, frame probabilities and
gains are interpolated to the pulse locations, each pulse is routed to one
dictionary filter, and the filtered sub-sequences are summed and passed
through the post-filter and DC blockers.
"""

from dataclasses import dataclass

import numpy as np

from .dsp import apply_allpole
from .errors import DegenerateProbabilityError
from .model import ImpulseResponse
from .sequence import (
    DensityProfile,
    generate_pulse_train,
    greedy_assign,
    make_rng,
    naive_assign,
)

ASSIGNMENT_MODES = ("greedy", "naive", "fvn_filter_interp")


@dataclass
class SynthesisConfig:
    seed: int = None
    kappa: float = 1.0
    assignment: str = "greedy"
    length: int = None
    include_early: bool = False
    method: str = "recursive"

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if self.assignment not in ASSIGNMENT_MODES:
            raise ValueError(f"assignment must be one of {ASSIGNMENT_MODES}")
        if self.method not in ("recursive", "sparse"):
            raise ValueError("method must be 'recursive' or 'sparse'")


@dataclass
class LateRendering:
    samples: np.ndarray
    train: object
    probs: np.ndarray
    frame_gains: np.ndarray


def interpolate_to_pulses(frame_values, frame_times, pulse_locations, normalize=False):
    """
    Linearly interpolate per-frame values at the pulse locations.

    ``frame_values`` is a vector or a ``(rows, L_F)`` matrix. Queries outside
    the frame times take the nearest endpoint value. With ``normalize`` each
    interpolated column is rescaled to sum to one.
    """
    values = np.asarray(frame_values, dtype=float)
    times = np.asarray(frame_times, dtype=float)
    if values.shape[-1] == 0 or len(times) == 0:
        raise ValueError("no frames to interpolate")
    if np.any(np.diff(times) <= 0):
        raise ValueError("frame times must be strictly increasing")
    query = np.asarray(pulse_locations, dtype=float)
    if values.ndim == 1:
        return np.interp(query, times, values)
    out = np.stack([np.interp(query, times, row) for row in values])
    if normalize:
        sums = out.sum(axis=0)
        ok = sums > 0
        out[:, ok] /= sums[ok]
    return out


def pulse_gains(interp_gains, grid_sizes):
    """Per-pulse gain ``g(m) = ghat(m) * sqrt(T(m))`` compensating the varying density."""
    return np.asarray(interp_gains, dtype=float) * np.sqrt(np.asarray(grid_sizes, dtype=float))


def nearest_frame(frame_times, pulse_locations):
    """Index of the frame centre closest to each pulse (ties to the earlier frame)."""
    times = np.asarray(frame_times, dtype=float)
    loc = np.asarray(pulse_locations, dtype=float)
    right = np.clip(np.searchsorted(times, loc, side="left"), 1, max(len(times) - 1, 1))
    if len(times) == 1:
        return np.zeros(len(loc), dtype=np.int64)
    left = right - 1
    pick_right = (times[right] - loc) < (loc - times[left])
    return np.where(pick_right, right, left).astype(np.int64)


def fvn_mode_assign(prob_matrix, frame_times, pulse_locations, mode, rng=None, kappa=1.0, rule="greedy"):
    """
    Filter assignment in the filtered-velvet-noise special case.

    ``filter_interp`` takes the most probable filter of each frame and holds it
    over the pulses nearest to that frame, switching at segment boundaries.
    ``probability_interp`` interpolates the probabilities first and assigns
    per pulse with ``rule`` (greedy or naive).
    """
    P = np.asarray(prob_matrix, dtype=float)
    if mode == "filter_interp":
        per_frame = np.argmax(P, axis=0)
        return per_frame[nearest_frame(frame_times, pulse_locations)]
    if mode == "probability_interp":
        probs = interpolate_to_pulses(P, frame_times, pulse_locations, normalize=True)
        if rule == "naive":
            return naive_assign(probs, rng)
        return greedy_assign(probs, kappa, rng)
    raise ValueError(f"unknown mode {mode!r}")


def impulse_response(filt, max_length, floor_db=-120.0, block=4096):
    """Impulse response of an allpole filter, truncated once it stays below ``floor_db`` re its peak."""
    n = min(block, max_length)
    while True:
        imp = np.zeros(n)
        imp[0] = 1.0
        h = apply_allpole(filt, imp)
        peak = np.max(np.abs(h))
        above = np.flatnonzero(np.abs(h) >= peak * 10 ** (floor_db / 20))
        last = above[-1] + 1 if len(above) else 1
        if last < n or n >= max_length:
            return h[:last]
        n = min(2 * n, max_length)


def render_subsequences(dictionary, locations, amplitudes, filter_indices, length, method="recursive"):
    """
    Sum of the dictionary-filtered sub-sequences.

    ``recursive`` runs each allpole filter over its full sparse input;
    ``sparse`` scatter-adds truncated filter impulse responses at the pulse
    locations.
    """
    out = np.zeros(length)
    for i, entry in enumerate(dictionary):
        sel = filter_indices == i
        if not np.any(sel):
            continue
        if method == "recursive":
            v = np.zeros(length)
            np.add.at(v, locations[sel], amplitudes[sel])
            out += apply_allpole(entry.allpole, v)
        else:
            h = impulse_response(entry.allpole, length)
            for loc, amp in zip(locations[sel], amplitudes[sel]):
                end = min(length, loc + len(h))
                out[loc:end] += amp * h[:end - loc]
    return out


def render_late(model, config=None):
    """Render only the modeled late part; returns a :class:`LateRendering`."""
    config = config or SynthesisConfig()
    seed = model.seed if config.seed is None else config.seed
    rng = make_rng(seed)
    length = config.length or model.duration
    profile = DensityProfile(model.density.start_density, model.density.end_density, length)
    train = generate_pulse_train(profile, model.sample_rate, rng)

    probs = interpolate_to_pulses(model.prob_matrix, model.frame_times, train.locations, normalize=True)
    ghat = interpolate_to_pulses(model.frame_gains, model.frame_times, train.locations)
    dead = ~np.any(probs > 0, axis=0)
    if np.any(dead):
        m = int(np.flatnonzero(dead)[0])
        raise DegenerateProbabilityError(f"degenerate probabilities at pulse {m}", pulse=m)

    if config.assignment == "greedy":
        k = greedy_assign(probs, config.kappa, rng)
    elif config.assignment == "naive":
        k = naive_assign(probs, rng)
    else:
        k = fvn_mode_assign(model.prob_matrix, model.frame_times, train.locations, "filter_interp")

    train.gains = pulse_gains(ghat, train.grid_sizes)
    train.filter_indices = k
    keep = np.ones(len(train), dtype=bool)
    if model.gate is not None:
        keep = train.locations < model.gate
    amplitudes = train.signs * train.gains * keep

    late = render_subsequences(model.dictionary, train.locations, amplitudes, k, length, config.method)
    late = apply_allpole(model.post_filter, late)
    for dc in model.dc_blockers:
        late = dc.apply(late)
    if model.gate is not None:
        # the filters would ring past the last kept pulse; a gate is a hard cut
        late[model.gate:] = 0.0
    return LateRendering(late, train, probs, ghat)


def synthesize(model, config=None):
    """
    Render a model to an :class:`ImpulseResponse`.

    With ``include_early`` the stored early part is placed before the late
    part; for decay-reversed models it is reversed and appended after it.
    """
    config = config or SynthesisConfig()
    late = render_late(model, config).samples
    early = model.early_part if model.early_part is not None else np.zeros(0)
    if not config.include_early or len(early) == 0:
        return ImpulseResponse(late, model.sample_rate, 0)
    if model.decay_reversed:
        return ImpulseResponse(np.concatenate([late, early[::-1]]), model.sample_rate, 0)
    out = np.zeros(len(early) + len(late))
    out[:len(early)] += early
    out[len(early):] += late
    return ImpulseResponse(out, model.sample_rate, len(early))


def predict_psd(model_or_dictionary, p):
    """
    Expected magnitude spectrum ``sum_i |F_i(w)| p_i`` on the analysis bin grid.

    Accepts a :class:`DvnModel` or a list of dictionary filters.
    """
    dictionary = getattr(model_or_dictionary, "dictionary", model_or_dictionary)
    mags = np.stack([d.magnitude_response for d in dictionary], axis=1)
    return mags @ np.asarray(p, dtype=float)


def predict_power_spectrum(model_or_dictionary, p):
    """Per-sample power spectrum ``sum_i |F_i(w)|^2 p_i`` of unit-gain extended velvet noise."""
    dictionary = getattr(model_or_dictionary, "dictionary", model_or_dictionary)
    mags = np.stack([d.magnitude_response for d in dictionary], axis=1)
    return (mags ** 2) @ np.asarray(p, dtype=float)
