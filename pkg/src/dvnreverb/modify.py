"""
Model-level transformations: gating, time stretching, spectral-evolution
scaling and the two time reversals. All functions return a new model and
leave their input untouched.
"""

import numpy as np

from .sequence import DensityProfile, round_half_up
from .synthesis import interpolate_to_pulses


def gate(model, gate_time):
    """
    Gate the late part at ``gate_time`` samples: pulses at or after it are
    dropped and the rendered late part is cut there.
    """
    if gate_time <= 0:
        raise ValueError("gate_time must be positive")
    gate_time = int(gate_time)
    if model.gate is not None:
        gate_time = min(gate_time, model.gate)
    if gate_time >= model.duration:
        return model.copy(gate=model.gate)
    return model.copy(gate=gate_time)


def gate_ir(ir, gate_time):
    """Zero every sample at or after ``gate_time``."""
    if gate_time <= 0:
        raise ValueError("gate_time must be positive")
    out = np.array(ir, dtype=float)
    out[int(gate_time):] = 0.0
    return out


def stretch(model, factor):
    """Scale the late-part duration and frame times by ``factor``; densities are unchanged."""
    if not factor > 0:
        raise ValueError("stretch factor must be positive")
    if factor == 1:
        return model.copy()
    duration = max(int(round_half_up(model.duration * factor)), 1)
    density = DensityProfile(model.density.start_density, model.density.end_density, duration)
    gate_time = None if model.gate is None else max(int(round_half_up(model.gate * factor)), 1)
    return model.copy(frame_times=model.frame_times * factor, density=density, gate=gate_time)


def scale_spectral_evolution(model, alpha):
    """
    Keep the first ``round(L_F * alpha)`` probability columns and spread them
    over all frames, slowing the spectral change; gains are left as they are.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    n_frames = model.num_frames
    keep = max(int(round_half_up(n_frames * alpha)), 1)
    if keep == n_frames:
        return model.copy()
    sub = model.prob_matrix[:, :keep]
    if keep == 1:
        P = np.repeat(sub, n_frames, axis=1)
    else:
        pos = np.arange(n_frames) * (keep - 1) / (n_frames - 1)
        P = interpolate_to_pulses(sub, np.arange(keep), pos, normalize=True)
    return model.copy(prob_matrix=P)


def reverse_spectral(model):
    """Run the spectral evolution backwards in time while keeping the gain envelope."""
    return model.copy(prob_matrix=model.prob_matrix[:, ::-1].copy(),
                      degenerate_frames=model.degenerate_frames.copy())


def reverse_decay(model):
    """
    Reverse the frame-gain envelope (and the density profile with it), keeping
    the spectral evolution. The early part is then appended after the late
    part at synthesis time.
    """
    return model.copy(frame_gains=model.frame_gains[::-1].copy(),
                      degenerate_frames=model.degenerate_frames[::-1].copy(),
                      density=model.density.reversed(),
                      decay_reversed=not model.decay_reversed)
