"""
Fit an extended dark-velvet-noise model to a measured impulse response.

The pipeline whitens the late part with an LP pre-filter, fits DC blockers,
designs a dictionary of second-order allpole filters from a logarithmically
spaced subset of analysis frames, and fits per-frame non-negative activations
of the dictionary magnitudes to the frame magnitudes. Column sums of the
activations give the broadband frame gains; the normalized columns give the
filter probabilities.
"""

from dataclasses import dataclass

import numpy as np

from .dsp import (
    AllpoleFilter,
    StftConfig,
    apply_inverse,
    fit_dc_blocker,
    lp_coefficients,
    stft_magnitudes,
)
from .errors import AnalysisError, DegenerateFrameError, DvnError
from .model import DEFAULT_SEED, DictionaryFilter, DvnModel
from .nnls import solve_nnls_batch
from .sequence import DensityProfile, round_half_up


@dataclass
class AnalysisConfig:
    late_start_ms: float = 110.0
    window_ms: float = 85.0
    fft_length: int = 2048
    hop: int = None
    num_filters: int = 10
    lp_order: int = 10
    num_dc_blockers: int = 1
    density: tuple = (2000.0, 500.0)
    seed: int = DEFAULT_SEED
    calibrate_level: bool = True
    output_normalized: bool = True
    invert_dc_blockers: bool = False

    def framing(self, sample_rate):
        return StftConfig.from_ms(self.window_ms, sample_rate, self.fft_length, self.hop)

    def late_start(self, sample_rate):
        return int(round(self.late_start_ms * 1e-3 * sample_rate))


def whiten(late, sample_rate, framing, lp_order=10, num_dc_blockers=1, invert_dc_blockers=False):
    """
    Whiten a late-reverberation signal.

    Returns the whitened signal, the LP post-filter fitted to the first STFT
    frame, and the DC blockers. Each DC blocker is fitted to the first frame
    after the LP inverse and the inverses of the blockers found so far. The
    whitened signal is the input passed through the LP inverse only; with
    ``invert_dc_blockers`` the (pole-softened) blocker inverses are applied
    as well.
    """
    late = np.asarray(late, dtype=float)
    if len(late) < framing.window_length:
        raise AnalysisError("late part shorter than one analysis window", stage="whiten")
    if not np.any(late[:framing.window_length]):
        raise AnalysisError("first analysis frame of the late part is silent", stage="whiten")
    first = stft_magnitudes(late[:framing.window_length], framing)[0]
    post = lp_coefficients(first, lp_order, spectrum=True, fft_length=framing.fft_length)

    whitened = apply_inverse(post, late)
    head = whitened[:framing.window_length]
    blockers = []
    for _ in range(num_dc_blockers):
        spec = stft_magnitudes(head, framing)[0]
        dc = fit_dc_blocker(spec, sample_rate, framing.fft_length)
        blockers.append(dc)
        head = dc.apply_inverse(head)
        if invert_dc_blockers:
            whitened = dc.apply_inverse(whitened)
    return whitened, post, blockers


def select_frames(num_frames, num_filters):
    """
    Logarithmically spaced subset of frame indices (0-based).

    Uses the smallest number ``k >= num_filters`` of geometrically spaced
    points between frame 1 and frame ``num_frames`` whose rounded values give
    exactly ``num_filters`` distinct frames. For 50 frames and 10 filters this
    yields frames 1, 2, 3, 5, 7, 10, 15, 23, 34, 50 (1-based).
    """
    if num_filters < 1:
        raise ValueError("num_filters must be at least one")
    if num_filters > num_frames:
        raise AnalysisError(f"{num_filters} filters requested from {num_frames} frames", stage="dictionary")
    if num_filters == num_frames:
        return np.arange(num_frames)
    if num_filters == 1:
        return np.array([0])
    for k in range(num_filters, 20 * num_frames + 10):
        picks = np.unique(round_half_up(np.geomspace(1, num_frames, k)))
        if len(picks) == num_filters:
            return picks - 1
        if len(picks) > num_filters:
            break
    # collision-advance fallback: move duplicates to the next unused frame
    picks = []
    for idx in round_half_up(np.geomspace(1, num_frames, num_filters)):
        while idx in picks:
            idx += 1
        picks.append(int(idx))
    picks = np.minimum(np.array(picks), num_frames)
    return np.unique(picks)[:num_filters] - 1


def frame_filters(mags, framing, order=2):
    """Order-``order`` LP fit to every magnitude frame; silent frames map to a flat filter."""
    filters = []
    for frame in mags:
        try:
            filters.append(lp_coefficients(frame, order, spectrum=True, fft_length=framing.fft_length))
        except (DegenerateFrameError, DvnError):
            filters.append(AllpoleFilter(1.0, np.zeros(order)))
    return filters


def output_weight(post_filter, dc_blockers, framing, sample_rate):
    """Squared magnitude of the post-filter cascade on the analysis bin grid."""
    w = post_filter.magnitude(framing.fft_length) ** 2
    freqs = framing.bin_frequencies(sample_rate)
    for dc in dc_blockers:
        w = w * dc.magnitude(freqs, sample_rate) ** 2
    return w


def design_dictionary(whitened, framing, num_filters=10, order=2, weight=None):
    """
    Order-``order`` LP filters of a logarithmically spaced subset of frames.

    Filters are scaled to unit energy; with ``weight`` (see
    :func:`output_weight`) the energy is measured after the post-filter so
    switching filters leaves the broadband output level unchanged.
    """
    mags = stft_magnitudes(whitened, framing)
    picks = select_frames(len(mags), num_filters)
    return [
        DictionaryFilter.from_allpole(
            lp_coefficients(mags[i], order, spectrum=True, fft_length=framing.fft_length)
            if np.any(mags[i]) else AllpoleFilter(1.0, np.zeros(order)),
            i, framing.fft_length, weight=weight)
        for i in picks
    ]


def probabilities_from_activations(A):
    """
    Frame gains as column 1-norms and probabilities as normalized columns.

    Columns with zero gain are flagged degenerate and given uniform probabilities.
    """
    A = np.asarray(A, dtype=float)
    gains = np.sum(np.abs(A), axis=0)
    degenerate = ~(gains > 0)
    P = np.empty_like(A)
    P[:, ~degenerate] = A[:, ~degenerate] / gains[~degenerate]
    P[:, degenerate] = 1.0 / A.shape[0]
    gains[degenerate] = 0.0
    return P, gains, degenerate


def fit_probabilities(whitened, dictionary, framing, return_details=False):
    """
    Per-frame NNLS of dictionary magnitudes onto the whitened frame magnitudes.

    Returns ``(P, gains)``; with ``return_details`` also the activation
    matrix, the degenerate-frame mask and the per-frame NNLS solutions.
    """
    if not dictionary:
        raise AnalysisError("empty dictionary", stage="fit")
    mags = stft_magnitudes(whitened, framing)
    design = np.stack([d.magnitude_response for d in dictionary], axis=1)
    A, solutions = solve_nnls_batch(design, mags.T)
    P, gains, degenerate = probabilities_from_activations(A)
    if return_details:
        return P, gains, dict(activations=A, degenerate=degenerate, solutions=solutions, targets=mags.T)
    return P, gains


def level_calibration(framing):
    """
    Factor mapping magnitude-domain frame gains to per-sample amplitude.

    For a noise-like frame the mean STFT magnitude is ``sqrt(pi)/2`` times the
    RMS magnitude, which in turn is the signal RMS times the window norm.
    """
    return 2.0 / np.sqrt(np.pi * np.sum(framing.window() ** 2))


def analyze(ir, sample_rate, config=None):
    """
    Fit a :class:`DvnModel` to a mono impulse response.

    The samples before ``config.late_start_ms`` are kept verbatim as the
    early part.
    """
    config = config or AnalysisConfig()
    ir = np.asarray(ir, dtype=float)
    if ir.ndim != 1:
        raise AnalysisError("impulse response must be mono", stage="input")
    framing = config.framing(sample_rate)
    late_start = config.late_start(sample_rate)
    if late_start >= len(ir):
        raise AnalysisError("late_start beyond the end of the impulse response", stage="input")
    late = ir[late_start:]

    try:
        whitened, post, blockers = whiten(late, sample_rate, framing, config.lp_order, config.num_dc_blockers,
                                          config.invert_dc_blockers)
    except AnalysisError:
        raise
    except DvnError as err:
        raise AnalysisError(str(err), stage="whiten") from err
    try:
        weight = output_weight(post, blockers, framing, sample_rate) if config.output_normalized else None
        dictionary = design_dictionary(whitened, framing, config.num_filters, weight=weight)
    except AnalysisError:
        raise
    except DvnError as err:
        raise AnalysisError(str(err), stage="dictionary") from err
    try:
        P, gains, details = fit_probabilities(whitened, dictionary, framing, return_details=True)
    except DvnError as err:
        raise AnalysisError(str(err), stage="fit") from err

    if config.calibrate_level:
        post = post.scaled(level_calibration(framing))
    start, end = config.density
    return DvnModel(
        sample_rate=float(sample_rate),
        late_start=late_start,
        post_filter=post,
        dc_blockers=blockers,
        dictionary=dictionary,
        prob_matrix=P,
        frame_gains=gains,
        framing=framing,
        frame_times=framing.frame_centers(len(late)),
        density=DensityProfile(float(start), float(end), len(late)),
        early_part=ir[:late_start].copy(),
        seed=config.seed,
        degenerate_frames=details["degenerate"],
    )


def fit_matched_dictionary(whitened, framing, order=2):
    """
    Uniform-segmentation filtered-velvet-noise fit.

    Every analysis frame contributes its own LP filter to the dictionary and
    the LP envelopes themselves are the fit targets, so a diagonal probability
    matrix is the exact solution whenever the envelopes are linearly
    independent.

    Returns ``(dictionary, P, gains, details)``.
    """
    mags = stft_magnitudes(whitened, framing)
    filters = frame_filters(mags, framing, order)
    dictionary = [DictionaryFilter.from_allpole(f, i, framing.fft_length) for i, f in enumerate(filters)]
    targets = np.stack([f.magnitude(framing.fft_length) for f in filters], axis=1)
    design = np.stack([d.magnitude_response for d in dictionary], axis=1)
    A, solutions = solve_nnls_batch(design, targets)
    P, gains, degenerate = probabilities_from_activations(A)
    return dictionary, P, gains, dict(activations=A, solutions=solutions, targets=targets,
                                      design=design, degenerate=degenerate)
