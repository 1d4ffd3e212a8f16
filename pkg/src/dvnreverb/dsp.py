"""
Signal-processing primitives: STFT, Levinson-Durbin linear prediction,
allpole filters, DC blockers and FFT convolution.
"""

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import (
    AnalysisError,
    ConditioningError,
    DegenerateFrameError,
    StabilityError,
)


def next_pow2(n):
    return 1 << max(int(n) - 1, 0).bit_length()


@dataclass(frozen=True)
class StftConfig:
    """Hann-windowed STFT framing. ``hop`` defaults to half the window."""

    fft_length: int
    window_length: int
    hop: int = None

    def __post_init__(self):
        if self.hop is None:
            object.__setattr__(self, "hop", max(self.window_length // 2, 1))
        if self.window_length < 1 or self.hop < 1:
            raise ValueError("window_length and hop must be positive")
        if self.fft_length & (self.fft_length - 1):
            raise ValueError("fft_length must be a power of two")
        if self.window_length > self.fft_length:
            raise ValueError("window_length exceeds fft_length")

    @classmethod
    def from_ms(cls, window_ms, sample_rate, fft_length=2048, hop=None):
        """Window given in ms; the FFT is enlarged to the next power of two if the window needs it."""
        window = int(round(window_ms * 1e-3 * sample_rate))
        return cls(max(fft_length, next_pow2(window)), window, hop)

    @property
    def n_bins(self):
        return self.fft_length // 2 + 1

    def window(self):
        return sps.get_window("hann", self.window_length, fftbins=True)

    def bin_frequencies(self, sample_rate):
        return np.fft.rfftfreq(self.fft_length, 1.0 / sample_rate)

    def n_frames(self, length):
        if length < self.window_length:
            raise AnalysisError(f"signal of {length} samples is shorter than one window ({self.window_length})")
        full, rest = divmod(length - self.window_length, self.hop)
        return full + 1 + (1 if rest else 0)

    def frame_centers(self, length):
        return np.arange(self.n_frames(length)) * self.hop + self.window_length / 2


def stft_frames(x, config):
    """Complex one-sided spectra of the Hann-windowed frames, shape ``(L_F, fft_length // 2 + 1)``."""
    x = np.asarray(x, dtype=float)
    n_frames = config.n_frames(len(x))
    padded_len = (n_frames - 1) * config.hop + config.window_length
    xp = np.zeros(padded_len)
    xp[:len(x)] = x
    frames = np.lib.stride_tricks.sliding_window_view(xp, config.window_length)[::config.hop]
    return np.fft.rfft(frames * config.window(), n=config.fft_length, axis=1)


def stft_magnitudes(x, config):
    return np.abs(stft_frames(x, config))


@dataclass(frozen=True, eq=False)
class AllpoleFilter:
    """``b0 / (1 + a_1 z^-1 + ... + a_P z^-P)``; stability is checked on construction."""

    b0: float
    a: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        object.__setattr__(self, "a", a)
        if not np.all(np.isfinite(a)) or not np.isfinite(self.b0):
            raise StabilityError("non-finite filter coefficients")
        if len(a) and np.any(np.abs(np.roots(np.r_[1.0, a])) >= 1.0):
            raise StabilityError("allpole filter has a pole on or outside the unit circle")

    @property
    def order(self):
        return len(self.a)

    @property
    def denominator(self):
        return np.r_[1.0, self.a]

    def magnitude(self, fft_length):
        """Magnitude response on the ``rfft`` bin grid of length ``fft_length``."""
        return np.abs(self.b0) / np.abs(np.fft.rfft(self.denominator, n=fft_length))

    def scaled(self, factor):
        return AllpoleFilter(self.b0 * factor, self.a)

    def __eq__(self, other):
        return (isinstance(other, AllpoleFilter) and self.b0 == other.b0
                and np.array_equal(self.a, other.a))


def apply_allpole(filt, x):
    return sps.lfilter([filt.b0], filt.denominator, np.asarray(x, dtype=float))


def apply_inverse(filt, x):
    """FIR pre-filter ``(1 + sum a_k z^-k) / b0``, the exact inverse of :func:`apply_allpole`."""
    return sps.lfilter(filt.denominator / filt.b0, [1.0], np.asarray(x, dtype=float))


def autocorrelation(x, maxlag):
    x = np.asarray(x, dtype=float)
    n = len(x)
    nfft = next_pow2(2 * n)
    spec = np.fft.rfft(x, nfft)
    r = np.fft.irfft(np.abs(spec) ** 2, nfft)[:maxlag + 1]
    if len(r) < maxlag + 1:
        r = np.r_[r, np.zeros(maxlag + 1 - len(r))]
    return r


def levinson_durbin(r, order):
    """
    Solve the normal equations for an order-``order`` predictor.

    Returns
    -------
    a : ndarray
        Coefficients ``a_1..a_P`` of ``A(z) = 1 + sum a_k z^-k``.
    err : float
        Final prediction-error power.
    k : ndarray
        Reflection coefficients.
    """
    r = np.asarray(r, dtype=float)
    if len(r) < order + 1:
        raise ValueError("autocorrelation too short for the requested order")
    a = np.zeros(order)
    refl = np.zeros(order)
    err = r[0]
    for i in range(order):
        acc = r[i + 1] + np.dot(a[:i], r[i:0:-1])
        k = -acc / err
        if not np.abs(k) < 1.0:
            raise ConditioningError(f"reflection coefficient {k:.6g} at stage {i + 1}")
        a[:i] = a[:i] + k * a[:i][::-1]
        a[i] = k
        refl[i] = k
        err *= 1.0 - k * k
    return a, err, refl


def lp_coefficients(frame, order, spectrum=False, fft_length=None):
    """
    Allpole model of a frame by the autocorrelation method.

    With ``spectrum=True`` the input is a one-sided magnitude spectrum and the
    autocorrelation is the inverse transform of its square. The gain is set to
    the square root of the prediction error, so the model's autocorrelation
    (and hence its energy) matches the frame's up to lag ``order``.
    """
    if order < 1:
        raise ValueError("order must be at least one")
    frame = np.asarray(frame, dtype=float)
    if spectrum:
        n = fft_length or 2 * (len(frame) - 1)
        r = np.fft.irfft(frame ** 2, n=n)[:order + 1]
    else:
        r = autocorrelation(frame, order)
    if not r[0] > 0:
        raise DegenerateFrameError("frame has zero energy")
    r = r.copy()
    r[0] *= 1.0 + 1e-9
    a, err, _ = levinson_durbin(r, order)
    return AllpoleFilter(float(np.sqrt(err)), a)


@dataclass(frozen=True)
class DcBlocker:
    """``(1+R)/2 * (1 - z^-1) / (1 - R z^-1)``: zero at DC, unit gain at Nyquist."""

    pole_radius: float

    def __post_init__(self):
        if not 0.0 < self.pole_radius < 1.0:
            raise ValueError("pole radius must lie in (0, 1)")

    @property
    def gain(self):
        return 0.5 * (1.0 + self.pole_radius)

    def coefficients(self):
        return self.gain * np.array([1.0, -1.0]), np.array([1.0, -self.pole_radius])

    def magnitude(self, freqs, sample_rate):
        z = np.exp(-2j * np.pi * np.asarray(freqs, dtype=float) / sample_rate)
        return np.abs(self.gain * (1 - z) / (1 - self.pole_radius * z))

    def apply(self, x):
        b, a = self.coefficients()
        return sps.lfilter(b, a, np.asarray(x, dtype=float))

    def apply_inverse(self, x, softened_radius=0.9999):
        """Approximate inverse; the zero at DC becomes a pole at ``softened_radius``."""
        b, a = self.coefficients()
        return sps.lfilter(a / self.gain, [1.0, -softened_radius], np.asarray(x, dtype=float))


DC_POLE_GRID = np.round(np.r_[
    np.arange(0.90, 0.99 + 1e-9, 0.01),
    np.arange(0.991, 0.999 + 1e-9, 0.001),
    np.arange(0.9991, 0.9999 + 1e-9, 0.0001),
], 4)


def fit_dc_blocker(spectrum, sample_rate, fft_length=None, cutoff=200.0, ref_band=(200.0, 2000.0),
                   flat_db=1.0, fallback=0.995, smooth_bins=5):
    """
    Fit a DC blocker to the low-frequency roll-off of a whitened spectrum.

    The residual is the smoothed power spectrum relative to its mean over
    ``ref_band``; the pole radius minimizing the squared dB error below
    ``cutoff`` is picked from :data:`DC_POLE_GRID`. When the residual stays
    within ``flat_db`` of 0 dB the fallback radius is returned.
    """
    mag = np.asarray(spectrum, dtype=float)
    fft_length = fft_length or 2 * (len(mag) - 1)
    freqs = np.fft.rfftfreq(fft_length, 1.0 / sample_rate)[:len(mag)]
    power = mag ** 2
    if smooth_bins > 1:
        kernel = np.ones(smooth_bins) / smooth_bins
        # mirror around DC so the first bins are not biased by zero padding
        ext = np.r_[power[smooth_bins:0:-1], power]
        power = np.convolve(ext, kernel, mode="same")[smooth_bins:]
    ref_sel = (freqs >= ref_band[0]) & (freqs <= ref_band[1])
    low = (freqs > 0) & (freqs < cutoff)
    if not np.any(ref_sel) or not np.any(low):
        return DcBlocker(fallback)
    ref = np.mean(power[ref_sel])
    if not ref > 0:
        return DcBlocker(fallback)
    residual_db = 10 * np.log10(np.maximum(power[low], 1e-30) / ref)
    if np.max(np.abs(residual_db)) <= flat_db:
        return DcBlocker(fallback)
    best, best_err = None, np.inf
    for radius in DC_POLE_GRID:
        model_db = 20 * np.log10(DcBlocker(radius).magnitude(freqs[low], sample_rate))
        err = np.sum((model_db - residual_db) ** 2)
        if err < best_err:
            best, best_err = radius, err
    return DcBlocker(float(best))


def fft_convolve(a, b):
    """Linear convolution of two non-empty signals, length ``len(a) + len(b) - 1``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("fft_convolve needs non-empty inputs")
    return sps.fftconvolve(a, b, mode="full")
