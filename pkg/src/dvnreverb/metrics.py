"""
Objective evaluation: Schroeder energy decay curves, T60 estimates and
errors per octave band, spectrograms and Welch spectra.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from .dsp import StftConfig, stft_magnitudes
from .errors import AnalysisError, InsufficientDecayError

DB_FLOOR = -120.0
OCTAVE_CENTERS = 1000.0 * 2.0 ** np.arange(-5, 5)


def octave_bands(low=125.0, high=8000.0):
    """Nominal octave centre frequencies (powers of two around 1 kHz) within ``[low, high]``."""
    return OCTAVE_CENTERS[(OCTAVE_CENTERS >= low) & (OCTAVE_CENTERS <= high)]


def bandpass(x, center, sample_rate, order=2):
    """Fourth-order Butterworth octave bandpass (second-order prototype) around ``center``."""
    lo = center / np.sqrt(2.0)
    hi = min(center * np.sqrt(2.0), 0.499 * sample_rate)
    sos = sps.butter(order, [lo, hi], btype="bandpass", fs=sample_rate, output="sos")
    return sps.sosfilt(sos, np.asarray(x, dtype=float))


def schroeder_edc(ir, sample_rate=None, band=None):
    """
    Energy decay curve in dB by backward integration, 0 dB at the first sample.

    ``band`` is an octave centre frequency in Hz (requires ``sample_rate``).
    Samples after the last non-zero one are ``-inf``.
    """
    h = np.asarray(ir, dtype=float)
    if band is not None:
        if sample_rate is None:
            raise ValueError("band filtering needs the sample rate")
        h = bandpass(h, band, sample_rate)
    energy = np.cumsum((h ** 2)[::-1])[::-1]
    if not energy[0] > 0:
        raise AnalysisError("silent impulse response has no decay curve", stage="edc")
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(energy / energy[0])


def estimate_t60(edc, sample_rate, fit_range=(-5.0, -25.0)):
    """
    T60 from a least-squares line through the EDC between ``fit_range`` dB.

    Raises
    ------
    InsufficientDecayError
        When the curve never falls below the lower end of the range.
    """
    edc = np.asarray(edc, dtype=float)
    upper, lower = fit_range
    if not np.min(edc) <= lower:
        raise InsufficientDecayError(f"decay curve does not reach {lower} dB")
    sel = np.flatnonzero((edc <= upper) & (edc >= lower))
    if len(sel) < 2:
        raise InsufficientDecayError("too few samples inside the fit range")
    t = sel / sample_rate
    slope, _ = np.polyfit(t, edc[sel], 1)
    if not slope < 0:
        raise InsufficientDecayError("non-decaying fit")
    return -60.0 / slope


@dataclass
class T60Report:
    bands: np.ndarray
    target_t60: np.ndarray
    model_t60: np.ndarray
    errors: np.ndarray
    excluded: list = field(default_factory=list)

    @property
    def mean_error(self):
        valid = np.isfinite(self.errors)
        return float(np.mean(self.errors[valid])) if np.any(valid) else float("nan")

    @property
    def max_error(self):
        valid = np.isfinite(self.errors)
        return float(np.max(self.errors[valid])) if np.any(valid) else float("nan")

    def lines(self):
        out = [f"{'band_hz':>9} {'target_s':>9} {'model_s':>9} {'error_%':>8}"]
        for b, t, m, e in zip(self.bands, self.target_t60, self.model_t60, self.errors):
            out.append(f"{b:9.1f} {t:9.3f} {m:9.3f} {e:8.2f}")
        if self.excluded:
            out.append("excluded bands: " + ", ".join(f"{b:g} Hz ({why})" for b, why in self.excluded))
        out.append(f"mean T60 error: {self.mean_error:.2f} %")
        out.append(f"max T60 error: {self.max_error:.2f} %")
        return out


def band_t60(ir, sample_rate, bands):
    out = []
    for b in bands:
        try:
            out.append(estimate_t60(schroeder_edc(ir, sample_rate, b), sample_rate))
        except (InsufficientDecayError, AnalysisError):
            out.append(np.nan)
    return np.array(out)


def t60_error(model_ir, target_ir, sample_rate, bands=None):
    """
    Relative octave-band T60 error of a model IR against a target IR, in percent.

    Bands where either T60 cannot be estimated are excluded and listed in
    ``T60Report.excluded``.
    """
    bands = octave_bands(20.0, 16000.0) if bands is None else np.asarray(bands, dtype=float)
    target = band_t60(target_ir, sample_rate, bands)
    model = band_t60(model_ir, sample_rate, bands)
    errors = 100.0 * np.abs(model - target) / target
    excluded = []
    for b, t, m in zip(bands, target, model):
        if not np.isfinite(t):
            excluded.append((b, "target decay < 25 dB"))
        elif not np.isfinite(m):
            excluded.append((b, "model decay < 25 dB"))
    return T60Report(bands, target, model, errors, excluded)


def spectrogram(x, config=None, sample_rate=None):
    """
    STFT magnitude in dB, ``(frames, bins)``, floored at -120 dB.

    Magnitudes are scaled by ``2 / sum(window)`` so a full-scale sinusoid
    centred on a bin reads 0 dB. Returns ``(db, frame_times_s, freqs_hz)``
    when ``sample_rate`` is given, else only ``db``.
    """
    config = config or StftConfig(2048, 256, 128)
    mags = stft_magnitudes(x, config) * (2.0 / np.sum(config.window()))
    with np.errstate(divide="ignore"):
        db = np.maximum(20.0 * np.log10(mags), DB_FLOOR)
    if sample_rate is None:
        return db
    times = config.frame_centers(len(x)) / sample_rate
    return db, times, config.bin_frequencies(sample_rate)


def write_spectrogram_csv(path, db, times, freqs):
    """First row: bin frequencies in Hz; first column: frame times in s; cells: dB."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s\\freq_hz"] + [f"{f:.6g}" for f in freqs])
        for t, row in zip(times, db):
            writer.writerow([f"{t:.6g}"] + [f"{v:.4f}" for v in row])


def write_spectrogram_pgm(path, db, floor=DB_FLOOR):
    """8-bit grayscale image, time along x and frequency upwards, 0 dB white."""
    img = np.clip((np.asarray(db).T[::-1] - floor) / -floor, 0.0, 1.0)
    pixels = np.round(img * 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def welch_psd(x, sample_rate, nperseg=2048):
    """One-sided Welch PSD converted to per-sample power (sums to the signal variance per bin spacing)."""
    freqs, pxx = sps.welch(x, fs=sample_rate, window="hann", nperseg=nperseg, noverlap=nperseg // 2,
                           detrend=False, scaling="density")
    # undo the one-sided factor of two and the 1/fs density scaling
    power = pxx * sample_rate / 2.0
    power[0] *= 2.0
    if nperseg % 2 == 0:
        power[-1] *= 2.0
    return freqs, power


def frame_energies(x, frame_length):
    """Energy of consecutive non-overlapping frames."""
    x = np.asarray(x, dtype=float)
    n = len(x) // frame_length
    return np.sum(x[:n * frame_length].reshape(n, frame_length) ** 2, axis=1)
