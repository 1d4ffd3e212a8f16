"""
Synthetic impulse responses with known structure.

They stand in for measured rooms in the tests and demos: a noise tail colored
by a time-varying mixture of known second-order filters, a double-slope decay,
and a hall-like tail whose decay time falls with frequency.
"""

import numpy as np
from scipy import signal as sps


def mixture_filters(num_filters=10):
    """
    Denominators of ``num_filters`` stable second-order allpole filters.

    Pole radius grows and pole angle falls with the index, so the spectra
    move from a mild high-frequency peak towards a sharper mid-band one.
    """
    out = []
    for i in range(num_filters):
        r = 0.3 + 0.54 * i / max(num_filters - 1, 1)
        theta = np.pi * (0.6 - 0.495 * i / max(num_filters - 1, 1))
        out.append(np.real(np.poly([r * np.exp(1j * theta), r * np.exp(-1j * theta)])))
    return out


def mixture_target(seed=0, sample_rate=48000, duration=3.0, t60=2.0, num_filters=10):
    """
    White noise through a crossfaded sequence of known allpole filters with an
    exponential envelope.

    Returns ``(ir, denominators)``.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    filters = mixture_filters(num_filters)
    centers = np.linspace(0, duration, num_filters)
    spacing = centers[1] - centers[0] if num_filters > 1 else duration
    y = np.zeros(n)
    for c, a in zip(centers, filters):
        w = np.clip(1 - np.abs(t - c) / spacing, 0, None)
        y += w * sps.lfilter([1.0], a, rng.standard_normal(n))
    return y * 10 ** (-3 * t / t60), filters


def double_slope_target(seed=0, sample_rate=48000, duration=1.5, first_t60=0.4, knee=0.3,
                        second_t60=1.0, echo_db=-20.0, cutoff=6000.0):
    """
    Lowpass noise with a fast decay that switches at ``knee`` seconds to a
    slower decay restarting at ``echo_db``. Sample 0 is a unit direct sound.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    env = np.where(t < knee, 10 ** (-3 * t / first_t60),
                   10 ** (echo_db / 20) * 10 ** (-3 * (t - knee) / second_t60))
    b, a = sps.butter(2, cutoff, fs=sample_rate)
    y = sps.lfilter(b, a, rng.standard_normal(n)) * env
    y[0] = 1.0
    return y


def hall_target(seed=0, sample_rate=48000, duration=2.5, t60_low=2.7, t60_high=1.2, cutoff=5000.0):
    """
    Concert-hall-like tail: 17 bands of noise between 63 Hz and 16 kHz whose
    T60 falls log-linearly from ``t60_low`` at 125 Hz to ``t60_high`` at 8 kHz,
    followed by a first-order lowpass.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    centers = np.geomspace(63, 16000, 17)
    t60 = np.interp(np.log(centers), np.log([125, 8000]), [t60_low, t60_high])
    edges = np.r_[20, np.sqrt(centers[:-1] * centers[1:]), min(23000, 0.48 * sample_rate)]
    y = np.zeros(n)
    for i in range(len(centers)):
        sos = sps.butter(4, [edges[i], edges[i + 1]], btype="bandpass", fs=sample_rate, output="sos")
        y += sps.sosfilt(sos, rng.standard_normal(n)) * 10 ** (-3 * t / t60[i])
    b, a = sps.butter(1, cutoff, fs=sample_rate)
    return sps.lfilter(b, a, y)


def example_dictionary(num_filters=10, sample_rate=48000, fft_length=2048, radius=0.98,
                       low=500.0, high=18000.0):
    """
    Unit-energy second-order resonators with log-spaced centre frequencies,
    a stand-in for a hand-made coloration dictionary.
    """
    from .dsp import AllpoleFilter
    from .model import DictionaryFilter

    out = []
    for i, fc in enumerate(np.geomspace(low, high, num_filters)):
        theta = 2 * np.pi * fc / sample_rate
        a = np.real(np.poly([radius * np.exp(1j * theta), radius * np.exp(-1j * theta)]))[1:]
        out.append(DictionaryFilter.from_allpole(AllpoleFilter(1.0, a), i, fft_length))
    return out
