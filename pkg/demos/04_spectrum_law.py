"""
What spectrum does the extended velvet noise have?
==================================================

Each pulse goes through exactly one filter, so over many pulses the output
power at a frequency is the probability-weighted mean of the filters'
squared magnitudes. The weighted mean of the magnitudes themselves is a
different, smaller quantity whenever the filters disagree. This script
renders one minute of stationary noise and measures both gaps.
"""

import numpy as np

from dvnreverb import AnalysisConfig, analyze
from dvnreverb.dsp import AllpoleFilter
from dvnreverb.metrics import welch_psd
from dvnreverb.model import DvnModel
from dvnreverb.sequence import DensityProfile
from dvnreverb.synthesis import SynthesisConfig, predict_power_spectrum, predict_psd, render_late
from dvnreverb.targets import hall_target

fs = 48000
fitted = analyze(hall_target(0), fs, AnalysisConfig(late_start_ms=0, output_normalized=False))
n = fitted.num_filters
p = np.full(n, 1 / n)

#%%
# The two predictions differ most where a few filters dominate.

f = fitted.framing.bin_frequencies(fs)
magnitude_avg = 20 * np.log10(predict_psd(fitted, p))
power_avg = 10 * np.log10(predict_power_spectrum(fitted, p))
for hz in (100, 1000, 5000, 10000, 20000):
    k = np.argmin(np.abs(f - hz))
    print(f"{hz:6d} Hz: magnitude average {magnitude_avg[k]:6.2f} dB, power average {power_avg[k]:6.2f} dB")

#%%
# One minute at constant density, uniform probabilities.

for density in (500, 2000):
    length = 60 * fs
    model = DvnModel(fs, 0, AllpoleFilter(1.0, []), [], fitted.dictionary, np.tile(p[:, None], (1, 2)),
                     np.ones(2), fitted.framing, np.array([0.0, float(length)]),
                     DensityProfile(density, density, length))
    x = render_late(model, SynthesisConfig(seed=1)).samples
    freqs, power = welch_psd(x, fs, fitted.framing.fft_length)
    sel = (freqs >= 100) & (freqs <= 20000)
    measured = 10 * np.log10(power[sel])
    print(f"{density} pulses/s: max gap to magnitude average {np.max(np.abs(measured - magnitude_avg[sel])):.2f} dB, "
          f"to power average {np.max(np.abs(measured - power_avg[sel])):.2f} dB")
