import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import signal as sps

from dvnreverb.dsp import (
    DC_POLE_GRID,
    AllpoleFilter,
    DcBlocker,
    StftConfig,
    apply_allpole,
    apply_inverse,
    fft_convolve,
    fit_dc_blocker,
    levinson_durbin,
    lp_coefficients,
    stft_magnitudes,
)
from dvnreverb.errors import AnalysisError, ConditioningError, DegenerateFrameError, StabilityError

FS = 48000


def test_stft_of_impulse_is_window_value():
    x = np.zeros(1024)
    x[0] = 1.0
    cfg = StftConfig(2048, 256)
    mags = stft_magnitudes(x, cfg)
    assert np.allclose(mags[0], cfg.window()[0])


def test_stft_sinusoid_peaks_at_its_bin():
    cfg = StftConfig(2048, 2048, 1024)
    k = 100
    n = np.arange(8192)
    mags = stft_magnitudes(np.sin(2 * np.pi * k * n / 2048), cfg)
    full = cfg.n_frames(len(n)) - (1 if (len(n) - 2048) % 1024 else 0)
    assert np.all(np.argmax(mags[:full], axis=1) == k)


def test_stft_zero_signal_and_short_signal():
    cfg = StftConfig(2048, 256)
    assert not np.any(stft_magnitudes(np.zeros(1000), cfg))
    with pytest.raises(AnalysisError):
        stft_magnitudes(np.zeros(100), cfg)


def test_frame_count_keeps_partial_frame():
    cfg = StftConfig(2048, 256, 128)
    assert cfg.n_frames(256) == 1
    assert cfg.n_frames(256 + 128) == 2
    assert cfg.n_frames(256 + 129) == 3
    assert stft_magnitudes(np.ones(256 + 129), cfg).shape == (3, 1025)


def test_from_ms_enlarges_fft_when_window_needs_it():
    cfg = StftConfig.from_ms(85, FS, 2048)
    assert cfg.window_length == 4080 and cfg.fft_length == 4096 and cfg.hop == 2040
    short = StftConfig.from_ms(5.3, FS, 2048)
    assert short.fft_length == 2048 and short.window_length == 254


def test_hann_cola_at_half_overlap():
    cfg = StftConfig(1024, 512)
    w = cfg.window()
    total = np.zeros(512 * 10)
    for start in range(0, len(total) - 512 + 1, 256):
        total[start:start + 512] += w
    interior = total[512:-512]
    assert np.max(np.abs(interior - interior[0])) < 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_parseval_per_frame(seed):
    cfg = StftConfig(512, 300, 150)
    x = np.random.default_rng(seed).standard_normal(900)
    spec = np.fft.rfft(x[:300] * cfg.window(), n=512)
    full = np.r_[spec, np.conj(spec[-2:0:-1])]
    energy = np.sum((x[:300] * cfg.window()) ** 2)
    assert np.isclose(energy, np.mean(np.abs(full) ** 2), rtol=1e-6)


def test_allpole_stability_check():
    with pytest.raises(StabilityError):
        AllpoleFilter(1.0, [-2.0, 1.0])
    AllpoleFilter(1.0, [-1.8, 0.81 * 0.99])


def test_identity_and_geometric_filters():
    x = np.random.default_rng(0).standard_normal(64)
    assert np.array_equal(apply_allpole(AllpoleFilter(1.0, []), x), x)
    imp = np.zeros(20)
    imp[0] = 1
    assert np.allclose(apply_allpole(AllpoleFilter(1.0, [-0.5]), imp), 0.5 ** np.arange(20))


def test_inverse_then_forward_is_identity():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(5000)
    filt = AllpoleFilter(0.7, [-1.2, 0.5, 0.1])
    y = apply_allpole(filt, apply_inverse(filt, x))
    assert np.max(np.abs(y - x)) < 1e-10 * np.max(np.abs(x))


def test_lp_recovers_ar1():
    rng = np.random.default_rng(2)
    x = sps.lfilter([1], [1, -0.9], rng.standard_normal(200000))
    assert abs(lp_coefficients(x, 1).a[0] + 0.9) < 0.02


def test_lp_on_white_noise_is_flat():
    x = np.random.default_rng(3).standard_normal(100000)
    assert np.all(np.abs(lp_coefficients(x, 2).a) < 0.05)


def test_lp_recovers_ar2():
    p = 0.8 * np.exp(1j * np.pi / 4)
    a_true = np.real(np.poly([p, np.conj(p)]))
    x = sps.lfilter([1], a_true, np.random.default_rng(4).standard_normal(200000))
    a = lp_coefficients(x, 2).a
    assert abs(a[0] - (-1.131)) < 0.02 and abs(a[1] - 0.64) < 0.02


def test_spectral_lp_matches_frame_energy():
    x = sps.lfilter([1], [1, -0.7], np.random.default_rng(5).standard_normal(2048))
    mag = np.abs(np.fft.rfft(x, 4096))
    filt = lp_coefficients(mag, 8, spectrum=True, fft_length=4096)
    model = filt.magnitude(4096)
    # autocorrelation matching: r(0) of the model equals the frame's
    full = lambda m: np.r_[m, m[-2:0:-1]]
    assert np.isclose(np.mean(full(model) ** 2), np.mean(full(mag) ** 2), rtol=1e-3)


def test_lp_errors():
    with pytest.raises(DegenerateFrameError):
        lp_coefficients(np.zeros(64), 2)
    with pytest.raises(ValueError):
        lp_coefficients(np.ones(64), 0)
    with pytest.raises(ConditioningError):
        levinson_durbin(np.array([1.0, 1.0, 1.0]), 2)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), order=st.integers(1, 12), n=st.integers(16, 400))
def test_levinson_filters_are_stable(seed, order, n):
    x = np.random.default_rng(seed).standard_normal(n)
    filt = lp_coefficients(x, order)  # construction checks the poles
    assert np.all(np.abs(np.roots(filt.denominator)) < 1)


def test_dc_blocker_response():
    dc = DcBlocker(0.995)
    assert dc.magnitude([0.0], FS)[0] == 0
    assert np.isclose(dc.magnitude([FS / 2], FS)[0], 1.0)
    with pytest.raises(ValueError):
        DcBlocker(1.0)


def test_dc_fit_flat_falls_back():
    cfg = StftConfig(2048, 2048)
    dc = fit_dc_blocker(np.ones(cfg.n_bins), FS, 2048)
    assert dc.pole_radius == 0.995
    f = cfg.bin_frequencies(FS)
    above = f >= 100
    assert np.all(np.abs(20 * np.log10(dc.magnitude(f[above], FS))) < 1.0)


def test_dc_fit_recovers_its_own_response():
    f = np.fft.rfftfreq(2048, 1 / FS)
    spec = DcBlocker(0.98).magnitude(f, FS)
    R = fit_dc_blocker(spec, FS, 2048).pole_radius
    i = int(np.flatnonzero(DC_POLE_GRID == 0.98)[0])
    assert DC_POLE_GRID[i - 1] <= R <= DC_POLE_GRID[i + 1]


def test_dc_fit_clamps_to_grid_boundary():
    # a residual no candidate can follow: it climbs towards DC, so the
    # least-attenuating candidate is the end of the grid
    f = np.fft.rfftfreq(2048, 1 / FS)
    spec = np.where(f < 200, 10 ** ((200 - f) / 200), 1.0)
    assert fit_dc_blocker(spec, FS, 2048).pole_radius == 0.9999


def test_fft_convolve_examples():
    b = np.array([0.3, -1.0, 2.0])
    assert np.allclose(fft_convolve([1.0], b), b)
    assert np.allclose(fft_convolve([1.0, 1.0], [1.0, -1.0]), [1.0, 0.0, -1.0])
    with pytest.raises(ValueError):
        fft_convolve([], [1.0])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), na=st.integers(1, 64), nb=st.integers(1, 64))
def test_fft_convolve_matches_direct(seed, na, nb):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(na), rng.standard_normal(nb)
    direct = np.zeros(na + nb - 1)
    for i in range(na):
        direct[i:i + nb] += a[i] * b
    out = fft_convolve(a, b)
    assert len(out) == na + nb - 1
    assert np.max(np.abs(out - direct)) <= 1e-9 * max(np.max(np.abs(direct)), 1e-300)
    assert np.allclose(out, fft_convolve(b, a), atol=1e-12)
    c = rng.standard_normal(na)
    assert np.allclose(fft_convolve(2 * a + c, b), 2 * out + fft_convolve(c, b), atol=1e-9)
