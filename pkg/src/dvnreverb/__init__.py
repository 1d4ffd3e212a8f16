"""
Extended dark-velvet-noise late reverberation.

Fit a sparse velvet-noise model to a measured room impulse response, render
it back with arbitrary (also non-exponential) energy decay, and modify it
parametrically.
"""

from .analysis import AnalysisConfig, analyze
from .dsp import AllpoleFilter, DcBlocker, StftConfig
from .model import DictionaryFilter, DvnModel, ImpulseResponse
from .modify import gate, reverse_decay, reverse_spectral, scale_spectral_evolution, stretch
from .nnls import NnlsSolution, solve_nnls, solve_nnls_batch
from .sequence import DensityProfile, PulseTrain, generate_pulse_train, greedy_assign, naive_assign
from .synthesis import SynthesisConfig, predict_psd, synthesize

__version__ = "0.1.0"
