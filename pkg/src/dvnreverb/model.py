"""Data containers for a fitted extended dark-velvet-noise model."""

from dataclasses import dataclass, field, replace

import numpy as np

from .dsp import AllpoleFilter, DcBlocker, StftConfig
from .sequence import DensityProfile

DEFAULT_SEED = 20230101


@dataclass(frozen=True, eq=False)
class DictionaryFilter:
    """Second-order allpole coloration filter with its magnitude on the analysis bin grid."""

    allpole: AllpoleFilter
    source_frame: int
    magnitude_response: np.ndarray

    @classmethod
    def from_allpole(cls, allpole, source_frame, fft_length, normalize=True, weight=None):
        """
        Wrap an allpole filter, optionally scaling it to unit energy.

        Energy is the mean of ``|F|^2`` over the bins, weighted by ``weight``
        when given (e.g. the squared post-filter magnitude, so that every
        filter has the same energy at the model output).
        """
        mag = allpole.magnitude(fft_length)
        if normalize:
            allpole = allpole.scaled(1.0 / np.sqrt(weighted_energy(mag, weight)))
            mag = allpole.magnitude(fft_length)
        return cls(allpole, int(source_frame), mag)

    def energy(self, weight=None):
        return weighted_energy(self.magnitude_response, weight)


def weighted_energy(mag, weight=None):
    if weight is None:
        return float(np.mean(mag ** 2))
    weight = np.asarray(weight, dtype=float)
    return float(np.sum(weight * mag ** 2) / np.sum(weight))


@dataclass
class ImpulseResponse:
    samples: np.ndarray
    sample_rate: float
    late_start: int = 0

    def __len__(self):
        return len(self.samples)

    @property
    def late(self):
        return self.samples[self.late_start:]


@dataclass
class DvnModel:
    """
    Everything needed to render a late-reverberation impulse response.

    ``prob_matrix`` is ``(N, L_F)`` with one probability column per analysis
    frame, ``frame_times`` are frame centres in samples after ``late_start``.
    ``gate`` (samples after ``late_start``) and ``decay_reversed`` record
    modifications applied after fitting.
    """

    sample_rate: float
    late_start: int
    post_filter: AllpoleFilter
    dc_blockers: list
    dictionary: list
    prob_matrix: np.ndarray
    frame_gains: np.ndarray
    framing: StftConfig
    frame_times: np.ndarray
    density: DensityProfile
    early_part: np.ndarray = None
    seed: int = DEFAULT_SEED
    gate: int = None
    decay_reversed: bool = False
    degenerate_frames: np.ndarray = None

    def __post_init__(self):
        self.prob_matrix = np.asarray(self.prob_matrix, dtype=float)
        self.frame_gains = np.asarray(self.frame_gains, dtype=float)
        self.frame_times = np.asarray(self.frame_times, dtype=float)
        if self.prob_matrix.shape != (len(self.dictionary), len(self.frame_gains)):
            raise ValueError(
                f"prob_matrix shape {self.prob_matrix.shape} does not match "
                f"{len(self.dictionary)} filters x {len(self.frame_gains)} frames")
        if len(self.frame_times) != len(self.frame_gains):
            raise ValueError("frame_times and frame_gains differ in length")
        if np.any(self.frame_gains < 0) or np.any(self.prob_matrix < 0):
            raise ValueError("gains and probabilities must be non-negative")
        if self.degenerate_frames is None:
            self.degenerate_frames = np.zeros(len(self.frame_gains), dtype=bool)

    @property
    def num_filters(self):
        return len(self.dictionary)

    @property
    def num_frames(self):
        return len(self.frame_gains)

    @property
    def duration(self):
        return self.density.duration

    def dictionary_magnitudes(self):
        """``(bins, N)`` design matrix of dictionary magnitude responses."""
        return np.stack([d.magnitude_response for d in self.dictionary], axis=1)

    def copy(self, **changes):
        fields = dict(
            prob_matrix=self.prob_matrix.copy(),
            frame_gains=self.frame_gains.copy(),
            frame_times=self.frame_times.copy(),
            dictionary=list(self.dictionary),
            dc_blockers=list(self.dc_blockers),
            degenerate_frames=self.degenerate_frames.copy(),
        )
        fields.update(changes)
        return replace(self, **fields)
