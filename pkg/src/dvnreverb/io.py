"""
WAV codec (PCM16, PCM24, IEEE float32/float64) and model persistence.
"""

import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from .dsp import AllpoleFilter, DcBlocker, StftConfig
from .errors import (
    MalformedHeaderError,
    SchemaError,
    TruncatedDataError,
    UnsupportedCodecError,
    VersionError,
)
from .model import DictionaryFilter, DvnModel
from .sequence import DensityProfile

MODEL_VERSION = 1

_PCM = 1
_FLOAT = 3
_EXTENSIBLE = 0xFFFE
ENCODINGS = {"pcm16": (_PCM, 16), "pcm24": (_PCM, 24), "float32": (_FLOAT, 32), "float64": (_FLOAT, 64)}


@dataclass
class AudioFile:
    samples: np.ndarray
    sample_rate: int
    encoding: str = "float32"

    @property
    def channels(self):
        return 1 if self.samples.ndim == 1 else self.samples.shape[1]


def _chunks(data):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack("<4sI", data[pos:pos + 8])
        yield cid, pos + 8, size
        pos += 8 + size + (size & 1)


def read_wav(path):
    """
    Decode a RIFF/WAVE file to floats.

    Returns an :class:`AudioFile` with shape ``(n,)`` for mono and
    ``(n, channels)`` otherwise.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeaderError(f"{path}: not a RIFF/WAVE file")
    fmt = None
    payload = None
    for cid, start, size in _chunks(data):
        if cid == b"fmt ":
            if size < 16 or start + 16 > len(data):
                raise MalformedHeaderError(f"{path}: short fmt chunk")
            tag, channels, rate, _, block, bits = struct.unpack("<HHIIHH", data[start:start + 16])
            if tag == _EXTENSIBLE and size >= 40:
                tag = struct.unpack("<H", data[start + 24:start + 26])[0]
            fmt = (tag, channels, rate, block, bits)
        elif cid == b"data":
            if start + size > len(data):
                raise TruncatedDataError(f"{path}: data chunk declares {size} bytes, {len(data) - start} present")
            payload = data[start:start + size]
    if fmt is None:
        raise MalformedHeaderError(f"{path}: missing fmt chunk")
    if payload is None:
        raise MalformedHeaderError(f"{path}: missing data chunk")
    tag, channels, rate, block, bits = fmt
    encoding = {v: k for k, v in ENCODINGS.items()}.get((tag, bits))
    if encoding is None:
        raise UnsupportedCodecError(f"{path}: format tag {tag} with {bits} bits is not supported")
    if channels < 1 or block != channels * bits // 8:
        raise MalformedHeaderError(f"{path}: inconsistent block alignment")
    if len(payload) % block:
        raise TruncatedDataError(f"{path}: partial sample frame at end of data")

    if encoding == "pcm16":
        x = np.frombuffer(payload, dtype="<i2").astype(float) / 32768.0
    elif encoding == "pcm24":
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        x = ints.astype(float) / float(1 << 23)
    elif encoding == "float32":
        x = np.frombuffer(payload, dtype="<f4").astype(float)
    else:
        x = np.frombuffer(payload, dtype="<f8").astype(float)
    if channels > 1:
        x = x.reshape(-1, channels)
    return AudioFile(x, int(rate), encoding)


def write_wav(path, audio, encoding=None):
    """Encode an :class:`AudioFile`; PCM encodings clip to [-1, 1)."""
    encoding = encoding or audio.encoding
    if encoding not in ENCODINGS:
        raise UnsupportedCodecError(f"unknown encoding {encoding!r}")
    tag, bits = ENCODINGS[encoding]
    x = np.asarray(audio.samples, dtype=float)
    channels = 1 if x.ndim == 1 else x.shape[1]
    flat = x.reshape(-1)
    if encoding == "pcm16":
        payload = np.clip(np.round(flat * 32768.0), -32768, 32767).astype("<i2").tobytes()
    elif encoding == "pcm24":
        ints = np.clip(np.round(flat * (1 << 23)), -(1 << 23), (1 << 23) - 1).astype(np.int32)
        u = (ints & 0xFFFFFF).astype(np.uint32)
        payload = np.stack([u & 0xFF, (u >> 8) & 0xFF, (u >> 16) & 0xFF], axis=1).astype(np.uint8).tobytes()
    elif encoding == "float32":
        payload = flat.astype("<f4").tobytes()
    else:
        payload = flat.astype("<f8").tobytes()
    block = channels * bits // 8
    fmt = struct.pack("<HHIIHH", tag, channels, int(audio.sample_rate), int(audio.sample_rate) * block, block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    if tag == _FLOAT:
        # non-PCM formats carry a fact chunk with the frame count
        body += b"fact" + struct.pack("<II", 4, len(flat) // channels)
    body += b"data" + struct.pack("<I", len(payload)) + payload + (b"\x00" if len(payload) & 1 else b"")
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + body)


def model_to_dict(model, early_part_file=None):
    return {
        "version": MODEL_VERSION,
        "sample_rate": model.sample_rate,
        "late_start": model.late_start,
        "post_filter": {"b0": model.post_filter.b0, "a": model.post_filter.a.tolist()},
        "dc_blockers": [{"R": dc.pole_radius} for dc in model.dc_blockers],
        "dictionary": [
            {"b0": d.allpole.b0, "a1": float(d.allpole.a[0]), "a2": float(d.allpole.a[1]),
             "source_frame": d.source_frame}
            for d in model.dictionary
        ],
        "framing": {
            "fft_length": model.framing.fft_length,
            "window_length": model.framing.window_length,
            "hop": model.framing.hop,
            "frame_times": model.frame_times.tolist(),
        },
        "frame_gains": model.frame_gains.tolist(),
        "prob_matrix": model.prob_matrix.tolist(),
        "degenerate_frames": [int(i) for i in np.flatnonzero(model.degenerate_frames)],
        "density": {
            "start": model.density.start_density,
            "end": model.density.end_density,
            "duration": model.density.duration,
        },
        "seed": model.seed,
        "gate": model.gate,
        "decay_reversed": model.decay_reversed,
        "early_part_file": early_part_file,
    }


def _require(doc, key, where="model"):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{where}: missing field '{key}'", field=key)
    return doc[key]


def model_from_dict(doc, base_dir="."):
    version = _require(doc, "version")
    if version != MODEL_VERSION:
        raise VersionError(f"unsupported model version {version!r} (expected {MODEL_VERSION})")
    try:
        framing_doc = _require(doc, "framing")
        framing = StftConfig(int(_require(framing_doc, "fft_length", "framing")),
                             int(_require(framing_doc, "window_length", "framing")),
                             int(_require(framing_doc, "hop", "framing")))
        pf = _require(doc, "post_filter")
        post = AllpoleFilter(float(_require(pf, "b0", "post_filter")), np.array(_require(pf, "a", "post_filter"), dtype=float))
        dictionary = [
            DictionaryFilter.from_allpole(
                AllpoleFilter(float(_require(d, "b0", "dictionary")),
                              [float(_require(d, "a1", "dictionary")), float(_require(d, "a2", "dictionary"))]),
                int(_require(d, "source_frame", "dictionary")), framing.fft_length, normalize=False)
            for d in _require(doc, "dictionary")
        ]
        gains = np.array(_require(doc, "frame_gains"), dtype=float)
        P = np.array(_require(doc, "prob_matrix"), dtype=float).reshape(len(dictionary), -1)
        times = framing_doc.get("frame_times")
        times = np.array(times, dtype=float) if times is not None else \
            np.arange(len(gains)) * framing.hop + framing.window_length / 2
        dens = _require(doc, "density")
        sample_rate = float(_require(doc, "sample_rate"))
        duration = dens.get("duration")
        if duration is None:
            duration = int(round(times[-1] + framing.window_length / 2))
        density = DensityProfile(float(_require(dens, "start", "density")), float(_require(dens, "end", "density")),
                                 int(duration))
        degenerate = np.zeros(len(gains), dtype=bool)
        degenerate[np.array(doc.get("degenerate_frames", []), dtype=int)] = True
        early = None
        if doc.get("early_part_file"):
            early = read_wav(os.path.join(base_dir, doc["early_part_file"])).samples
        return DvnModel(
            sample_rate=sample_rate,
            late_start=int(_require(doc, "late_start")),
            post_filter=post,
            dc_blockers=[DcBlocker(float(_require(d, "R", "dc_blockers"))) for d in _require(doc, "dc_blockers")],
            dictionary=dictionary,
            prob_matrix=P,
            frame_gains=gains,
            framing=framing,
            frame_times=times,
            density=density,
            early_part=early,
            seed=int(doc.get("seed", 0)),
            gate=doc.get("gate"),
            decay_reversed=bool(doc.get("decay_reversed", False)),
            degenerate_frames=degenerate,
        )
    except SchemaError:
        raise
    except (TypeError, ValueError) as err:
        raise SchemaError(f"invalid model document: {err}") from err


def save_model(path, model):
    """
    Write a model as JSON. A non-empty early part goes to a float64 WAV next
    to it (``<stem>.early.wav``) so the round trip is exact.
    """
    early_name = None
    if model.early_part is not None and len(model.early_part):
        stem = os.path.splitext(os.path.basename(path))[0]
        early_name = stem + ".early.wav"
        write_wav(os.path.join(os.path.dirname(os.path.abspath(path)), early_name),
                  AudioFile(model.early_part, int(model.sample_rate)), "float64")
    with open(path, "w") as fh:
        json.dump(model_to_dict(model, early_name), fh, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise SchemaError(f"{path}: not valid JSON ({err})") from err
    return model_from_dict(doc, os.path.dirname(os.path.abspath(path)))
