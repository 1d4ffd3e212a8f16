"""
Command-line interface.

    dvnreverb analyze target.wav -o model.json
    dvnreverb synthesize model.json -o ir.wav
    dvnreverb modify model.json -o out.json --alpha 0.5
    dvnreverb report target.wav model_ir.wav
    dvnreverb convolve ir.wav dry.wav -o wet.wav

Exit codes: 0 success, 1 usage, 2 I/O, 3 numerical or fit failure.
"""

import argparse
import logging
import sys

import numpy as np

from . import modify as mod
from .analysis import AnalysisConfig, analyze
from .dsp import StftConfig, fft_convolve
from .errors import DvnError, ModelFileError, WavError
from .io import AudioFile, load_model, read_wav, save_model, write_wav
from .metrics import OCTAVE_CENTERS, spectrogram, t60_error, write_spectrogram_csv, write_spectrogram_pgm
from .model import DEFAULT_SEED
from .synthesis import SynthesisConfig, synthesize

log = logging.getLogger("dvnreverb")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pair(text, cast=float):
    try:
        a, b = text.split(":")
        return cast(a), cast(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:END, got {text!r}")


def build_parser():
    parser = _Parser(prog="dvnreverb", description="Extended dark-velvet-noise reverberation modeling")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="fit a model to a target impulse response")
    p.add_argument("target")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--late-start-ms", type=float, default=110.0)
    p.add_argument("--window-ms", type=float, default=85.0)
    p.add_argument("--fft", type=int, default=2048)
    p.add_argument("--dict", type=int, default=10, dest="num_filters")
    p.add_argument("--lp-order", type=int, default=10)
    p.add_argument("--dc-blockers", type=int, default=1, choices=(0, 1, 2))
    p.add_argument("--density", type=_pair, default=(2000.0, 500.0), help="START:END pulses/s")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("synthesize", help="render a model to a WAV impulse response")
    p.add_argument("model")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=None, help=f"default: the model's seed ({DEFAULT_SEED} unless set)")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--assign", choices=("greedy", "naive", "fvn-filter-interp"), default="greedy")
    p.add_argument("--include-early", action="store_true")
    p.add_argument("--encoding", choices=("float32", "pcm24", "pcm16"), default="float32")

    p = sub.add_parser("modify", help="apply parametric modifications to a model")
    p.add_argument("model")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--gate-ms", type=float)
    p.add_argument("--stretch", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--reverse-spectral", action="store_true")
    p.add_argument("--reverse-decay", action="store_true")

    p = sub.add_parser("report", help="compare octave-band T60 of a model IR against a target")
    p.add_argument("target")
    p.add_argument("model_ir")
    p.add_argument("--bands", type=_pair, default=(20.0, 16000.0), help="LOW:HIGH Hz")
    p.add_argument("--spectrogram", help="CSV export of the model IR spectrogram (.pgm also written if given as .pgm)")

    p = sub.add_parser("convolve", help="convolve a dry signal with an impulse response")
    p.add_argument("ir")
    p.add_argument("dry")
    p.add_argument("-o", "--output", required=True)
    return parser


def _mono(audio, path):
    if audio.channels != 1:
        raise UsageError(f"{path}: {audio.channels} channels; a mono impulse response is required")
    return audio.samples


def cmd_analyze(args):
    audio = read_wav(args.target)
    ir = _mono(audio, args.target)
    config = AnalysisConfig(
        late_start_ms=args.late_start_ms, window_ms=args.window_ms, fft_length=args.fft,
        num_filters=args.num_filters, lp_order=args.lp_order, num_dc_blockers=args.dc_blockers,
        density=args.density, seed=args.seed,
    )
    model = analyze(ir, audio.sample_rate, config)
    save_model(args.output, model)
    log.info("model with %d filters over %d frames written to %s", model.num_filters, model.num_frames, args.output)


def cmd_synthesize(args):
    model = load_model(args.model)
    config = SynthesisConfig(seed=args.seed, kappa=args.kappa, assignment=args.assign.replace("-", "_"),
                             include_early=args.include_early)
    ir = synthesize(model, config)
    write_wav(args.output, AudioFile(ir.samples, int(model.sample_rate)), args.encoding)


def cmd_modify(args):
    model = load_model(args.model)
    if args.alpha is not None:
        model = mod.scale_spectral_evolution(model, args.alpha)
    if args.stretch is not None:
        model = mod.stretch(model, args.stretch)
    if args.gate_ms is not None:
        model = mod.gate(model, int(round(args.gate_ms * 1e-3 * model.sample_rate)))
    if args.reverse_spectral:
        model = mod.reverse_spectral(model)
    if args.reverse_decay:
        model = mod.reverse_decay(model)
    save_model(args.output, model)


def cmd_report(args):
    target = read_wav(args.target)
    model = read_wav(args.model_ir)
    if target.sample_rate != model.sample_rate:
        raise UsageError("target and model IR sample rates differ")
    low, high = args.bands
    bands = OCTAVE_CENTERS[(OCTAVE_CENTERS >= low) & (OCTAVE_CENTERS <= high)]
    report = t60_error(_mono(model, args.model_ir), _mono(target, args.target), target.sample_rate, bands)
    for line in report.lines():
        print(line)
    if args.spectrogram:
        config = StftConfig(2048, 256, 128)
        db, times, freqs = spectrogram(model.samples, config, model.sample_rate)
        if args.spectrogram.endswith(".pgm"):
            write_spectrogram_pgm(args.spectrogram, db)
        else:
            write_spectrogram_csv(args.spectrogram, db, times, freqs)


def cmd_convolve(args):
    ir_audio = read_wav(args.ir)
    dry = read_wav(args.dry)
    if ir_audio.sample_rate != dry.sample_rate:
        raise UsageError("impulse response and dry signal sample rates differ")
    ir = _mono(ir_audio, args.ir)
    x = dry.samples
    if x.ndim == 1:
        wet = fft_convolve(x, ir)
    else:
        wet = np.stack([fft_convolve(x[:, c], ir) for c in range(x.shape[1])], axis=1)
    write_wav(args.output, AudioFile(wet, dry.sample_rate), "float32")


COMMANDS = {
    "analyze": cmd_analyze,
    "synthesize": cmd_synthesize,
    "modify": cmd_modify,
    "report": cmd_report,
    "convolve": cmd_convolve,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"dvnreverb: {err}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as err:
        print(f"dvnreverb: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (WavError, ModelFileError, OSError) as err:
        print(f"dvnreverb: {err}", file=sys.stderr)
        return EXIT_IO
    except (DvnError, ValueError, ArithmeticError) as err:
        print(f"dvnreverb: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
