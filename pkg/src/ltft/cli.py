"""``ltft`` command line: stretch, analyze, verify and filter.

Exit codes: 0 success, 2 usage error, 3 input/output error, 4 numerical
error, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import _kernels
from .frame import LTFTConfig
from .frame_operator import DEFAULT_QUADRATURE, cache_dir, cached_frame_filter, save_frame_filter
from .sampling import build_envelope, sample
from .signal import DiscreteSignal
from .vocoder import ANALYSIS, SYNTHESIS, VocoderJob, run_vocoder
from .verification import concentration_check, error_scaling_experiment
from .wavio import DEPTHS, WavFormatError, read_wav, write_wav

log = logging.getLogger("ltft")

EXIT_USAGE, EXIT_IO, EXIT_NUMERIC, EXIT_OTHER = 2, 3, 4, 1


class UsageError(Exception):
    pass


def _add_config_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("transform")
    g.add_argument("--tau1", type=float, default=5.0, help="fewest oscillations per atom")
    g.add_argument("--tau2", type=float, default=13.0, help="most oscillations per atom")
    g.add_argument("--a", type=float, default=0.02,
                   help="lower transition frequency, as a fraction of the sample rate")
    g.add_argument("--b", type=float, default=0.4,
                   help="upper transition frequency, as a fraction of the sample rate")
    g.add_argument("--absolute-hz", action="store_true", help="read --a and --b as Hz")
    g.add_argument("--W", type=float, default=1.0, help="sampling box bandwidth, in units of the Nyquist band")
    g.add_argument("--config", type=Path, help="JSON file whose keys mirror the long flags")


def _add_sampling_flags(p: argparse.ArgumentParser):
    p.add_argument("--oversample", "-Z", type=float, default=16.0, help="samples per unit box measure")
    p.add_argument("--seed", type=int, default=0, help="random seed")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="ltft", description="Stochastic LTFT phase vocoder tools.",
                                     formatter_class=fmt)
    parser.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stretch", help="integer time stretch of a WAV file", formatter_class=fmt)
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--factor", type=int, default=2, help="integer dilation factor")
    _add_sampling_flags(p)
    p.add_argument("--pipeline", choices=(ANALYSIS, SYNTHESIS), default=ANALYSIS,
                   help="where the inverse frame operator is applied")
    p.add_argument("--keep-margin", action="store_true", help="keep the atom margin on both sides")
    p.add_argument("--peak-normalize", action="store_true", help="scale the output peak to 1")
    p.add_argument("--downmix", action="store_true", help="average stereo channels before processing")
    p.add_argument("--depth", choices=DEPTHS, default=None, help="output depth; None keeps the input depth")
    _add_config_flags(p)

    p = sub.add_parser("analyze", help="dump sampled coefficients", formatter_class=fmt)
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path, help="CSV or JSON file, chosen by extension unless --format")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--channel", type=int, default=0)
    _add_sampling_flags(p)
    _add_config_flags(p)

    p = sub.add_parser("verify", help="Monte Carlo error experiments", formatter_class=fmt)
    p.add_argument("--scaling", action="store_true", help="error versus oversampling factor")
    p.add_argument("--concentration", action="store_true", help="exceedance of the Markov bound")
    p.add_argument("--input", type=Path, help="WAV file; default is a synthetic multi-tone")
    p.add_argument("--rate", type=float, default=16000.0, help="rate of the synthetic signal")
    p.add_argument("--duration", type=float, default=1.0, help="seconds of synthetic signal")
    p.add_argument("--Z", type=str, default="1,4,16,64", help="comma separated oversampling factors")
    p.add_argument("--seeds", type=int, default=20, help="runs per oversampling factor")
    p.add_argument("--seed", type=int, default=0, help="experiment seed")
    p.add_argument("--delta", type=float, default=0.25, help="failure probability for --concentration")
    p.add_argument("--trials", type=int, default=200, help="trials for --concentration")
    p.add_argument("--pipeline", choices=(ANALYSIS, SYNTHESIS), default=ANALYSIS)
    p.add_argument("--output", type=Path, help="CSV report (default stdout)")
    p.add_argument("--json", type=Path, help="also write the full report as JSON")
    _add_config_flags(p)

    p = sub.add_parser("filter", help="precompute and cache the frame filter", formatter_class=fmt)
    p.add_argument("--rate", type=float, default=16000.0)
    p.add_argument("--quadrature", type=str, default=",".join(map(str, DEFAULT_QUADRATURE)),
                   help="frequency and oscillation node counts")
    p.add_argument("--output", type=Path, help="write here instead of the cache directory")
    _add_config_flags(p)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None) is None:
        return args
    try:
        doc = json.loads(args.config.read_text(encoding="utf-8"))
    except OSError as exc:
        raise OSError(f"{args.config}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.config}: invalid JSON ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise UsageError(f"{args.config}: expected a JSON object")
    known = vars(args)
    bad = [k for k in doc if k.replace("-", "_") not in known or k in ("command", "config")]
    if bad:
        raise UsageError(f"{args.config}: unknown keys {', '.join(sorted(bad))}")
    # explicit flags override the file: reparse with the file as defaults
    sub = parser._subparsers._group_actions[0].choices[args.command]
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in doc.items()})
    return parser.parse_args(argv)


def _config(args, rate: float) -> LTFTConfig:
    if args.absolute_hz:
        a, b = args.a, args.b
    else:
        a, b = args.a * rate, args.b * rate
    if not 0 < a <= b:
        raise UsageError("need 0 < a <= b")
    if b > rate / 2:
        raise UsageError(f"upper transition frequency {b:g} Hz above Nyquist {rate / 2:g} Hz")
    if not 0 < args.tau1 <= args.tau2:
        raise UsageError("need 0 < tau1 <= tau2")
    if args.W < 1:
        raise UsageError("--W must be at least 1")
    return LTFTConfig(tau1=args.tau1, tau2=args.tau2, a=a, b=b)


def _check_sampling(args):
    if not args.oversample > 0:
        raise UsageError("--oversample must be positive")
    if args.seed < 0:
        raise UsageError("--seed must be non-negative")


def cmd_stretch(args) -> int:
    if args.factor < 1:
        raise UsageError("--factor must be an integer >= 1")
    _check_sampling(args)
    channels, depth = read_wav(args.input)
    if args.downmix and len(channels) > 1:
        mean = sum(c.samples for c in channels) / len(channels)
        channels = [channels[0].with_samples(mean)]
    rate = channels[0].sample_rate
    cfg = _config(args, rate)
    filt = cached_frame_filter(cfg, rate)
    out = []
    for i, ch in enumerate(channels):
        log.info("channel %d: %d samples", i, len(ch))
        job = VocoderJob(ch, args.factor, cfg, args.oversample, args.seed, args.pipeline, args.W,
                         keep_margin=args.keep_margin, frame_filter=filt)
        res = run_vocoder(job)
        log.info("channel %d: %d phase points, %d atom samples", i, res.n_samples, res.atom_samples)
        out.append(res.signal)
    if args.peak_normalize:
        peak = max(float(np.max(np.abs(c.samples))) for c in out)
        if peak > 0:
            out = [c.with_samples(c.samples / peak) for c in out]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        clipped = write_wav(out, args.output, args.depth or depth)
    if clipped:
        log.warning("%d samples clipped", clipped)
    return 0


def cmd_analyze(args) -> int:
    _check_sampling(args)
    channels, _ = read_wav(args.input)
    if not 0 <= args.channel < len(channels):
        raise UsageError(f"--channel {args.channel} out of range for {len(channels)} channels")
    s = channels[args.channel]
    cfg = _config(args, s.sample_rate)
    env = build_envelope(len(s), s.sample_rate, cfg, args.W, center=s.t0 + (len(s) - 1) / (2 * s.sample_rate))
    K = int(math.ceil(args.oversample * env.measure))
    pts = sample(env, K, args.seed)
    vals, _ = _kernels.analyze_batch(s, pts, cfg)
    fmt = args.format or ("json" if args.output.suffix.lower() == ".json" else "csv")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "omega", "tau", "re", "im"])
        for row in zip(pts.x, pts.omega, pts.tau, vals.real, vals.imag):
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
    else:
        text = json.dumps({"config_hash": cfg.hash(), "envelope": env.as_dict(), "seed": args.seed,
                           "columns": ["x", "omega", "tau", "re", "im"],
                           "rows": [[float(v) for v in row]
                                    for row in zip(pts.x, pts.omega, pts.tau, vals.real, vals.imag)]})
    _atomic_text(args.output, text)
    log.info("%d coefficients written to %s", K, args.output)
    return 0


def _multitone(rate: float, duration: float) -> DiscreteSignal:
    t = np.arange(int(round(rate * duration))) / rate
    x = (np.sin(2 * np.pi * 220 * t) + 0.6 * np.sin(2 * np.pi * 660 * t + 0.4)
         + 0.4 * np.sin(2 * np.pi * 1500 * t + 1.1) + 0.25 * np.sin(2 * np.pi * 3100 * t + 2.0))
    return DiscreteSignal(x / 2.25, rate)


def cmd_verify(args) -> int:
    if not (args.scaling or args.concentration):
        raise UsageError("choose --scaling and/or --concentration")
    if args.seeds < 1:
        raise UsageError("--seeds must be positive")
    try:
        Zs = [float(z) for z in args.Z.split(",") if z.strip()]
    except ValueError:
        raise UsageError(f"--Z must be a comma separated list of numbers, got {args.Z!r}") from None
    if args.input is not None:
        s = read_wav(args.input)[0][0]
    else:
        s = _multitone(args.rate, args.duration)
    cfg = _config(args, s.sample_rate)
    lines = []
    reports = []
    if args.scaling:
        if len(Zs) < 2 or sorted(Zs) != Zs or any(z <= 0 for z in Zs):
            raise UsageError("--Z needs at least two positive ascending values")
        log.info("error scaling: Z=%s, %d seeds", Zs, args.seeds)
        rep = error_scaling_experiment(s, cfg, Zs, args.seeds, args.seed, args.pipeline, W=args.W)
        reports.append(rep)
        sm = rep.summary
        lines.append(f"# slope {sm['slope']:.4f} target -0.5 {'pass' if sm['pass'] else 'fail'}")
    if args.concentration:
        env = build_envelope(len(s), s.sample_rate, cfg, args.W)
        K = int(math.ceil(Zs[0] * env.measure))
        log.info("concentration: K=%d, %d trials", K, args.trials)
        rep = concentration_check(s, cfg, K, args.delta, args.trials, args.seed, args.W)
        reports.append(rep)
        sm = rep.summary
        lines.append(f"# exceedance {sm['exceedance']:.4f} allowed {sm['allowed']:.4f} "
                     f"{'pass' if sm['pass'] else 'fail'}")
    text = "".join(r.to_csv() for r in reports) + "\n".join(lines) + "\n"
    if args.output is not None:
        _atomic_text(args.output, text)
    else:
        sys.stdout.write(text)
    if args.json is not None:
        _atomic_text(args.json, json.dumps([r.to_dict() for r in reports], indent=2))
    return 0


def cmd_filter(args) -> int:
    try:
        quad = tuple(int(q) for q in args.quadrature.split(","))
    except ValueError:
        raise UsageError("--quadrature must be two integers, e.g. 512,9") from None
    if len(quad) != 2 or min(quad) < 2:
        raise UsageError("--quadrature must be two integers >= 2")
    if not args.rate > 0:
        raise UsageError("--rate must be positive")
    cfg = _config(args, args.rate)
    filt = cached_frame_filter(cfg, args.rate, args.W, quad, use_cache=args.output is None)
    if args.output is not None:
        save_frame_filter(filt, args.output, {"rate": args.rate, "W": args.W, "a": cfg.a, "b": cfg.b,
                                              "tau1": cfg.tau1, "tau2": cfg.tau2})
        where = args.output
    else:
        where = cache_dir()
    print(f"A={filt.A:.6f} B={filt.B:.6f} B/A={filt.B / filt.A:.6f} points={filt.grid.size} -> {where}")
    return 0


def _atomic_text(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


COMMANDS = {"stretch": cmd_stretch, "analyze": cmd_analyze, "verify": cmd_verify, "filter": cmd_filter}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ltft: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ltft: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="ltft: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ltft: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WavFormatError, OSError) as exc:
        name = getattr(exc, "filename", None)
        msg = f"{name}: {exc.strerror}" if name and getattr(exc, "strerror", None) else str(exc)
        print(f"ltft: io error: {msg}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, FloatingPointError, ArithmeticError) as exc:
        print(f"ltft: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # noqa: BLE001
        print(f"ltft: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OTHER


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
