"""Stochastic LTFT integer time-stretching phase vocoder.

Random phase points ``(x_k, w_k, tau_k)`` with ``w_k >= 0`` are drawn from the
sampling box of the input. Each analysis coefficient has its phase multiplied
by ``delta`` and is resynthesized with the atom at ``(delta x_k, w_k, tau_k)``.
Negative frequencies are restored at the end by ``2 Re``. The analysis
formulation applies ``S_f^{-1}`` once to the synthesized output; the synthesis
formulation applies it to the input before analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .frame import LTFTConfig, PhasePoints
from .frame_operator import FrameFilter, apply_inverse_frame_operator, cached_frame_filter, DEFAULT_QUADRATURE
from .sampling import Envelope, build_envelope, sample
from .signal import DiscreteSignal, TimeGrid
from .stochastic import vocoder_nonlinearity

__all__ = [
    "ANALYSIS",
    "SYNTHESIS",
    "SKIP_THRESHOLD",
    "VocoderJob",
    "VocoderResult",
    "run_vocoder",
    "stretch",
    "realify",
    "output_margin",
    "expected_op_count",
]

ANALYSIS, SYNTHESIS = "analysis", "synthesis"
SKIP_THRESHOLD = 1e-14


@dataclass(frozen=True)
class VocoderJob:
    input: DiscreteSignal
    delta: int = 1
    cfg: LTFTConfig | None = None
    oversample: float = 16.0
    seed: int = 0
    pipeline_mode: str = ANALYSIS
    W: float = 1.0
    keep_margin: bool = False
    peak_normalize: bool = False
    frame_filter: FrameFilter | None = field(default=None, compare=False)
    quadrature: tuple[int, int] = DEFAULT_QUADRATURE
    floor: float = 1e-6

    def config(self) -> LTFTConfig:
        return self.cfg if self.cfg is not None else LTFTConfig.from_rate(self.input.sample_rate)


@dataclass(frozen=True, eq=False)
class VocoderResult:
    signal: DiscreteSignal
    untrimmed: DiscreteSignal
    envelope: Envelope
    points: PhasePoints
    n_samples: int
    atom_samples: int
    margin: int


def output_margin(cfg: LTFTConfig, rate: float) -> int:
    """Samples added on each side of the output: half the longest atom."""
    return int(math.ceil(rate * cfg.tau2 / (2.0 * cfg.a)))


def realify(s: DiscreteSignal) -> DiscreteSignal:
    """``2 Re(s)``."""
    return DiscreteSignal(2.0 * np.real(s.samples), s.sample_rate, s.t0)


def _validate(job: VocoderJob):
    if len(job.input) == 0:
        raise ValueError("empty input")
    if not job.input.is_real:
        raise ValueError("vocoder input must be real-valued")
    if int(job.delta) != job.delta or job.delta < 1:
        raise ValueError("dilation must be an integer >= 1")
    if not job.oversample > 0:
        raise ValueError("oversampling factor must be positive")
    if job.pipeline_mode not in (ANALYSIS, SYNTHESIS):
        raise ValueError(f"unknown pipeline mode {job.pipeline_mode!r}")


def run_vocoder(job: VocoderJob) -> VocoderResult:
    """Run the full pipeline and keep the intermediate bookkeeping."""
    _validate(job)
    cfg = job.config()
    s = job.input
    rate, M = s.sample_rate, len(s)
    delta = int(job.delta)

    env = build_envelope(M, rate, cfg, job.W, center=s.t0 + (M - 1) / (2.0 * rate))
    K = int(math.ceil(job.oversample * env.measure))
    pts = sample(env, K, job.seed)
    filt = job.frame_filter or cached_frame_filter(cfg, rate, 1.0, job.quadrature)

    samples = np.asarray(s.samples, dtype=np.float64)
    if job.pipeline_mode == SYNTHESIS:
        pad = int(math.ceil(rate * cfg.max_support))
        src = apply_inverse_frame_operator(s.with_samples(samples).zero_pad(pad), filt, job.floor)
    else:
        src = s.with_samples(samples)
    coefs, n_in = _kernels.analyze_batch(src, pts, cfg)
    coefs = vocoder_nonlinearity(coefs, delta)

    m = output_margin(cfg, rate)
    grid = TimeGrid(delta * s.t0 - m / rate, rate, delta * M + 2 * m)
    scale = env.measure / K
    out, n_out = _kernels.synthesize_batch(coefs * scale, pts.with_x(delta * pts.x), cfg, grid,
                                           skip=SKIP_THRESHOLD * scale)
    out = DiscreteSignal(out, rate, grid.t0)
    if job.pipeline_mode == ANALYSIS:
        out = apply_inverse_frame_operator(out, filt, job.floor)
    full = realify(out)
    trimmed = full if job.keep_margin else full.crop(m, delta * M)
    if job.peak_normalize:
        peak = float(np.max(np.abs(trimmed.samples)))
        if peak > 0:
            trimmed = trimmed.with_samples(trimmed.samples / peak)
    return VocoderResult(trimmed, full, env, pts, K, n_in + n_out, m)


def stretch(job: VocoderJob) -> DiscreteSignal:
    """Time-stretch ``job.input`` by the integer factor ``job.delta``."""
    return run_vocoder(job).signal


def expected_op_count(tau0: float, Z: float, M: int, alpha: float, beta: float) -> float:
    """Expected atom-sample operations for ``K = Z M`` samples.

    ``2 tau0 Z M (1 + (1 - beta)/beta + ln(beta/alpha))``; the
    ``O(M log M)`` cost of the inverse frame filter is not included.
    """
    if not 0 < alpha < beta <= 1:
        raise ValueError("need 0 < alpha < beta <= 1")
    return 2.0 * tau0 * Z * M * (1.0 + (1.0 - beta) / beta + math.log(beta / alpha))
