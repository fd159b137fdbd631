"""Localizing time-frequency transform with Monte Carlo phase-space sampling."""

from .signal import HANN, DiscreteSignal, TimeGrid, Window, dft, energy, idft, inner_product
from .frame import LTFTConfig, PhasePoint, PhasePoints, analyze, analyze_many, atom_freq, atom_time
from .sampling import Envelope, build_envelope, sample
from .frame_operator import (FrameFilter, apply_frame_operator, apply_inverse_frame_operator,
                             cached_frame_filter, compute_frame_filter, estimate_frame_bounds)
from .stochastic import CoefficientSamples, KernelOperator, mc_synthesis, vocoder_nonlinearity
from .vocoder import VocoderJob, VocoderResult, run_vocoder, stretch

__version__ = "0.1.0"

__all__ = [
    "HANN", "DiscreteSignal", "TimeGrid", "Window", "dft", "idft", "energy", "inner_product",
    "LTFTConfig", "PhasePoint", "PhasePoints", "analyze", "analyze_many", "atom_freq", "atom_time",
    "Envelope", "build_envelope", "sample",
    "FrameFilter", "apply_frame_operator", "apply_inverse_frame_operator", "cached_frame_filter",
    "compute_frame_filter", "estimate_frame_bounds",
    "CoefficientSamples", "KernelOperator", "mc_synthesis", "vocoder_nonlinearity",
    "VocoderJob", "VocoderResult", "run_vocoder", "stretch",
]
