"""WAV input and output for the command line tools.

Only 16-bit PCM and 32-bit float files are handled, mono or stereo. PCM is
scaled to ``[-1, 1)`` by ``1/32768``.
"""

from __future__ import annotations

import os
import tempfile
import warnings
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .signal import DiscreteSignal

__all__ = ["WavFormatError", "read_wav", "write_wav", "DEPTHS"]

DEPTHS = ("pcm16", "float32")


class WavFormatError(ValueError):
    pass


def read_wav(path) -> tuple[list[DiscreteSignal], str]:
    """Channels of ``path`` as real signals, plus the sample depth name."""
    try:
        rate, data = wavfile.read(path)
    except ValueError as exc:
        raise WavFormatError(f"{path}: unsupported WAV format ({exc})") from None
    if data.dtype == np.int16:
        depth = "pcm16"
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        depth = "float32"
        x = data.astype(np.float64)
    else:
        raise WavFormatError(f"{path}: unsupported sample format {data.dtype}; need 16-bit PCM or 32-bit float")
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] > 2:
        raise WavFormatError(f"{path}: {x.shape[1]} channels; only mono and stereo are supported")
    if x.shape[0] == 0:
        raise WavFormatError(f"{path}: no samples")
    return [DiscreteSignal(x[:, c].copy(), float(rate)) for c in range(x.shape[1])], depth


def write_wav(channels, path, depth: str = "pcm16") -> int:
    """Write one signal or a list of equal-rate channels; returns the clip count.

    Samples outside ``[-1, 1]`` are hard clipped with a warning. The file
    is written next to ``path`` and renamed into place.
    """
    if isinstance(channels, DiscreteSignal):
        channels = [channels]
    if depth not in DEPTHS:
        raise WavFormatError(f"unsupported output depth {depth!r}; choose from {', '.join(DEPTHS)}")
    rates = {c.sample_rate for c in channels}
    if len(rates) != 1:
        raise ValueError("channels must share one sample rate")
    rate = rates.pop()
    if rate != int(rate):
        raise WavFormatError("WAV needs an integer sample rate")
    n = min(len(c) for c in channels)
    x = np.stack([np.real(c.samples[:n]) for c in channels], axis=1)
    clipped = int(np.count_nonzero(np.abs(x) > 1.0))
    if clipped:
        warnings.warn(f"{clipped} samples clipped to [-1, 1]", stacklevel=2)
    x = np.clip(x, -1.0, 1.0)
    if depth == "pcm16":
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    else:
        data = x.astype(np.float32)
    if data.shape[1] == 1:
        data = data[:, 0]
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    os.close(fd)
    try:
        wavfile.write(tmp, int(rate), data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return clipped
