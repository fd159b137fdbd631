"""Discrete signals, windows, unitary DFT and L2 inner products.

Signals are uniformly sampled complex sequences with a sample rate ``R`` and
the time ``t0`` of the first sample. Continuous-domain quantities are
approximated by the rectangle rule at rate ``R``, so ``energy(s)`` is
``(1/R) * sum |s_n|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "TimeGrid",
    "DiscreteSignal",
    "Window",
    "hann",
    "hann_fourier",
    "HANN",
    "dft",
    "idft",
    "dft_frequencies",
    "fourier_samples",
    "inner_product",
    "energy",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid ``t0 + n / rate`` for ``n = 0 .. length - 1``."""

    t0: float
    rate: float
    length: int

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("sample rate must be positive")
        if self.length < 0:
            raise ValueError("grid length must be non-negative")

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.length) / self.rate

    @property
    def t_end(self) -> float:
        """Time of the last sample."""
        return self.t0 + (self.length - 1) / self.rate

    def padded(self, n_left: int, n_right: int | None = None) -> "TimeGrid":
        n_right = n_left if n_right is None else n_right
        return TimeGrid(self.t0 - n_left / self.rate, self.rate, self.length + n_left + n_right)


@dataclass(frozen=True, eq=False)
class DiscreteSignal:
    """Uniformly sampled complex time signal.

    ``flags`` carries non-fatal diagnostics such as ``"no overlap"`` for an
    atom that misses the grid entirely.
    """

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError("sample rate must be positive")
        arr = np.asarray(self.samples)
        if arr.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not np.iscomplexobj(arr):
            arr = arr.astype(np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.t0, self.sample_rate, len(self))

    def times(self) -> np.ndarray:
        return self.grid.times()

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.samples) or not np.any(self.samples.imag)

    def energy(self) -> float:
        return energy(self)

    def with_samples(self, samples, t0: float | None = None) -> "DiscreteSignal":
        return DiscreteSignal(samples, self.sample_rate, self.t0 if t0 is None else t0)

    def zero_pad(self, n_left: int, n_right: int | None = None) -> "DiscreteSignal":
        n_right = n_left if n_right is None else n_right
        out = np.pad(self.samples, (n_left, n_right))
        return DiscreteSignal(out, self.sample_rate, self.t0 - n_left / self.sample_rate)

    def crop(self, start: int, length: int) -> "DiscreteSignal":
        out = self.samples[start:start + length]
        return DiscreteSignal(out, self.sample_rate, self.t0 + start / self.sample_rate)

    @classmethod
    def zeros(cls, grid: TimeGrid, flags=()) -> "DiscreteSignal":
        return cls(np.zeros(grid.length, dtype=np.complex128), grid.rate, grid.t0, frozenset(flags))

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], grid: TimeGrid) -> "DiscreteSignal":
        return cls(np.asarray(fn(grid.times())), grid.rate, grid.t0)


def hann(t):
    """Hann window ``(1 + cos(2 pi t)) / 2`` on ``[-1/2, 1/2]``, zero outside."""
    t = np.asarray(t, dtype=np.float64)
    out = np.where(np.abs(t) <= 0.5, 0.5 * (1.0 + np.cos(2.0 * np.pi * t)), 0.0)
    return out if out.ndim else float(out)


def hann_fourier(z):
    """Closed-form Fourier transform of the Hann window.

    ``h^(z) = sinc(z)/2 + (sinc(z - 1) + sinc(z + 1))/4`` with the
    normalized sinc, so ``h^(0) = 1/2``.
    """
    z = np.asarray(z, dtype=np.float64)
    return 0.5 * np.sinc(z) + 0.25 * (np.sinc(z - 1.0) + np.sinc(z + 1.0))


class Window:
    """Non-negative window supported in ``[-1/2, 1/2]``.

    Parameters
    ----------
    fn : callable
        Vectorized evaluator ``t -> h(t)``; values outside the support are
        forced to zero.
    name : str
        Identifier used in config hashes.
    fourier : callable, optional
        Closed-form ``z -> h^(z)``. Without it the transform is
        tabulated from a dense zero-padded DFT of the window and
        interpolated.
    n_quad : int
        Number of midpoint nodes for the norm integrals and the DFT table.
    """

    def __init__(self, fn, name="custom", fourier=None, n_quad=4096):
        self._fn = fn
        self.name = name
        self._fourier = fourier
        self._n_quad = int(n_quad)
        t = (np.arange(self._n_quad) + 0.5) / self._n_quad - 0.5
        vals = self(t)
        if np.any(vals < 0):
            raise ValueError("window must be non-negative")
        self.l1 = float(np.mean(vals))
        self.l2sq = float(np.mean(vals * vals))
        self._table = None

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        inside = np.abs(t) <= 0.5
        out = np.zeros_like(t)
        if np.any(inside):
            out[inside] = self._fn(t[inside])
        return out if out.ndim else float(out)

    @property
    def has_closed_form(self) -> bool:
        return self._fourier is not None

    def fourier(self, z):
        """Fourier transform ``h^(z) = int h(t) exp(-2 pi i z t) dt``."""
        if self._fourier is not None:
            return self._fourier(z)
        z = np.asarray(z, dtype=np.float64)
        freqs, table = self._dft_table()
        re = np.interp(z, freqs, table.real, left=0.0, right=0.0)
        im = np.interp(z, freqs, table.imag, left=0.0, right=0.0)
        return re + 1j * im

    def _dft_table(self, oversample=64):
        if self._table is None:
            n = 1024
            t = (np.arange(n) - n // 2) / n
            vals = self(t)
            size = n * oversample
            buf = np.zeros(size)
            # centre the window on index 0 so the transform is real for even windows
            buf[:n - n // 2] = vals[n // 2:]
            buf[size - n // 2:] = vals[:n // 2]
            spec = np.fft.fftshift(np.fft.fft(buf)) / n
            freqs = np.fft.fftshift(np.fft.fftfreq(size, d=1.0 / n))
            self._table = (freqs, spec)
        return self._table

    def __repr__(self):
        return f"Window({self.name!r})"


HANN = Window(lambda t: 0.5 * (1.0 + np.cos(2.0 * np.pi * t)), name="hann", fourier=hann_fourier)


def dft(signal: DiscreteSignal) -> np.ndarray:
    """Unitary forward DFT (``1/sqrt(M)`` normalization) on the grid ``k R / M``."""
    if len(signal) == 0:
        raise ValueError("empty input")
    return np.fft.fft(signal.samples, norm="ortho")


def idft(spectrum: np.ndarray, sample_rate: float, t0: float = 0.0) -> DiscreteSignal:
    spectrum = np.asarray(spectrum)
    if spectrum.size == 0:
        raise ValueError("empty input")
    return DiscreteSignal(np.fft.ifft(spectrum, norm="ortho"), sample_rate, t0)


def dft_frequencies(signal: DiscreteSignal) -> np.ndarray:
    """Signed frequencies (Hz) of the DFT bins, in ``np.fft`` order."""
    return np.fft.fftfreq(len(signal), d=1.0 / signal.sample_rate)


def fourier_samples(signal: DiscreteSignal) -> tuple[np.ndarray, np.ndarray]:
    """Approximate continuous Fourier transform values at the DFT bins.

    Returns ``(z, s^(z))`` with ``s^(z_k) ~ (1/R) sum_n s_n exp(-2 pi i z_k t_n)``.
    """
    z = dft_frequencies(signal)
    m = len(signal)
    vals = dft(signal) * (np.sqrt(m) / signal.sample_rate) * np.exp(-2j * np.pi * z * signal.t0)
    return z, vals


def _aligned(s: DiscreteSignal, q: DiscreteSignal):
    rate = s.sample_rate
    if not np.isclose(rate, q.sample_rate, rtol=1e-12, atol=0.0):
        raise ValueError("rate mismatch")
    if len(s) == 0 or len(q) == 0:
        return None
    offset = (q.t0 - s.t0) * rate
    shift = int(np.rint(offset))
    if abs(offset - shift) > 1e-6:
        raise ValueError("grids are not aligned")
    lo = max(0, shift)
    hi = min(len(s), shift + len(q))
    if hi <= lo:
        return None
    return s.samples[lo:hi], q.samples[lo - shift:hi - shift]


def inner_product(s: DiscreteSignal, q: DiscreteSignal) -> complex:
    """``<s, q> = (1/R) sum_n s_n conj(q_n)`` over the overlap of both supports.

    Outside its samples each signal is taken to be zero, so only the
    intersection of the two grids contributes.
    """
    pair = _aligned(s, q)
    if pair is None:
        return 0j
    a, b = pair
    return complex(np.vdot(b, a)) / s.sample_rate


def energy(s: DiscreteSignal) -> float:
    if len(s) == 0:
        return 0.0
    return float(np.vdot(s.samples, s.samples).real) / s.sample_rate
