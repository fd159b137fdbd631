"""The LTFT frame operator as a Fourier multiplier.

The frame operator ``S_f`` multiplies the spectrum by the frame filter

    S(z) = int dmu(tau) int dw |sqrt(tau/nu) h^((tau/nu)(z - w))|^2

summed over the low, mid and high bands. In the two STFT bands ``nu`` is
constant, so the inner integral is an increment of the cumulative energy
``Phi(u) = int_{-inf}^u |h^|^2`` of the window spectrum. ``Phi`` is
tabulated once by trapezoid quadrature and the tails are cut where
``|h^|^2`` drops below ``1e-12`` of its peak. In the wavelet band the
integral is a trapezoid rule in ``log w``. The oscillation axis uses
trapezoid weights of the normalized ``tau`` measure.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .frame import LTFTConfig
from .signal import DiscreteSignal, dft, dft_frequencies

__all__ = [
    "FrameFilter",
    "frequency_grid",
    "compute_frame_filter",
    "apply_frame_operator",
    "apply_inverse_frame_operator",
    "estimate_frame_bounds",
    "save_frame_filter",
    "load_frame_filter",
    "cached_frame_filter",
    "cache_dir",
    "FILTER_FORMAT",
    "FILTER_VERSION",
    "DEFAULT_QUADRATURE",
]

FILTER_FORMAT = "ltft-frame-filter"
FILTER_VERSION = 1
DEFAULT_QUADRATURE = (512, 9)
TAIL_REL = 1e-12


@dataclass(frozen=True, eq=False)
class FrameFilter:
    """Frame filter tabulated on an ascending frequency grid.

    A grid starting at ``0`` is extended evenly to negative frequencies.
    Frequencies beyond the grid take the nearest tabulated value.
    """

    grid: np.ndarray
    values: np.ndarray
    quadrature: tuple[int, int]
    config_hash: str = ""

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if g.shape != v.shape or g.ndim != 1 or g.size < 1:
            raise ValueError("grid and values must be matching 1-d arrays")
        if np.any(np.diff(g) <= 0):
            raise ValueError("frequency grid must be strictly ascending")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("frame filter not invertible at grid resolution")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "quadrature", tuple(int(q) for q in self.quadrature))

    @property
    def A(self) -> float:
        return float(self.values.min())

    @property
    def B(self) -> float:
        return float(self.values.max())

    @property
    def even(self) -> bool:
        return self.grid[0] >= 0

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if self.even:
            z = np.abs(z)
        return np.interp(z, self.grid, self.values)

    @classmethod
    def constant(cls, value: float, zmax: float = 1.0) -> "FrameFilter":
        return cls(np.array([0.0, zmax]), np.array([value, value]), (0, 0), "constant")


def frequency_grid(cfg: LTFTConfig, rate: float, W: float = 1.0, step: float | None = None) -> np.ndarray:
    """Non-negative frequency grid on ``[0, rate W / 2]``.

    The default step resolves the narrowest band feature, ``a / tau2``, with
    eight points.
    """
    zmax = rate * W / 2.0
    if step is None:
        step = cfg.a / (8.0 * cfg.tau2)
    n = int(np.ceil(zmax / step)) + 1
    n = min(max(n, 2), 200001)
    return np.linspace(0.0, zmax, n)


def _energy_cdf(window, n_omega: int):
    """Spline of ``Phi(u) = int_{-U}^u |h^|^2`` and the cutoff ``U``."""
    scan = np.linspace(0.0, 512.0, 512 * 64 + 1)
    mag = np.abs(window.fourier(scan)) ** 2
    peak = float(mag.max())
    above = np.nonzero(mag >= TAIL_REL * peak)[0]
    U = float(scan[above[-1]]) + 1.0
    du = min(1.0 / 64.0, 16.0 / max(n_omega, 2))
    n = int(np.ceil(2 * U / du)) + 1
    u = np.linspace(-U, U, n)
    e = np.abs(window.fourier(u)) ** 2
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (e[1:] + e[:-1]) * np.diff(u))])
    return CubicSpline(u, cum, extrapolate=False), U, float(cum[-1])


def _phi(spline, U, total, u):
    u = np.asarray(u, dtype=np.float64)
    out = spline(np.clip(u, -U, U))
    out = np.where(u <= -U, 0.0, out)
    return np.where(u >= U, total, out)


def compute_frame_filter(cfg: LTFTConfig, freq_grid, quadrature=DEFAULT_QUADRATURE) -> FrameFilter:
    """Tabulate the frame filter of ``cfg`` on ``freq_grid``.

    ``quadrature = (n_omega, n_tau)`` sets the trapezoid node counts of the
    wavelet-band ``log w`` integral and of the oscillation axis; ``n_omega``
    also sets the density of the cumulative window-energy table.
    """
    n_omega, n_tau = (int(q) for q in quadrature)
    if n_omega < 2 or n_tau < 2:
        raise ValueError("need at least two quadrature nodes per axis")
    z = np.asarray(freq_grid, dtype=np.float64)
    taus, tw = cfg.tau_quadrature(n_tau)
    spline, U, total = _energy_cdf(cfg.window, n_omega)
    a, b = cfg.a, cfg.b

    vals = np.zeros_like(z)
    if b > a:
        v = np.linspace(np.log(a), np.log(b), n_omega)
        vw = np.full(n_omega, (v[-1] - v[0]) / (n_omega - 1))
        vw[0] *= 0.5
        vw[-1] *= 0.5
        inv_w = np.exp(-v)
    for tau, wt in zip(taus, tw):
        ra, rb = tau / a, tau / b
        # low band |w| < a
        low = _phi(spline, U, total, ra * (z + a)) - _phi(spline, U, total, ra * (z - a))
        # high band, w > b and w < -b
        high = _phi(spline, U, total, rb * (z - b)) + (total - _phi(spline, U, total, rb * (z + b)))
        acc = low + high
        if b > a:
            mid = np.empty_like(z)
            for lo in range(0, z.size, 256):
                zz = z[lo:lo + 256, None] * inv_w[None, :]
                e = (np.abs(cfg.window.fourier(tau * (zz - 1.0))) ** 2
                     + np.abs(cfg.window.fourier(tau * (zz + 1.0))) ** 2)
                mid[lo:lo + 256] = tau * (e @ vw)
            acc = acc + mid
        vals += wt * acc
    return FrameFilter(z, vals, (n_omega, n_tau), cfg.hash())


def _multiply(s: DiscreteSignal, gain: np.ndarray) -> DiscreteSignal:
    if len(s) == 0:
        return s
    spec = dft(s) * gain
    out = np.fft.ifft(spec, norm="ortho")
    if s.is_real:
        out = out.real
    return DiscreteSignal(out, s.sample_rate, s.t0)


def apply_frame_operator(s: DiscreteSignal, F: FrameFilter) -> DiscreteSignal:
    """``S_f s``: multiply the spectrum by the frame filter."""
    if len(s) == 0:
        return s
    return _multiply(s, F(dft_frequencies(s)))


def apply_inverse_frame_operator(s: DiscreteSignal, F: FrameFilter, floor: float = 1e-6) -> DiscreteSignal:
    """``S_f^{-1} s`` with the filter floored at ``floor * B``."""
    if len(s) == 0:
        return s
    gain = F(dft_frequencies(s))
    return _multiply(s, 1.0 / np.maximum(gain, floor * F.B))


def estimate_frame_bounds(F: FrameFilter) -> tuple[float, float]:
    """Frame bounds as the extrema of the tabulated filter."""
    return F.A, F.B


# -- persistence ------------------------------------------------------------

def save_frame_filter(F: FrameFilter, path, config: dict | None = None) -> Path:
    """Write the filter as versioned JSON: a header plus ``[z, S(z)]`` pairs."""
    path = Path(path)
    doc = {
        "format": FILTER_FORMAT,
        "version": FILTER_VERSION,
        "config_hash": F.config_hash,
        "quadrature": list(F.quadrature),
        "config": config or {},
        "pairs": [[float(z), float(v)] for z, v in zip(F.grid, F.values)],
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(doc))
    os.replace(tmp, path)
    return path


def load_frame_filter(path, expect_hash: str | None = None) -> FrameFilter:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != FILTER_FORMAT:
        raise ValueError(f"{path}: not a frame filter file")
    if doc.get("version") != FILTER_VERSION:
        raise ValueError(f"{path}: unsupported frame filter version {doc.get('version')}")
    if expect_hash is not None and doc.get("config_hash") != expect_hash:
        raise ValueError(f"{path}: config hash mismatch")
    pairs = np.asarray(doc["pairs"], dtype=np.float64).reshape(-1, 2)
    return FrameFilter(pairs[:, 0], pairs[:, 1], tuple(doc["quadrature"]), doc["config_hash"])


def cache_dir() -> Path:
    """Cache directory from ``LTFT_CACHE_DIR``, else ``~/.cache/ltft``."""
    env = os.environ.get("LTFT_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "ltft"


def _config_record(cfg: LTFTConfig, rate: float, W: float) -> dict:
    return {"window": cfg.window.name, "tau1": cfg.tau1, "tau2": cfg.tau2, "a": cfg.a, "b": cfg.b,
            "weights": cfg.weights_name if cfg.tau_weights is not None else "uniform",
            "rate": rate, "W": W}


def cached_frame_filter(cfg: LTFTConfig, rate: float, W: float = 1.0, quadrature=DEFAULT_QUADRATURE,
                        directory=None, use_cache: bool = True) -> FrameFilter:
    """Frame filter on the default grid for ``rate``, loaded from or stored in the cache."""
    n_omega, n_tau = quadrature
    key = f"{cfg.hash()}_r{rate:g}_w{W:g}_q{n_omega}x{n_tau}"
    path = Path(directory) if directory is not None else cache_dir()
    path = path / f"frame_filter_{key}.json"
    if use_cache and path.exists():
        try:
            return load_frame_filter(path, expect_hash=cfg.hash())
        except (ValueError, KeyError, json.JSONDecodeError):
            pass
    F = compute_frame_filter(cfg, frequency_grid(cfg, rate, W), quadrature)
    if use_cache:
        try:
            save_frame_filter(F, path, _config_record(cfg, rate, W))
        except OSError:
            pass
    return F
