"""LTFT atoms in time and frequency, and the analysis coefficient ``<s, f_g>``.

An LTFT atom is indexed by a phase point ``g = (x, omega, tau)``::

    f_g(t) = sqrt(nu / tau) * h(nu (t - x) / tau) * exp(2 pi i omega (t - x))

with ``nu = a`` below the low transition frequency, ``nu = |omega|`` between
the transitions, and ``nu = b`` above the high one. Low and high atoms are
STFT atoms, the middle ones are wavelet atoms with ``tau`` oscillations.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple, Sequence

import numpy as np

from .signal import HANN, DiscreteSignal, TimeGrid, Window

__all__ = [
    "PhasePoint",
    "PhasePoints",
    "LTFTConfig",
    "LOW",
    "MID",
    "HIGH",
    "atom_band",
    "atom_scale",
    "atom_support",
    "atom_time",
    "atom_freq",
    "analyze",
    "analyze_many",
]

LOW, MID, HIGH = "low", "mid", "high"


class PhasePoint(NamedTuple):
    x: float
    omega: float
    tau: float


@dataclass(frozen=True, eq=False)
class PhasePoints:
    """Struct-of-arrays batch of phase points."""

    x: np.ndarray
    omega: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        arrs = [np.ascontiguousarray(np.asarray(v, dtype=np.float64).reshape(-1)) for v in (self.x, self.omega, self.tau)]
        if not (arrs[0].shape == arrs[1].shape == arrs[2].shape):
            raise ValueError("x, omega and tau must have equal lengths")
        for name, arr in zip(("x", "omega", "tau"), arrs):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.x.shape[0]

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return PhasePoint(float(self.x[idx]), float(self.omega[idx]), float(self.tau[idx]))
        return PhasePoints(self.x[idx], self.omega[idx], self.tau[idx])

    def __iter__(self) -> Iterator[PhasePoint]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, PhasePoints):
            return NotImplemented
        return (np.array_equal(self.x, other.x) and np.array_equal(self.omega, other.omega)
                and np.array_equal(self.tau, other.tau))

    @classmethod
    def from_points(cls, points: Sequence[PhasePoint]) -> "PhasePoints":
        if isinstance(points, PhasePoints):
            return points
        arr = np.asarray([tuple(p) for p in points], dtype=np.float64).reshape(-1, 3)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2])

    @classmethod
    def empty(cls) -> "PhasePoints":
        z = np.zeros(0)
        return cls(z, z, z)

    def with_x(self, x) -> "PhasePoints":
        return PhasePoints(x, self.omega, self.tau)


def _uniform_density(tau):
    return np.ones_like(np.asarray(tau, dtype=np.float64))


@dataclass(frozen=True)
class LTFTConfig:
    """Window, oscillation range and transition frequencies of an LTFT.

    ``tau_weights`` is an unnormalized density on ``[tau1, tau2]``; ``None``
    means uniform. It is normalized so the oscillation axis has unit mass.
    """

    window: Window = HANN
    tau1: float = 5.0
    tau2: float = 13.0
    a: float = 320.0
    b: float = 6400.0
    tau_weights: Callable | None = field(default=None, compare=False)
    weights_name: str = "uniform"

    def __post_init__(self):
        if not (0 < self.tau1 <= self.tau2):
            raise ValueError("need 0 < tau1 <= tau2")
        if not (0 < self.a <= self.b):
            raise ValueError("need 0 < a <= b")
        if self.tau_weights is not None and self.tau1 < self.tau2:
            nodes = np.linspace(self.tau1, self.tau2, 2049)
            w = np.asarray(self.tau_weights(nodes), dtype=np.float64)
            if np.any(w < 0) or not np.any(w > 0):
                raise ValueError("tau weights must be non-negative with positive mass")

    @classmethod
    def from_rate(cls, rate: float, alpha: float = 0.02, beta: float = 0.4, tau1: float = 5.0,
                  tau2: float = 13.0, window: Window = HANN, **kw) -> "LTFTConfig":
        """Transition frequencies given as fractions of the sample rate."""
        return cls(window=window, tau1=tau1, tau2=tau2, a=alpha * rate, b=beta * rate, **kw)

    # -- oscillation axis -------------------------------------------------

    def tau_density(self, tau):
        """Normalized density of the oscillation measure."""
        tau = np.asarray(tau, dtype=np.float64)
        if self.tau1 == self.tau2:
            raise ValueError("point-mass oscillation measure has no density")
        fn = self.tau_weights or _uniform_density
        nodes, w = _trapezoid(self.tau1, self.tau2, 4097)
        mass = float(np.sum(w * fn(nodes)))
        return np.where((tau >= self.tau1) & (tau <= self.tau2), fn(tau) / mass, 0.0)

    def tau_quadrature(self, n_tau: int) -> tuple[np.ndarray, np.ndarray]:
        """Trapezoid nodes and weights on ``[tau1, tau2]`` summing to one."""
        if self.tau1 == self.tau2:
            return np.array([self.tau1]), np.array([1.0])
        nodes, w = _trapezoid(self.tau1, self.tau2, max(int(n_tau), 2))
        fn = self.tau_weights or _uniform_density
        w = w * fn(nodes)
        return nodes, w / w.sum()

    @property
    def tau0(self) -> float:
        """Mean number of oscillations."""
        if self.tau_weights is None or self.tau1 == self.tau2:
            return 0.5 * (self.tau1 + self.tau2)
        nodes, w = self.tau_quadrature(4097)
        return float(np.sum(nodes * w))

    # -- geometry ---------------------------------------------------------

    def scale(self, omega):
        """Dilation ``nu`` of the window for frequency ``omega``."""
        return np.clip(np.abs(np.asarray(omega, dtype=np.float64)), self.a, self.b)

    @property
    def max_support(self) -> float:
        """Longest atom support, ``tau2 / a``."""
        return self.tau2 / self.a

    def hash(self) -> str:
        payload = {
            "window": self.window.name,
            "tau1": float(self.tau1),
            "tau2": float(self.tau2),
            "a": float(self.a),
            "b": float(self.b),
            "weights": self.weights_name if self.tau_weights is not None else "uniform",
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def _trapezoid(lo, hi, n):
    nodes = np.linspace(lo, hi, n)
    w = np.full(n, (hi - lo) / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return nodes, w


def atom_band(p: PhasePoint, cfg: LTFTConfig) -> str:
    w = abs(p.omega)
    if w < cfg.a:
        return LOW
    if w <= cfg.b:
        return MID
    return HIGH


def atom_scale(p: PhasePoint, cfg: LTFTConfig) -> float:
    return float(cfg.scale(p.omega))


def atom_support(p: PhasePoint, cfg: LTFTConfig) -> tuple[float, float]:
    half = p.tau / (2.0 * atom_scale(p, cfg))
    return p.x - half, p.x + half


def _atom_values(t, p: PhasePoint, cfg: LTFTConfig):
    nu = atom_scale(p, cfg)
    dt = t - p.x
    return np.sqrt(nu / p.tau) * cfg.window(nu * dt / p.tau) * np.exp(2j * np.pi * p.omega * dt)


def atom_time(p: PhasePoint, cfg: LTFTConfig, grid: TimeGrid) -> DiscreteSignal:
    """Sample the atom ``f_g`` on ``grid``; exactly zero outside its support."""
    p = PhasePoint(*p)
    if grid.rate < 2.0 * max(abs(p.omega), cfg.b):
        warnings.warn(
            f"sample rate {grid.rate} is below the Nyquist rate of the atom (omega={p.omega}, b={cfg.b})",
            stacklevel=2,
        )
    lo, hi = atom_support(p, cfg)
    n_lo = max(0, int(np.ceil((lo - grid.t0) * grid.rate)))
    n_hi = min(grid.length - 1, int(np.floor((hi - grid.t0) * grid.rate)))
    out = np.zeros(grid.length, dtype=np.complex128)
    if n_hi < n_lo:
        return DiscreteSignal(out, grid.rate, grid.t0, frozenset({"no overlap"}))
    t = grid.t0 + np.arange(n_lo, n_hi + 1) / grid.rate
    out[n_lo:n_hi + 1] = _atom_values(t, p, cfg)
    return DiscreteSignal(out, grid.rate, grid.t0)


def atom_freq(p: PhasePoint, cfg: LTFTConfig, freq_grid) -> np.ndarray:
    """Fourier transform of the atom, ``sqrt(tau/nu) h^((tau/nu)(z - omega)) exp(-2 pi i x z)``."""
    p = PhasePoint(*p)
    z = np.asarray(freq_grid, dtype=np.float64)
    nu = atom_scale(p, cfg)
    r = p.tau / nu
    return np.sqrt(r) * cfg.window.fourier(r * (z - p.omega)) * np.exp(-2j * np.pi * p.x * z)


def analyze(s: DiscreteSignal, p: PhasePoint, cfg: LTFTConfig) -> complex:
    """Analysis coefficient ``V_f[s](g) = <s, f_g>``.

    Only the samples under the atom support are touched.
    """
    if len(s) == 0:
        raise ValueError("empty input")
    p = PhasePoint(*p)
    grid = s.grid
    lo, hi = atom_support(p, cfg)
    n_lo = max(0, int(np.ceil((lo - grid.t0) * grid.rate)))
    n_hi = min(grid.length - 1, int(np.floor((hi - grid.t0) * grid.rate)))
    if n_hi < n_lo:
        return 0j
    t = grid.t0 + np.arange(n_lo, n_hi + 1) / grid.rate
    atom = _atom_values(t, p, cfg)
    return complex(np.vdot(atom, s.samples[n_lo:n_hi + 1])) / grid.rate


def analyze_many(s: DiscreteSignal, points: PhasePoints, cfg: LTFTConfig) -> np.ndarray:
    """Vectorized :func:`analyze` over a batch of phase points."""
    from . import _kernels

    if len(s) == 0:
        raise ValueError("empty input")
    points = PhasePoints.from_points(points)
    values, _ = _kernels.analyze_batch(s, points, cfg)
    return values

