"""Monte Carlo synthesis and sampled phase-space operators.

Every estimator uses the normalization ``||psi||_1 / K``: a sum over ``K``
uniform samples of the box ``psi`` times that constant is an unbiased
estimate of the corresponding phase-space integral.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels
from .frame import LTFTConfig, PhasePoint, PhasePoints
from .signal import DiscreteSignal, TimeGrid

__all__ = [
    "CoefficientSample",
    "CoefficientSamples",
    "KernelOperator",
    "mc_synthesis",
    "vocoder_nonlinearity",
    "soft_threshold",
    "apply_multiplier",
    "time_dilation_map",
    "input_sampled_operator",
    "sampled_kernel_synthesis",
]


class CoefficientSample(NamedTuple):
    point: PhasePoint
    value: complex


@dataclass(frozen=True, eq=False)
class CoefficientSamples:
    """Phase points with one complex coefficient each."""

    points: PhasePoints
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.complex128).reshape(-1))
        if vals.shape[0] != len(self.points):
            raise ValueError("one value per point required")
        if not np.all(np.isfinite(vals)):
            raise ValueError("coefficient values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, k: int) -> CoefficientSample:
        return CoefficientSample(self.points[k], complex(self.values[k]))

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def with_values(self, values) -> "CoefficientSamples":
        return CoefficientSamples(self.points, values)

    @classmethod
    def from_pairs(cls, pairs) -> "CoefficientSamples":
        pairs = list(pairs)
        pts = PhasePoints.from_points([p for p, _ in pairs])
        return cls(pts, np.array([v for _, v in pairs], dtype=np.complex128))


@dataclass(frozen=True)
class KernelOperator:
    """Phase-space operator given by its kernel.

    ``kernel(out_points, in_points)`` returns the ``(L, K)`` matrix of
    ``R(g'_l, g_k)``. ``bound`` is the optional uniform bound ``D`` on
    ``||R(., g)||_2``.
    """

    kernel: Callable[[PhasePoints, PhasePoints], np.ndarray]
    bound: float | None = None

    def __call__(self, out_points: PhasePoints, in_points: PhasePoints) -> np.ndarray:
        r = np.asarray(self.kernel(out_points, in_points), dtype=np.complex128)
        return np.broadcast_to(r, (len(out_points), len(in_points)))


def _synthesis(samples: CoefficientSamples, cfg: LTFTConfig, scale: float, out_grid: TimeGrid,
               skip: float = 0.0) -> tuple[DiscreteSignal, int]:
    if len(samples) == 0:
        return DiscreteSignal.zeros(out_grid, flags={"no samples"}), 0
    out, touched = _kernels.synthesize_batch(samples.values * scale, samples.points, cfg, out_grid,
                                             skip=skip * abs(scale))
    return DiscreteSignal(out, out_grid.rate, out_grid.t0), touched


def mc_synthesis(samples: CoefficientSamples, cfg: LTFTConfig, psi_measure: float,
                 out_grid: TimeGrid, skip: float = 0.0) -> DiscreteSignal:
    """``(||psi||_1 / K) sum_k F(g_k) f_{g_k}`` on ``out_grid``.

    Coefficients with modulus below ``skip`` are dropped. An empty sample
    set gives the zero signal flagged ``"no samples"``.
    """
    if not psi_measure > 0:
        raise ValueError("envelope measure must be positive")
    k = len(samples)
    scale = psi_measure / k if k else 0.0
    return _synthesis(samples, cfg, scale, out_grid, skip)[0]


def _principal_arg(z):
    arg = np.angle(z)
    return np.where(arg == -np.pi, np.pi, arg)


def vocoder_nonlinearity(z, delta: int):
    """``|z| exp(i delta Arg z)``; ``Arg`` in ``(-pi, pi]`` and ``r(0) = 0``."""
    if int(delta) != delta or delta < 1:
        raise ValueError("dilation must be an integer >= 1")
    z = np.asarray(z, dtype=np.complex128)
    if delta == 1:
        out = z.copy()
    else:
        out = np.abs(z) * np.exp(1j * delta * _principal_arg(z))
    return complex(out) if out.ndim == 0 else out


def soft_threshold(z, lam: float):
    """Shrink the modulus by ``lam`` and keep the phase."""
    if lam < 0:
        raise ValueError("threshold must be non-negative")
    z = np.asarray(z, dtype=np.complex128)
    mag = np.abs(z)
    out = np.exp(1j * _principal_arg(z)) * np.maximum(0.0, mag - lam)
    return complex(out) if out.ndim == 0 else out


def apply_multiplier(samples: CoefficientSamples, symbol) -> CoefficientSamples:
    """Multiply each coefficient by ``symbol(points)``; the points stay put."""
    h = np.broadcast_to(np.asarray(symbol(samples.points), dtype=np.complex128), (len(samples),))
    return samples.with_values(h * samples.values)


def time_dilation_map(p, delta: int):
    """``(x, omega, tau) -> (delta x, omega, tau)`` for one point or a batch."""
    if int(delta) != delta or delta < 1:
        raise ValueError("dilation must be an integer >= 1")
    if isinstance(p, PhasePoints):
        return p.with_x(delta * p.x)
    p = PhasePoint(*p)
    return PhasePoint(delta * p.x, p.omega, p.tau)


def input_sampled_operator(T: KernelOperator, samples: CoefficientSamples, psi_measure: float):
    """Monte Carlo operator ``g' -> (||psi||_1/K) sum_k R(g', g_k) F(g_k)``.

    The returned evaluator accepts a :class:`PhasePoint` (returns a complex)
    or a :class:`PhasePoints` batch (returns an array).
    """
    k = len(samples)
    if k < 1:
        raise ValueError("need at least one sample")
    scale = psi_measure / k

    def evaluate(probe):
        single = not isinstance(probe, PhasePoints)
        pts = PhasePoints.from_points([probe]) if single else probe
        out = np.zeros(len(pts), dtype=np.complex128)
        for lo in range(0, len(pts), 256):
            sub = pts[lo:lo + 256]
            out[lo:lo + len(sub)] = scale * (T(sub, samples.points) @ samples.values)
        return complex(out[0]) if single else out

    return evaluate


def sampled_kernel_synthesis(T: KernelOperator, in_samples: CoefficientSamples, out_points: PhasePoints,
                             psi_measure: float, eta_measure: float, cfg: LTFTConfig,
                             out_grid: TimeGrid) -> DiscreteSignal:
    """Doubly sampled operator ``(|eta| |psi| / K L) sum_j sum_k R(y_j, g_k) F(g_k) f_{y_j}``."""
    k, l = len(in_samples), len(out_points)
    if k < 1 or l < 1:
        raise ValueError("need at least one input and one output sample")
    mc = input_sampled_operator(T, in_samples, psi_measure)
    coef = mc(out_points)
    out, _ = _synthesis(CoefficientSamples(out_points, coef), cfg, eta_measure / l, out_grid)
    return out
