"""Sampling boxes in LTFT phase space and reproducible uniform sampling.

Randomness is counter based: the phase points are produced in fixed-size
blocks and block ``c`` draws from a generator seeded with ``(seed, c)``.
Point ``k`` therefore depends only on ``seed`` and ``k``. Blocks can be
generated in any order or in parallel and always give the serial result,
and a shorter run is a prefix of a longer one.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .frame import LTFTConfig, PhasePoints

__all__ = ["Envelope", "build_envelope", "sample", "transported_envelope", "BLOCK"]

BLOCK = 4096


@dataclass(frozen=True)
class Envelope:
    """Indicator of the box ``[x_lo, x_hi] x [omega_lo, omega_hi] x [tau1, tau2]``.

    The oscillation axis carries the normalized weights of ``cfg``, so the
    measure of the box is its time-frequency area.
    """

    x_lo: float
    x_hi: float
    omega_lo: float
    omega_hi: float
    cfg: LTFTConfig

    def __post_init__(self):
        if not self.x_lo < self.x_hi:
            raise ValueError("empty time interval")
        if not self.omega_lo < self.omega_hi:
            raise ValueError("empty frequency interval")

    @property
    def tau1(self) -> float:
        return self.cfg.tau1

    @property
    def tau2(self) -> float:
        return self.cfg.tau2

    @property
    def measure(self) -> float:
        return (self.x_hi - self.x_lo) * (self.omega_hi - self.omega_lo)

    def contains(self, points: PhasePoints) -> np.ndarray:
        return ((points.x >= self.x_lo) & (points.x <= self.x_hi)
                & (points.omega >= self.omega_lo) & (points.omega <= self.omega_hi)
                & (points.tau >= self.tau1) & (points.tau <= self.tau2))

    def indicator(self, points: PhasePoints) -> np.ndarray:
        return self.contains(points).astype(np.float64)

    def density(self, points: PhasePoints) -> np.ndarray:
        """Sampling density ``psi / ||psi||_1`` on the time-frequency axes."""
        return self.indicator(points) / self.measure

    def as_dict(self) -> dict:
        return {"x": [self.x_lo, self.x_hi], "omega": [self.omega_lo, self.omega_hi],
                "tau": [self.tau1, self.tau2], "measure": self.measure}


def build_envelope(M: int, rate: float, cfg: LTFTConfig, W: float = 1.0, center: float = 0.0) -> Envelope:
    """Practical sampling box for a signal of ``M`` samples at ``rate``.

    Time covers the signal plus the longest atom support ``tau2 / a`` on
    each side; frequency covers ``[0, rate * W / 2]``.
    """
    if M < 1:
        raise ValueError("need at least one sample")
    if not rate > 0:
        raise ValueError("sample rate must be positive")
    if W < 1:
        raise ValueError("envelope narrower than signal band")
    half = M / (2.0 * rate) + cfg.max_support
    return Envelope(center - half, center + half, 0.0, rate * W / 2.0, cfg)


def _tau_sampler(cfg: LTFTConfig):
    if cfg.tau1 == cfg.tau2:
        return lambda u: np.full_like(u, cfg.tau1)
    if cfg.tau_weights is None:
        return lambda u: cfg.tau1 + u * (cfg.tau2 - cfg.tau1)
    nodes = np.linspace(cfg.tau1, cfg.tau2, 4097)
    dens = cfg.tau_density(nodes)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(nodes))])
    cdf /= cdf[-1]
    return lambda u: np.interp(u, cdf, nodes)


def _block(env: Envelope, seed: int, c: int, tau_of) -> np.ndarray:
    u = np.random.default_rng([seed, c]).random((3, BLOCK))
    out = np.empty_like(u)
    out[0] = env.x_lo + u[0] * (env.x_hi - env.x_lo)
    out[1] = env.omega_lo + u[1] * (env.omega_hi - env.omega_lo)
    out[2] = tau_of(u[2])
    return out


def sample(env: Envelope, K: int, seed: int, workers: int = 1) -> PhasePoints:
    """``K`` i.i.d. phase points, uniform on the box, ``tau`` from the config weights."""
    if K < 0:
        raise ValueError("sample count must be non-negative")
    if K == 0:
        return PhasePoints.empty()
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    n_blocks = math.ceil(K / BLOCK)
    tau_of = _tau_sampler(env.cfg)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda c: _block(env, seed, c, tau_of), range(n_blocks)))
    else:
        blocks = [_block(env, seed, c, tau_of) for c in range(n_blocks)]
    allv = np.concatenate(blocks, axis=1)[:, :K]
    return PhasePoints(allv[0], allv[1], allv[2])


def transported_envelope(env: Envelope, delta: int) -> Envelope:
    """Image of the box under the time dilation ``x -> delta * x``."""
    if int(delta) != delta or delta < 1:
        raise ValueError("dilation must be an integer >= 1")
    return Envelope(delta * env.x_lo, delta * env.x_hi, env.omega_lo, env.omega_hi, env.cfg)
