"""Empirical checks of the Monte Carlo error behaviour.

* :func:`dense_grid_oracle` is a deterministic phase-space quadrature of
  ``S_f^{-1} V_f^* (psi V_f[s])``, the value the stochastic pipelines
  converge to.
* :func:`error_scaling_experiment` measures the decay of the ``delta = 1``
  reconstruction error in the oversampling factor ``Z``.
* :func:`concentration_check` compares Monte Carlo synthesis errors with the
  Markov-type high-probability bound.
* :func:`unbiasedness_check` compares trial means of an input-sampled
  operator with quadrature of the exact operator.

Reports carry the inputs of every bound (``A``, ``B``, ``||psi||_1``, ``K``,
``||F||_2``). The frame bounds are the grid extrema of the tabulated frame
filter, not certified constants.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .frame import LTFTConfig, PhasePoints
from .frame_operator import FrameFilter, apply_inverse_frame_operator, cached_frame_filter
from .sampling import Envelope, build_envelope, sample
from .signal import DiscreteSignal, TimeGrid, dft_frequencies, energy
from .stochastic import CoefficientSamples, KernelOperator, input_sampled_operator
from .vocoder import ANALYSIS, VocoderJob, output_margin, run_vocoder

__all__ = [
    "ExperimentReport",
    "trial_seed",
    "dense_grid_oracle",
    "envelope_truncation_error",
    "coefficient_norm",
    "error_scaling_experiment",
    "concentration_check",
    "unbiasedness_check",
    "markov_kappa",
    "bernstein_kappa",
]


@dataclass
class ExperimentReport:
    """Rows of one experiment plus metadata and a summary.

    CSV export writes one header row with the union of the row keys, in
    first-seen order. JSON export writes ``{"name", "metadata", "summary",
    "rows"}``.
    """

    name: str
    rows: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.summary.get("pass", all(r.get("pass", True) for r in self.rows)))

    def columns(self) -> list[str]:
        cols: list[str] = []
        for row in self.rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
        return cols

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.columns(), lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def to_dict(self) -> dict:
        return {"name": self.name, "metadata": _plain(self.metadata), "summary": _plain(self.summary),
                "rows": [_plain(r) for r in self.rows]}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=False)
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def trial_seed(seed: int, index: int) -> int:
    """Per-trial seed derived from ``(seed, index)``."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, dtype=np.uint32)[0])


def markov_kappa(delta: float) -> float:
    return delta ** -0.5


def bernstein_kappa(delta: float) -> float:
    return 4.0 * math.sqrt(math.log(1.0 / delta) + 0.25)


# -- dense oracle -----------------------------------------------------------

def _omega_nodes(lo: float, hi: float, cfg: LTFTConfig, n: int):
    """Composite trapezoid nodes on ``[lo, hi]`` with breakpoints at ``a`` and ``b``."""
    cuts = [lo] + [c for c in (cfg.a, cfg.b) if lo < c < hi] + [hi]
    total = hi - lo
    nodes, weights = [], []
    for s, e in zip(cuts[:-1], cuts[1:]):
        k = max(2, int(round(n * (e - s) / total)))
        x = np.linspace(s, e, k)
        w = np.full(k, (e - s) / (k - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
        nodes.append(x)
        weights.append(w)
    x = np.concatenate(nodes)
    w = np.concatenate(weights)
    # merge duplicated breakpoints
    ux, inv = np.unique(x, return_inverse=True)
    uw = np.zeros_like(ux)
    np.add.at(uw, inv, w)
    return ux, uw


def _phase_space_multiplier(cfg: LTFTConfig, rate: float, n: int, omegas, oweights, taus, tweights):
    """``sum_j,l w_j w_l |DFT(f_{0, w_j, tau_l})|^2 / R^2`` on a circular grid of ``n`` samples."""
    d = np.arange(n)
    d = np.where(d < (n + 1) // 2, d, d - n) / rate
    mult = np.zeros(n)
    for tau, wt in zip(taus, tweights):
        for lo in range(0, omegas.size, 64):
            om = omegas[lo:lo + 64, None]
            nu = cfg.scale(om)
            atoms = np.sqrt(nu / tau) * cfg.window(nu * d[None, :] / tau) * np.exp(2j * np.pi * om * d[None, :])
            spec = np.abs(np.fft.fft(atoms, axis=1)) ** 2
            mult += wt * (oweights[lo:lo + 64] @ spec)
    return mult / rate ** 2


def dense_grid_oracle(s: DiscreteSignal, cfg: LTFTConfig, env: Envelope, grid_res=(1024, 9),
                      frame_filter: FrameFilter | None = None, out_grid: TimeGrid | None = None,
                      floor: float = 1e-6) -> DiscreteSignal:
    """Deterministic quadrature of ``S_f^{-1} V_f^* (psi V_f[s])``.

    The time axis is integrated at the sample spacing, which is exact for
    the discrete correlation and turns the sum into a Fourier multiplier.
    Frequency uses a composite trapezoid rule with ``grid_res[0]`` nodes
    split at the transition frequencies, and the oscillation axis
    ``grid_res[1]`` trapezoid nodes of the ``tau`` measure. The result is
    complex (positive-frequency atoms only when the box starts at 0).
    """
    n_omega, n_tau = grid_res
    rate = s.sample_rate
    if out_grid is None:
        out_grid = s.grid
    if frame_filter is None:
        frame_filter = cached_frame_filter(cfg, rate)
    if rate * cfg.tau1 / cfg.b < 4:
        warnings.warn("time grid has fewer than 4 points per shortest atom", stacklevel=2)
    if env.x_lo > s.t0 - cfg.max_support / 2 or env.x_hi < s.grid.t_end + cfg.max_support / 2:
        warnings.warn("envelope does not cover every atom touching the signal; "
                      "the oracle integrates all time shifts", stacklevel=2)
    if not np.any(s.samples):
        return DiscreteSignal.zeros(out_grid)

    pad = int(math.ceil(2 * rate * cfg.max_support))
    lo_t = min(s.t0, out_grid.t0) - pad / rate
    hi_t = max(s.grid.t_end, out_grid.t_end) + pad / rate
    n = int(round((hi_t - lo_t) * rate)) + 1
    start = int(round((s.t0 - lo_t) * rate))
    buf = np.zeros(n, dtype=np.complex128)
    buf[start:start + len(s)] = s.samples

    omegas, ow = _omega_nodes(env.omega_lo, env.omega_hi, cfg, n_omega)
    taus, tw = cfg.tau_quadrature(n_tau)
    mult = _phase_space_multiplier(cfg, rate, n, omegas, ow, taus, tw)

    step = float(np.max(np.diff(omegas)))
    if step > cfg.a / (2.0 * cfg.tau2):
        coarse = _phase_space_multiplier(cfg, rate, n, omegas[::2], _coarse_weights(omegas, ow), taus, tw)
        est = float(np.max(np.abs(coarse - mult)) / np.max(mult))
        warnings.warn(f"frequency grid under-resolved (step {step:.3g} Hz); "
                      f"estimated relative quadrature error {est:.2e}", stacklevel=2)

    out = np.fft.ifft(np.fft.fft(buf) * mult)
    full = DiscreteSignal(out, rate, lo_t)
    full = apply_inverse_frame_operator(full, frame_filter, floor)
    first = int(round((out_grid.t0 - lo_t) * rate))
    return DiscreteSignal(full.samples[first:first + out_grid.length], rate, out_grid.t0)


def _coarse_weights(nodes, weights):
    # trapezoid weights for every other node of the same composite grid
    x = nodes[::2]
    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def envelope_truncation_error(s: DiscreteSignal, cfg: LTFTConfig, env: Envelope, grid_res=(1024, 9),
                              frame_filter: FrameFilter | None = None) -> float:
    """Relative error of the real dense-grid reconstruction restricted to ``env``.

    Without the box ``S_f^{-1} V_f^* V_f s = s`` exactly, so this is the
    ``epsilon`` part of the error of the stochastic method.
    """
    rec = dense_grid_oracle(s, cfg, env, grid_res, frame_filter)
    err = 2.0 * rec.samples.real - np.real(s.samples)
    return float(np.linalg.norm(err) / np.linalg.norm(np.real(s.samples)))


def coefficient_norm(s: DiscreteSignal, F: FrameFilter) -> float:
    """``||V_f[s]||_2`` over the whole phase space, from the frame filter."""
    z = dft_frequencies(s)
    spec = np.fft.fft(s.samples, norm="ortho")
    return float(np.sqrt(np.sum(F(z) * np.abs(spec) ** 2) / s.sample_rate))


# -- error scaling ------------------------------------------------------------

def error_scaling_experiment(s: DiscreteSignal, cfg: LTFTConfig | None, Zs, seeds: int, seed: int = 0,
                             pipeline_mode: str = ANALYSIS, frame_filter: FrameFilter | None = None,
                             W: float = 1.0, epsilon: bool = False, grid_res=(1024, 9)) -> ExperimentReport:
    """``delta = 1`` reconstruction error for each oversampling factor in ``Zs``.

    Each row holds the median and mean relative L2 error over ``seeds``
    runs. The summary holds the least-squares slope of ``log(median)``
    against ``log Z``, expected near ``-1/2``.
    """
    Zs = [float(z) for z in Zs]
    if len(Zs) < 2 or any(b <= a for a, b in zip(Zs, Zs[1:])):
        raise ValueError("need at least two ascending oversampling factors")
    cfg = cfg or LTFTConfig.from_rate(s.sample_rate)
    filt = frame_filter or cached_frame_filter(cfg, s.sample_rate)
    A, B = filt.A, filt.B
    C = math.sqrt(cfg.window.l2sq)
    ref = np.real(np.asarray(s.samples))
    ref_norm = float(np.linalg.norm(ref))
    f_norm = coefficient_norm(s, filt)
    s_norm = math.sqrt(energy(s))
    rows = []
    for Z in Zs:
        errs = []
        K = psi = None
        for i in range(seeds):
            res = run_vocoder(VocoderJob(s, 1, cfg, Z, trial_seed(seed, i), pipeline_mode, W, frame_filter=filt))
            K, psi = res.n_samples, res.envelope.measure
            errs.append(float(np.linalg.norm(res.signal.samples - ref) / ref_norm))
        # RMS bound for the analysis pipeline: ||S^-1|| <= 1/A, ||2 Re e|| <= 2 ||e||
        bound = 2.0 * math.sqrt(psi / K) * C * f_norm / A / s_norm
        med = float(np.median(errs))
        rows.append({"Z": Z, "K": K, "seeds": seeds, "median_error": med, "mean_error": float(np.mean(errs)),
                     "max_error": float(np.max(errs)), "bound": bound, "A": A, "B": B, "psi_measure": psi,
                     "F_norm": f_norm, "pass": med <= bound})
    logz = np.log([r["Z"] for r in rows])
    logm = np.log([r["median_error"] for r in rows])
    slope = float(np.polyfit(logz, logm, 1)[0])
    ratios = [rows[i]["median_error"] / rows[j]["median_error"]
              for i in range(len(rows)) for j in range(i + 1, len(rows))
              if math.isclose(rows[j]["Z"], 4 * rows[i]["Z"])]
    summary = {"slope": slope, "slope_target": -0.5, "slope_ok": -0.65 <= slope <= -0.35,
               "ratio_4x": ratios, "ratio_4x_ok": all(1.3 <= r <= 3.0 for r in ratios)}
    summary["pass"] = summary["slope_ok"] and summary["ratio_4x_ok"]
    meta = {"config_hash": cfg.hash(), "signal": _describe(s), "pipeline_mode": pipeline_mode,
            "frame_bounds": "grid extrema of the tabulated frame filter", "seed": seed}
    if epsilon:
        env = build_envelope(len(s), s.sample_rate, cfg, W, center=s.t0 + (len(s) - 1) / (2 * s.sample_rate))
        meta["epsilon"] = envelope_truncation_error(s, cfg, env, grid_res, filt)
    return ExperimentReport("error_scaling", rows, meta, summary)


def _describe(s: DiscreteSignal) -> dict:
    return {"samples": len(s), "rate": s.sample_rate, "t0": s.t0, "energy": energy(s)}


# -- concentration -----------------------------------------------------------

def concentration_check(s: DiscreteSignal, cfg: LTFTConfig | None, K: int, delta: float, trials: int,
                        seed: int = 0, W: float = 1.0, frame_filter: FrameFilter | None = None,
                        grid_res=(1024, 9)) -> ExperimentReport:
    """Exceedance rate of the Markov bound for Monte Carlo synthesis.

    The coefficient function is ``F = V_f[S_f^{-1} s]`` on the positive
    frequency box, the target is ``V_f^*(psi F)`` from the dense oracle and
    the bound is ``sqrt(|psi|_1 / K) A^{-1/2} B^{1/2} C ||F||_2 delta^{-1/2}``.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if trials < 50:
        raise ValueError("need at least 50 trials")
    cfg = cfg or LTFTConfig.from_rate(s.sample_rate)
    rate = s.sample_rate
    filt = frame_filter or cached_frame_filter(cfg, rate)
    A, B = filt.A, filt.B
    C = math.sqrt(cfg.window.l2sq)
    D = math.sqrt(B / A) * C
    env = build_envelope(len(s), rate, cfg, W, center=s.t0 + (len(s) - 1) / (2 * rate))
    m = output_margin(cfg, rate)
    out_grid = s.grid.padded(m)
    pad = int(math.ceil(rate * cfg.max_support))
    pre = apply_inverse_frame_operator(s.zero_pad(pad), filt)
    f_norm = coefficient_norm(pre, filt)
    target = dense_grid_oracle(s, cfg, env, grid_res, filt, out_grid).samples
    scale = math.sqrt(env.measure / K) * D * f_norm
    bound = scale * markov_kappa(delta)
    bern = scale * bernstein_kappa(delta)
    errs = np.empty(trials)
    for t in range(trials):
        pts = sample(env, K, trial_seed(seed, t))
        vals, _ = _kernels.analyze_batch(pre, pts, cfg)
        out, _ = _kernels.synthesize_batch(vals * (env.measure / K), pts, cfg, out_grid)
        errs[t] = math.sqrt(np.sum(np.abs(out - target) ** 2) / rate)
    exceed = float(np.mean(errs > bound))
    slack = 3.0 * math.sqrt(delta * (1 - delta) / trials)
    rows = [{"trial": t, "error": float(e), "bound": bound, "exceeds": bool(e > bound)} for t, e in enumerate(errs)]
    summary = {"delta": delta, "trials": trials, "K": K, "psi_measure": env.measure, "A": A, "B": B, "C": C,
               "F_norm": f_norm, "markov_bound": bound, "bernstein_bound_informational": bern,
               "bernstein_exceedance_informational": float(np.mean(errs > bern)),
               "exceedance": exceed, "allowed": delta + slack, "median_error": float(np.median(errs)),
               "pass": exceed <= delta + slack}
    meta = {"config_hash": cfg.hash(), "signal": _describe(s), "seed": seed,
            "frame_bounds": "grid extrema of the tabulated frame filter"}
    return ExperimentReport("concentration", rows, meta, summary)


# -- unbiasedness -------------------------------------------------------------

def _box_quadrature(env: Envelope, nodes=(24, 24, 8)) -> tuple[PhasePoints, np.ndarray]:
    nx, nw, nt = nodes
    gx, wx = np.polynomial.legendre.leggauss(nx)
    gw, ww = np.polynomial.legendre.leggauss(nw)
    x = env.x_lo + (gx + 1) * (env.x_hi - env.x_lo) / 2
    wx = wx * (env.x_hi - env.x_lo) / 2
    om = env.omega_lo + (gw + 1) * (env.omega_hi - env.omega_lo) / 2
    ww = ww * (env.omega_hi - env.omega_lo) / 2
    cfg = env.cfg
    if cfg.tau1 == cfg.tau2:
        tau, wt = np.array([cfg.tau1]), np.array([1.0])
    else:
        gt, wt = np.polynomial.legendre.leggauss(nt)
        tau = cfg.tau1 + (gt + 1) * (cfg.tau2 - cfg.tau1) / 2
        wt = wt * (cfg.tau2 - cfg.tau1) / 2 * cfg.tau_density(tau)
    X, O, T = np.meshgrid(x, om, tau, indexing="ij")
    Wt = wx[:, None, None] * ww[None, :, None] * wt[None, None, :]
    return PhasePoints(X.ravel(), O.ravel(), T.ravel()), Wt.ravel()


def unbiasedness_check(T: KernelOperator, F, env: Envelope, K: int, trials: int, probes: PhasePoints,
                       seed: int = 0, quad_nodes=(24, 24, 8), min_pass_rate: float = 0.95) -> ExperimentReport:
    """Trial means of ``T^K F`` against quadrature of ``T(psi F)`` at each probe.

    ``F`` maps :class:`PhasePoints` to complex values. A probe passes when
    ``|mean - target| <= 3 std / sqrt(trials)``; zero-variance probes
    need agreement to rounding.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    probes = PhasePoints.from_points(probes)
    qp, qw = _box_quadrature(env, quad_nodes)
    target = np.asarray(T(probes, qp)) @ (np.asarray(F(qp), dtype=np.complex128) * qw)
    vals = np.empty((trials, len(probes)), dtype=np.complex128)
    for t in range(trials):
        pts = sample(env, K, trial_seed(seed, t))
        op = input_sampled_operator(T, CoefficientSamples(pts, F(pts)), env.measure)
        vals[t] = op(probes)
    mean = vals.mean(axis=0)
    std = np.sqrt(np.mean(np.abs(vals - mean) ** 2, axis=0) * trials / (trials - 1))
    tol = 3.0 * std / math.sqrt(trials)
    tol = np.maximum(tol, 1e-12 * np.maximum(1.0, np.abs(target)))
    ok = np.abs(mean - target) <= tol
    rows = [{"probe": i, "x": probes.x[i], "omega": probes.omega[i], "tau": probes.tau[i],
             "target_re": target[i].real, "target_im": target[i].imag, "mean_re": mean[i].real,
             "mean_im": mean[i].imag, "std": std[i], "tolerance": tol[i], "pass": bool(ok[i])}
            for i in range(len(probes))]
    rate = float(np.mean(ok))
    summary = {"pass_rate": rate, "min_pass_rate": min_pass_rate, "K": K, "trials": trials,
               "psi_measure": env.measure, "kernel_bound": T.bound, "pass": rate >= min_pass_rate}
    return ExperimentReport("unbiasedness", rows, {"seed": seed, "box": env.as_dict()}, summary)
