import warnings

import numpy as np
import pytest

from ltft.frame import (HIGH, LOW, MID, LTFTConfig, PhasePoint, PhasePoints, analyze, analyze_many,
                        atom_band, atom_freq, atom_support, atom_time)
from ltft.signal import DiscreteSignal, TimeGrid, dft, dft_frequencies, energy, inner_product

CFG = LTFTConfig(tau1=5, tau2=13, a=20, b=400)


def test_config_validation_and_defaults():
    with pytest.raises(ValueError):
        LTFTConfig(tau1=0)
    with pytest.raises(ValueError):
        LTFTConfig(tau1=5, tau2=4)
    with pytest.raises(ValueError):
        LTFTConfig(a=10, b=5)
    c = LTFTConfig.from_rate(16000)
    assert (c.a, c.b, c.tau1, c.tau2) == (320.0, 6400.0, 5.0, 13.0)
    assert c.tau0 == 9.0
    assert c.max_support == pytest.approx(13 / 320)


def test_tau_measure_has_unit_mass():
    nodes, w = CFG.tau_quadrature(17)
    assert w.sum() == pytest.approx(1.0)
    assert nodes[0] == 5 and nodes[-1] == 13
    cfg = LTFTConfig(tau1=5, tau2=13, a=20, b=400, tau_weights=lambda t: t, weights_name="linear")
    n, w = cfg.tau_quadrature(2049)
    assert w.sum() == pytest.approx(1.0)
    assert np.sum(n * w) == pytest.approx((13 ** 3 - 5 ** 3) / 3 / ((13 ** 2 - 5 ** 2) / 2), rel=1e-6)
    assert cfg.hash() != CFG.hash()


def test_config_hash_stable():
    assert CFG.hash() == LTFTConfig(tau1=5.0, tau2=13.0, a=20.0, b=400.0).hash()
    assert CFG.hash() != LTFTConfig(tau1=5, tau2=13, a=21, b=400).hash()


@pytest.mark.parametrize("omega, band", [(0.0, LOW), (19.9, LOW), (20.0, MID), (400.0, MID), (401.0, HIGH),
                                         (-401.0, HIGH), (-100.0, MID)])
def test_atom_band(omega, band):
    assert atom_band(PhasePoint(0, omega, 10), CFG) == band


def test_atom_value_and_support():
    p = PhasePoint(0.0, 100.0, 10.0)
    grid = TimeGrid(-0.1, 10000.0, 2001)
    f = atom_time(p, CFG, grid)
    assert f.samples[1000] == pytest.approx(np.sqrt(10))
    assert atom_support(p, CFG) == pytest.approx((-0.05, 0.05))
    nz = np.nonzero(f.samples)[0]
    assert grid.times()[nz[0]] >= -0.05 - 1e-12 and grid.times()[nz[-1]] <= 0.05 + 1e-12


def test_atom_norm_constant_all_bands(rng):
    R = 40 * 800.0
    cfg = LTFTConfig(tau1=5, tau2=13, a=20, b=400)
    for _ in range(30):
        p = PhasePoint(rng.uniform(-0.1, 0.1), rng.uniform(-800, 800), rng.uniform(5, 13))
        lo, hi = atom_support(p, cfg)
        grid = TimeGrid(lo - 0.01, R, int((hi - lo + 0.02) * R))
        assert energy(atom_time(p, cfg, grid)) == pytest.approx(0.375, abs=1e-4)


def test_atom_no_overlap_and_nyquist_warning():
    f = atom_time(PhasePoint(10.0, 100.0, 10.0), CFG, TimeGrid(0, 1000.0, 100))
    assert "no overlap" in f.flags and not np.any(f.samples)
    with pytest.warns(UserWarning, match="Nyquist"):
        atom_time(PhasePoint(0.0, 300.0, 10.0), CFG, TimeGrid(0, 500.0, 100))


def test_atom_freq_peak_and_modulation():
    p = PhasePoint(0.0, 100.0, 10.0)
    assert atom_freq(p, CFG, [100.0])[0] == pytest.approx(np.sqrt(10 / 100) * 0.5)
    q = PhasePoint(0.37, 100.0, 10.0)
    z = np.linspace(50, 150, 11)
    f0, f1 = atom_freq(p, CFG, z), atom_freq(q, CFG, z)
    assert np.allclose(np.abs(f0), np.abs(f1))
    assert np.allclose(f1, f0 * np.exp(-2j * np.pi * 0.37 * z))


def test_atom_freq_matches_dft():
    omega = 100.0
    R = 40 * omega
    p = PhasePoint(0.0, omega, 10.0)
    grid = TimeGrid(-0.5, R, int(R))
    f = atom_time(p, CFG, grid)
    z = dft_frequencies(f)
    num = dft(f) * np.sqrt(len(f)) / R * np.exp(-2j * np.pi * z * grid.t0)
    ref = atom_freq(p, CFG, z)
    mask = np.abs(z - omega) < 30
    assert np.max(np.abs(num[mask] - ref[mask])) / np.max(np.abs(ref)) < 1e-3


def test_analyze_examples():
    R = 16000.0
    grid = TimeGrid(-0.2, R, int(0.4 * R))
    p = PhasePoint(0.0, 100.0, 10.0)
    assert analyze(DiscreteSignal(np.zeros(grid.length), R, grid.t0), p, CFG) == 0
    f = atom_time(p, CFG, grid)
    assert analyze(f, p, CFG).real == pytest.approx(0.375, abs=1e-3)
    tone = DiscreteSignal.from_function(lambda t: np.exp(2j * np.pi * 100.0 * t), grid)
    assert analyze(tone, p, CFG) == pytest.approx(np.sqrt(10 / 100) * 0.5, abs=1e-3)
    with pytest.raises(ValueError):
        analyze(DiscreteSignal(np.zeros(0), R), p, CFG)


def test_analyze_matches_inner_product_and_batch(rng):
    R = 4000.0
    s = DiscreteSignal(rng.normal(size=4000), R, -0.5)
    pts = PhasePoints(rng.uniform(-0.6, 0.6, 50), rng.uniform(-1500, 1500, 50), rng.uniform(5, 13, 50))
    cfg = LTFTConfig.from_rate(R)
    direct = np.array([analyze(s, p, cfg) for p in pts])
    ip = np.array([inner_product(s, atom_time(p, cfg, s.grid)) for p in pts])
    assert np.allclose(direct, ip, atol=1e-12)
    batch = analyze_many(s, pts, cfg)
    assert np.max(np.abs(batch - direct)) < 1e-9 * max(1.0, np.max(np.abs(direct)))


def test_phase_points_container():
    pts = PhasePoints.from_points([PhasePoint(0, 1, 5), (1, 2, 6)])
    assert len(pts) == 2 and pts[1] == PhasePoint(1, 2, 6)
    assert list(pts)[0] == PhasePoint(0, 1, 5)
    assert pts == PhasePoints([0, 1], [1, 2], [5, 6])
    assert len(PhasePoints.empty()) == 0
    assert np.array_equal(pts.with_x([3, 4]).x, [3, 4])
