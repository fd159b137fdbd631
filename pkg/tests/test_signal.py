import numpy as np
import pytest
from scipy.integrate import quad

from ltft.signal import (HANN, DiscreteSignal, TimeGrid, Window, dft, dft_frequencies, energy, fourier_samples,
                         hann, hann_fourier, idft, inner_product)


def test_grid_times_and_validation():
    g = TimeGrid(0.5, 4.0, 3)
    assert np.allclose(g.times(), [0.5, 0.75, 1.0])
    assert g.t_end == 1.0
    assert g.padded(2).t0 == 0.0 and g.padded(2).length == 7
    with pytest.raises(ValueError):
        TimeGrid(0, 0, 3)
    with pytest.raises(ValueError):
        TimeGrid(0, 1, -1)


def test_signal_basics():
    s = DiscreteSignal([1, 2, 3], 2.0)
    assert s.samples.dtype == np.float64 and s.is_real
    assert s.energy() == pytest.approx(14 / 2)
    with pytest.raises(ValueError):
        s.samples[0] = 5
    p = s.zero_pad(1, 2)
    assert len(p) == 6 and p.t0 == -0.5
    c = p.crop(1, 3)
    assert np.array_equal(c.samples, s.samples) and c.t0 == 0.0
    with pytest.raises(ValueError):
        DiscreteSignal(np.zeros((2, 2)), 1.0)
    with pytest.raises(ValueError):
        DiscreteSignal([1.0], -1.0)


@pytest.mark.parametrize("t, v", [(0.0, 1.0), (0.25, 0.5), (0.75, 0.0), (-0.5, 0.0)])
def test_hann_values(t, v):
    assert hann(t) == pytest.approx(v, abs=1e-15)


def test_hann_nonnegative_and_supported():
    t = np.linspace(-2, 2, 4001)
    h = hann(t)
    assert np.all(h >= 0)
    assert np.all(h[np.abs(t) > 0.5] == 0)


def test_hann_fourier_matches_quadrature():
    for z in [0.0, 0.3, 1.0, 2.7, -4.1]:
        re = quad(lambda t: hann(t) * np.cos(2 * np.pi * z * t), -0.5, 0.5, limit=200)[0]
        assert hann_fourier(z) == pytest.approx(re, abs=1e-12)
    assert hann_fourier(0.0) == pytest.approx(0.5)


def test_window_norms():
    assert HANN.l2sq == pytest.approx(0.375, abs=1e-10)
    assert HANN.l1 == pytest.approx(0.5, abs=1e-10)


def test_tabulated_window_fourier_matches_closed_form():
    w = Window(lambda t: 0.5 * (1 + np.cos(2 * np.pi * t)), name="hann-table")
    assert not w.has_closed_form
    z = np.linspace(-6, 6, 97)
    assert np.max(np.abs(w.fourier(z) - hann_fourier(z))) < 1e-4
    with pytest.raises(ValueError):
        Window(lambda t: t, name="odd")


def test_dft_impulse_is_flat():
    spec = dft(DiscreteSignal([1.0, 0, 0, 0], 4.0))
    assert np.allclose(np.abs(spec), 0.5)


def test_dft_roundtrip(rng):
    x = rng.normal(size=257) + 1j * rng.normal(size=257)
    s = DiscreteSignal(x, 100.0)
    back = idft(dft(s), 100.0)
    assert np.linalg.norm(back.samples - x) / np.linalg.norm(x) < 1e-12


def test_dft_pure_tone_single_bin():
    M, k = 64, 5
    n = np.arange(M)
    spec = dft(DiscreteSignal(np.exp(2j * np.pi * k * n / M), 64.0))
    nz = np.nonzero(np.abs(spec) > 1e-9)[0]
    assert list(nz) == [k]
    assert dft_frequencies(DiscreteSignal(np.zeros(M), 64.0))[k] == 5.0


def test_dft_empty():
    with pytest.raises(ValueError):
        dft(DiscreteSignal(np.zeros(0), 1.0))


def test_fourier_samples_of_tone():
    R, M = 100.0, 200
    t = np.arange(M) / R + 0.3
    s = DiscreteSignal(np.exp(2j * np.pi * 10 * t), R, 0.3)
    z, v = fourier_samples(s)
    k = np.argmin(np.abs(z - 10))
    assert abs(v[k]) == pytest.approx(M / R)


def test_inner_product_properties(rng):
    s = DiscreteSignal(rng.normal(size=50) + 1j * rng.normal(size=50), 10.0)
    assert inner_product(s, DiscreteSignal(np.zeros(50), 10.0)) == 0
    ss = inner_product(s, s)
    assert abs(ss.imag) < 1e-12
    assert ss.real == pytest.approx(energy(s))
    with pytest.raises(ValueError, match="rate mismatch"):
        inner_product(s, DiscreteSignal(np.zeros(50), 11.0))


def test_inner_product_with_offset_grids():
    a = DiscreteSignal([1.0, 2.0, 3.0, 4.0], 1.0, 0.0)
    b = DiscreteSignal([1.0, 1.0], 1.0, 2.0)
    assert inner_product(a, b) == pytest.approx(7.0)
    assert inner_product(a, DiscreteSignal([1.0], 1.0, 10.0)) == 0


def test_hann_self_inner_product_at_1000hz():
    t = np.arange(-500, 501) / 1000.0
    h = DiscreteSignal(hann(t), 1000.0, t[0])
    assert inner_product(h, h).real == pytest.approx(0.375, abs=1e-4)
