import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ltft.frame import LTFTConfig, PhasePoint, PhasePoints, analyze, atom_support, atom_time
from ltft.frame_operator import FrameFilter, apply_frame_operator, apply_inverse_frame_operator
from ltft.sampling import build_envelope, sample
from ltft.signal import DiscreteSignal, TimeGrid, dft, energy, idft
from ltft.stochastic import soft_threshold, vocoder_nonlinearity
from ltft.vocoder import realify

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)
CFG = LTFTConfig(tau1=5, tau2=13, a=20, b=400)


@given(arrays(np.complex128, st.integers(1, 300), elements=cplx))
def test_dft_is_unitary(x):
    s = DiscreteSignal(x, 10.0)
    spec = dft(s)
    assert np.isclose(np.sum(np.abs(spec) ** 2), np.sum(np.abs(x) ** 2), rtol=1e-9, atol=1e-9)
    assert np.allclose(idft(spec, 10.0).samples, x, atol=1e-9 * (1 + np.max(np.abs(x))))


@given(cplx, st.integers(1, 8), st.integers(1, 8))
def test_nonlinearity_modulus_and_composition(z, d1, d2):
    out = vocoder_nonlinearity(z, d1)
    assert np.isclose(abs(out), abs(z), rtol=1e-12, atol=1e-12)
    twice = vocoder_nonlinearity(out, d2)
    if abs(z) > 1e-6:
        assert np.isclose(twice, vocoder_nonlinearity(z, d1 * d2), rtol=1e-9, atol=1e-9 * abs(z))


@given(cplx, st.floats(0, 100))
def test_soft_threshold_shrinks(z, lam):
    out = soft_threshold(z, lam)
    assert np.isclose(abs(out), max(0.0, abs(z) - lam), atol=1e-9)
    if abs(out) > 1e-9:
        assert np.isclose(out / abs(out), z / abs(z), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.05, 0.05), st.floats(-800, 800), st.floats(5, 13))
def test_atom_norm_is_constant(x, omega, tau):
    p = PhasePoint(x, omega, tau)
    R = 32000.0
    lo, hi = atom_support(p, CFG)
    grid = TimeGrid(lo - 0.005, R, int((hi - lo + 0.01) * R))
    assert abs(energy(atom_time(p, CFG, grid)) - 0.375) < 2e-4


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.01, 0.01), st.floats(30, 300), st.floats(5, 13), st.floats(-np.pi, np.pi))
def test_analysis_is_phase_covariant(x, omega, tau, phi):
    grid = TimeGrid(-0.5, 4000.0, 4000)
    s = DiscreteSignal.from_function(lambda t: np.cos(2 * np.pi * 50 * t) + 0.3 * np.sin(2 * np.pi * 170 * t), grid)
    p = PhasePoint(x, omega, tau)
    v = analyze(s, p, CFG)
    w = analyze(s.with_samples(s.samples * np.exp(1j * phi)), p, CFG)
    assert np.isclose(w, v * np.exp(1j * phi), rtol=1e-10, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.integers(2, 50), elements=st.floats(0.01, 10)),
       arrays(np.float64, 64, elements=st.floats(-10, 10)))
def test_inverse_filter_composition(vals, x):
    F = FrameFilter(np.linspace(0, 50, vals.size), vals, (0, 0))
    s = DiscreteSignal(x, 100.0)
    back = apply_inverse_frame_operator(apply_frame_operator(s, F), F)
    assert np.allclose(back.samples, x, atol=1e-9 * (1 + np.max(np.abs(x))))
    z = np.linspace(-60, 60, 101)
    assert np.all((F(z) >= F.A) & (F(z) <= F.B))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5000), st.integers(0, 10_000), st.integers(0, 2 ** 31))
def test_sampling_prefix_and_bounds(M, K, seed):
    env = build_envelope(M, 1000.0, CFG)
    pts = sample(env, K, seed)
    assert len(pts) == K
    assert np.all(env.contains(pts))
    k = K // 3
    head = sample(env, k, seed)
    assert np.array_equal(head.x, pts.x[:k]) and np.array_equal(head.tau, pts.tau[:k])


@given(arrays(np.complex128, st.integers(1, 50), elements=cplx), arrays(np.complex128, 50, elements=cplx))
def test_realify_is_real_linear(x, y):
    y = y[:x.size]
    a, b = DiscreteSignal(x, 1.0), DiscreteSignal(y, 1.0)
    lhs = realify(DiscreteSignal(x + 2 * y, 1.0)).samples
    assert np.allclose(lhs, realify(a).samples + 2 * realify(b).samples, atol=1e-9)
