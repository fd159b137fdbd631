import numpy as np
import pytest
from scipy.io import wavfile

from ltft.signal import DiscreteSignal
from ltft.wavio import WavFormatError, read_wav, write_wav


def test_silence(tmp_path):
    p = tmp_path / "s.wav"
    wavfile.write(p, 16000, np.zeros(16000, dtype=np.int16))
    (ch,), depth = read_wav(p)
    assert len(ch) == 16000 and ch.sample_rate == 16000 and depth == "pcm16"
    assert not np.any(ch.samples)


def test_pcm_scaling(tmp_path):
    p = tmp_path / "sq.wav"
    wavfile.write(p, 8000, np.array([32767, -32767] * 10, dtype=np.int16))
    (ch,), _ = read_wav(p)
    assert np.allclose(np.abs(ch.samples), 32767 / 32768)


@pytest.mark.parametrize("depth, lsb", [("pcm16", 1 / 32768), ("float32", 1e-7)])
def test_roundtrip(tmp_path, rng, depth, lsb):
    x = rng.uniform(-0.99, 0.99, 1000)
    p = tmp_path / "r.wav"
    assert write_wav(DiscreteSignal(x, 8000.0), p, depth) == 0
    (ch,), got = read_wav(p)
    assert got == depth
    assert np.max(np.abs(ch.samples - x)) <= lsb


def test_roundtrip_with_clipping(tmp_path):
    x = np.array([0.5, 1.5, -2.0, 0.0])
    p = tmp_path / "c.wav"
    with pytest.warns(UserWarning, match="2 samples clipped"):
        assert write_wav(DiscreteSignal(x, 8000.0), p) == 2
    (ch,), _ = read_wav(p)
    assert np.allclose(ch.samples, [0.5, 32767 / 32768, -1.0, 0.0], atol=1 / 32768)


def test_stereo(tmp_path, rng):
    x = rng.uniform(-0.5, 0.5, (500, 2)).astype(np.float32)
    p = tmp_path / "st.wav"
    wavfile.write(p, 8000, x)
    chans, depth = read_wav(p)
    assert len(chans) == 2 and depth == "float32"
    write_wav(chans, tmp_path / "o.wav", "float32")
    assert np.array_equal(wavfile.read(tmp_path / "o.wav")[1], x)


def test_unsupported_formats(tmp_path):
    p = tmp_path / "u8.wav"
    wavfile.write(p, 8000, np.zeros(10, dtype=np.uint8))
    with pytest.raises(WavFormatError, match="uint8"):
        read_wav(p)
    p = tmp_path / "i32.wav"
    wavfile.write(p, 8000, np.zeros(10, dtype=np.int32))
    with pytest.raises(WavFormatError, match="int32"):
        read_wav(p)
    garbage = tmp_path / "g.wav"
    garbage.write_bytes(b"not a wave file")
    with pytest.raises(WavFormatError):
        read_wav(garbage)
    with pytest.raises(WavFormatError, match="depth"):
        write_wav(DiscreteSignal([0.0], 8000.0), tmp_path / "x.wav", "pcm24")


def test_write_failure_leaves_no_file(tmp_path):
    with pytest.raises(OSError):
        write_wav(DiscreteSignal([0.0], 8000.0), tmp_path / "missing" / "x.wav")
    assert not (tmp_path / "missing").exists()
