from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cogspeech.dsp import (
    AudioBuffer,
    DenoiseConfig,
    denoise,
    denoise_with_stats,
    frame_energy,
    read_wav,
    vad,
    write_wav,
)

SR = 16000


def tone(duration_s: float, freq: float = 220.0, amplitude: float = 0.3) -> np.ndarray:
    t = np.arange(int(duration_s * SR)) / SR
    return amplitude * np.sin(2 * np.pi * freq * t)


def silence(duration_s: float) -> np.ndarray:
    return np.zeros(int(duration_s * SR))


def buf(*chunks: np.ndarray) -> AudioBuffer:
    return AudioBuffer(samples=np.concatenate(chunks), sample_rate=SR)


class TestFrameEnergy:
    def test_all_zero_audio_hits_floor(self):
        series = frame_energy(buf(silence(1.0)))
        assert np.all(series.energies == -120.0)

    def test_constant_unit_amplitude_is_zero_db(self):
        series = frame_energy(AudioBuffer(samples=np.ones(SR), sample_rate=SR))
        assert np.allclose(series.energies, 0.0, atol=1e-9)

    def test_frame_count_formula(self):
        series = frame_energy(buf(silence(1.0)), frame_ms=25, hop_ms=10)
        assert len(series.energies) == 98  # 1 + (16000 - 400) // 160

    def test_too_short_audio_rejected(self):
        with pytest.raises(ValueError, match="shorter than one"):
            frame_energy(AudioBuffer(samples=np.zeros(100), sample_rate=SR))

    def test_hop_larger_than_frame_rejected(self):
        with pytest.raises(ValueError, match="frame_ms >= hop_ms"):
            frame_energy(buf(silence(1.0)), frame_ms=10, hop_ms=25)


class TestVad:
    def test_all_silence_yields_no_intervals(self):
        seg = vad(buf(silence(2.0)))
        assert seg.speech_intervals == ()
        assert seg.total_duration_s == pytest.approx(2.0)

    def test_tone_silence_tone_two_intervals(self):
        seg = vad(buf(tone(1.0), silence(0.5), tone(1.0)))
        assert len(seg.speech_intervals) == 2
        (s0, e0), (s1, e1) = seg.speech_intervals
        assert abs(s0 - 0.0) < 0.05
        assert abs(e0 - 1.0) < 0.05
        assert abs(s1 - 1.5) < 0.05
        assert abs(e1 - 2.5) < 0.05

    def test_short_gap_is_bridged(self):
        seg = vad(buf(tone(1.0), silence(0.1), tone(1.0)))
        assert len(seg.speech_intervals) == 1

    def test_short_blip_dropped(self):
        # 50 ms of tone is below the 100 ms minimum speech duration.
        seg = vad(buf(silence(1.0), tone(0.05), silence(1.0)))
        assert seg.speech_intervals == ()

    @settings(max_examples=20, deadline=None)
    @given(gain=st.floats(min_value=0.05, max_value=20.0))
    def test_gain_invariance(self, gain):
        audio = buf(tone(0.8, 180.0), silence(0.4), tone(0.6, 240.0), silence(0.5))
        scaled = AudioBuffer(samples=audio.samples * gain, sample_rate=SR)
        assert vad(audio).speech_intervals == vad(scaled).speech_intervals


class TestDenoise:
    def test_pure_speech_is_identity(self):
        audio = buf(tone(2.0))
        out = denoise(audio)
        assert np.array_equal(out.samples, audio.samples)

    def test_injected_tone_burst_attenuated(self):
        # 60 ms burst at -3 dB RMS: below min speech duration, so unvoiced.
        burst = tone(0.06, freq=1000.0, amplitude=10 ** (-3 / 20) * np.sqrt(2))
        audio = buf(silence(1.0), burst, silence(1.0))
        before = frame_energy(audio).energies
        out = denoise(audio, DenoiseConfig(seed=5))
        after = frame_energy(out).energies
        assert len(out.samples) == len(audio.samples)
        loud_frames = before > -40.0
        assert loud_frames.any()
        assert np.all(before[loud_frames] - after[loud_frames] >= 20.0)

    def test_speech_frames_bit_identical(self):
        burst = tone(0.06, freq=1000.0, amplitude=0.7)
        audio = buf(tone(1.0), silence(0.5), burst, silence(0.5))
        out, n_replaced = denoise_with_stats(audio, DenoiseConfig(seed=1))
        assert n_replaced >= 1
        seg = vad(audio)
        assert len(seg.speech_intervals) == 1
        start, end = seg.speech_intervals[0]
        lo, hi = int(start * SR), int(end * SR)
        assert np.array_equal(out.samples[lo:hi], audio.samples[lo:hi])

    def test_replaced_region_rms_not_above_original(self):
        burst = tone(0.06, freq=1000.0, amplitude=0.7)
        audio = buf(silence(1.0), burst, silence(1.0))
        out = denoise(audio, DenoiseConfig(seed=3))
        changed = out.samples != audio.samples
        assert changed.any()
        rms = lambda x: np.sqrt(np.mean(x**2))
        assert rms(out.samples[changed]) <= rms(audio.samples[changed])

    def test_seeded_noise_is_deterministic(self):
        burst = tone(0.06, freq=1000.0, amplitude=0.7)
        audio = buf(silence(1.0), burst, silence(1.0))
        cfg = DenoiseConfig(seed=42)
        assert np.array_equal(denoise(audio, cfg).samples, denoise(audio, cfg).samples)

    def test_zero_unvoiced_frames_is_identity(self):
        # Everything is one long speech interval: nothing to replace.
        audio = buf(tone(1.5, 200.0))
        out, n = denoise_with_stats(audio)
        assert n == 0
        assert np.array_equal(out.samples, audio.samples)


class TestWavIo:
    def test_roundtrip(self, tmp_path):
        audio = buf(tone(0.25), silence(0.1))
        path = tmp_path / "x.wav"
        write_wav(path, audio)
        back = read_wav(path)
        assert back.sample_rate == SR
        assert len(back.samples) == len(audio.samples)
        assert np.max(np.abs(back.samples - audio.samples)) < 1e-4  # 16-bit quantization

    def test_rejects_stereo(self, tmp_path):
        import wave

        path = tmp_path / "stereo.wav"
        with wave.open(str(path), "wb") as wf:
            wf.setnchannels(2)
            wf.setsampwidth(2)
            wf.setframerate(SR)
            wf.writeframes(b"\x00\x00\x00\x00" * 100)
        with pytest.raises(ValueError, match="mono"):
            read_wav(path)
