"""Audio framing, energy analysis, energy-based noise removal, and VAD.

All operations are pure and seeded, so a recording can be processed in
parallel with any other. Energies are log-RMS in dB with a floor at
-120 dB (the energy of the 1e-6 RMS floor), which keeps log10 defined on
digital silence.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "AudioBuffer",
    "FrameEnergySeries",
    "VadSegmentation",
    "DenoiseConfig",
    "VadConfig",
    "read_wav",
    "write_wav",
    "frame_energy",
    "denoise",
    "vad",
]

ENERGY_FLOOR_DB = -120.0
_RMS_FLOOR = 1e-6


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio samples in [-1, 1] at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"expected mono 1-D samples, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("audio contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class FrameEnergySeries:
    """Per-frame log-RMS energies (dB), floored at -120 dB."""

    frame_ms: float
    hop_ms: float
    energies: np.ndarray


@dataclass(frozen=True)
class VadSegmentation:
    """Sorted, non-overlapping speech intervals within [0, total_duration]."""

    speech_intervals: tuple[tuple[float, float], ...]
    total_duration_s: float

    def __post_init__(self) -> None:
        prev_end = 0.0
        for start, end in self.speech_intervals:
            if start < prev_end - 1e-9 or end <= start:
                raise ValueError(f"intervals not sorted/disjoint at ({start}, {end})")
            if end > self.total_duration_s + 1e-9:
                raise ValueError(f"interval ({start}, {end}) exceeds duration")
            prev_end = end


@dataclass(frozen=True)
class VadConfig:
    """Energy-based VAD parameters.

    A frame becomes a speech candidate when its energy exceeds the noise
    floor estimate (the ``noise_quantile`` energy percentile) by
    ``onset_db``; the threshold is additionally capped at the midrange of
    the frame energies, which keeps speech-dense recordings (where the
    percentile would land inside the speech mode) segmentable. Candidate
    runs separated by less than ``hangover_ms`` are merged, intervals
    shorter than ``min_speech_ms`` dropped, then remaining gaps shorter
    than ``min_pause_ms`` bridged.
    """

    frame_ms: float = 25.0
    hop_ms: float = 10.0
    onset_db: float = 6.0
    noise_quantile: float = 0.20
    hangover_ms: float = 90.0
    min_speech_ms: float = 100.0
    min_pause_ms: float = 150.0


@dataclass(frozen=True)
class DenoiseConfig:
    """Loud-noise suppression parameters.

    Unvoiced frames louder than the median unvoiced energy plus
    ``margin_db`` are replaced by Gaussian noise whose RMS equals the
    ``floor_quantile`` quantile of unvoiced frame RMS.
    """

    frame_ms: float = 25.0
    hop_ms: float = 10.0
    margin_db: float = 15.0
    floor_quantile: float = 0.10
    seed: int = 0
    vad: VadConfig = field(default_factory=VadConfig)


def read_wav(path: Path | str) -> AudioBuffer:
    """Read a PCM 16-bit mono WAV file into floats in [-1, 1]."""
    with wave.open(str(path), "rb") as wf:
        if wf.getnchannels() != 1:
            raise ValueError(f"{path}: expected mono audio, got {wf.getnchannels()} channels")
        if wf.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM, got {8 * wf.getsampwidth()}-bit")
        raw = wf.readframes(wf.getnframes())
        rate = wf.getframerate()
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return AudioBuffer(samples=samples, sample_rate=rate)


def write_wav(path: Path | str, audio: AudioBuffer) -> None:
    """Write audio as PCM 16-bit mono WAV."""
    pcm = np.clip(np.round(audio.samples * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(audio.sample_rate)
        wf.writeframes(pcm.tobytes())


def _frame_bounds(n_samples: int, sample_rate: int, frame_ms: float, hop_ms: float):
    frame = int(round(frame_ms * sample_rate / 1000.0))
    hop = int(round(hop_ms * sample_rate / 1000.0))
    if hop <= 0 or frame < hop:
        raise ValueError(f"need frame_ms >= hop_ms > 0, got frame={frame_ms}, hop={hop_ms}")
    if n_samples < frame:
        raise ValueError(f"audio ({n_samples} samples) shorter than one {frame}-sample frame")
    n_frames = 1 + (n_samples - frame) // hop
    return frame, hop, n_frames


def _frame_rms(samples: np.ndarray, frame: int, hop: int, n_frames: int) -> np.ndarray:
    idx = np.arange(frame)[None, :] + hop * np.arange(n_frames)[:, None]
    return np.sqrt(np.mean(samples[idx] ** 2, axis=1))


def frame_energy(audio: AudioBuffer, frame_ms: float = 25.0, hop_ms: float = 10.0) -> FrameEnergySeries:
    """Compute per-frame log-RMS energy in dB.

    The series has ``1 + floor((N - frame) / hop)`` entries and each value
    is ``20 * log10(max(rms, 1e-6))``, so digital silence maps to exactly
    -120 dB.

    Raises:
        ValueError: audio shorter than one frame, or invalid frame/hop.
    """
    frame, hop, n_frames = _frame_bounds(len(audio.samples), audio.sample_rate, frame_ms, hop_ms)
    rms = _frame_rms(audio.samples, frame, hop, n_frames)
    energies = 20.0 * np.log10(np.maximum(rms, _RMS_FLOOR))
    return FrameEnergySeries(frame_ms=frame_ms, hop_ms=hop_ms, energies=energies)


def vad(audio: AudioBuffer, cfg: VadConfig | None = None) -> VadSegmentation:
    """Segment audio into speech intervals with an adaptive energy threshold.

    The threshold is relative to the signal's own energy percentile, so the
    segmentation is invariant under global gain changes (as long as no
    frame is clamped by the -120 dB floor). All-silence audio yields an
    empty interval list.
    """
    cfg = cfg or VadConfig()
    series = frame_energy(audio, cfg.frame_ms, cfg.hop_ms)
    energies = series.energies
    noise_floor = float(np.quantile(energies, cfg.noise_quantile))
    # The midrange cap matters when speech dominates the recording and the
    # noise-floor percentile falls inside the speech mode. Both terms move
    # 1:1 under global gain, so gain invariance is unaffected.
    midrange = float(energies.min() + energies.max()) / 2.0
    threshold = min(noise_floor + cfg.onset_db, midrange)
    candidates = energies > threshold

    frame_s = cfg.frame_ms / 1000.0
    hop_s = cfg.hop_ms / 1000.0
    duration = audio.duration_s

    runs = _candidate_runs(candidates)
    intervals = [(i * hop_s, min(j * hop_s + frame_s, duration)) for i, j in runs]
    intervals = _merge_gaps(intervals, cfg.hangover_ms / 1000.0)
    intervals = [(s, e) for s, e in intervals if e - s >= cfg.min_speech_ms / 1000.0]
    intervals = _merge_gaps(intervals, cfg.min_pause_ms / 1000.0)
    return VadSegmentation(speech_intervals=tuple(intervals), total_duration_s=duration)


def _candidate_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Contiguous True runs as (first_index, last_index) pairs."""
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def _merge_gaps(intervals: list[tuple[float, float]], max_gap_s: float) -> list[tuple[float, float]]:
    """Merge consecutive intervals whose gap is strictly below ``max_gap_s``."""
    merged: list[tuple[float, float]] = []
    for start, end in intervals:
        if merged and start - merged[-1][1] < max_gap_s:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def denoise(audio: AudioBuffer, cfg: DenoiseConfig | None = None) -> AudioBuffer:
    """Replace loud unvoiced frames with low-energy Gaussian noise.

    Frames that lie entirely outside VAD speech intervals and exceed the
    median unvoiced energy by ``cfg.margin_db`` are overwritten with
    seeded Gaussian noise whose RMS equals the ``cfg.floor_quantile``
    quantile of unvoiced frame RMS. Every other sample is bit-identical to
    the input, and the output has the input's length. With zero unvoiced
    frames this is the identity.
    """
    cfg = cfg or DenoiseConfig()
    replaced, _ = denoise_with_stats(audio, cfg)
    return replaced


def denoise_with_stats(audio: AudioBuffer, cfg: DenoiseConfig | None = None) -> tuple[AudioBuffer, int]:
    """As :func:`denoise`, also returning the number of replaced frames."""
    cfg = cfg or DenoiseConfig()
    frame, hop, n_frames = _frame_bounds(
        len(audio.samples), audio.sample_rate, cfg.frame_ms, cfg.hop_ms
    )
    seg = vad(audio, cfg.vad)
    rms = _frame_rms(audio.samples, frame, hop, n_frames)
    energies = 20.0 * np.log10(np.maximum(rms, _RMS_FLOOR))

    starts = hop * np.arange(n_frames)
    sr = audio.sample_rate
    voiced = np.zeros(n_frames, dtype=bool)
    for iv_start, iv_end in seg.speech_intervals:
        lo = int(np.floor(iv_start * sr))
        hi = int(np.ceil(iv_end * sr))
        # Any overlap with a speech interval protects the frame.
        voiced |= (starts < hi) & (starts + frame > lo)

    unvoiced = ~voiced
    if not unvoiced.any():
        return audio, 0

    median_unvoiced = float(np.median(energies[unvoiced]))
    loud = unvoiced & (energies > median_unvoiced + cfg.margin_db)
    if not loud.any():
        return audio, 0

    floor_rms = float(np.quantile(rms[unvoiced], cfg.floor_quantile))

    # Replaced sample set: union of loud-frame spans, minus speech intervals.
    mask = np.zeros(len(audio.samples), dtype=bool)
    for i in np.flatnonzero(loud):
        mask[starts[i] : starts[i] + frame] = True
    for iv_start, iv_end in seg.speech_intervals:
        lo = int(np.floor(iv_start * sr))
        hi = int(np.ceil(iv_end * sr))
        mask[lo:hi] = False

    rng = np.random.default_rng(cfg.seed)
    out = audio.samples.copy()
    out[mask] = rng.normal(0.0, floor_rms, size=int(mask.sum()))
    return AudioBuffer(samples=out, sample_rate=audio.sample_rate), int(loud.sum())
