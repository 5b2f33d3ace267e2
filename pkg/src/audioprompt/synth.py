"""Deterministic synthetic audio: tone-coded "speech" and nine non-speech sound classes.

Each content token maps to a fixed sinusoid frequency, so a discrete Fourier
peak detector can recover token sequences exactly from clean waveforms. That
decoder is the ground-truth oracle the rest of the pipeline is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .vocabulary import Vocabulary, VocabularyError


class SynthConfigError(ValueError):
    """Invalid synthesis configuration (Nyquist bound, non-integer segment length, ...)."""


class FramingError(ValueError):
    """Waveform length is not a whole number of per-token segments."""


@dataclass(frozen=True)
class SynthConfig:
    sample_rate: int = 16000
    tone_duration: float = 0.25  # seconds per token
    base_frequency: float = 600.0
    frequency_step: float = 150.0  # Hz per token id
    amplitude: float = 0.8
    noise_std: float = 0.0
    clip_duration: float = 2.0  # seconds per non-speech clip

    @property
    def samples_per_token(self) -> int:
        return int(round(self.tone_duration * self.sample_rate))

    def validate(self, vocab_size: int) -> None:
        if not 0.0 < self.amplitude <= 1.0:
            raise SynthConfigError(f"amplitude must be in (0, 1], got {self.amplitude}")
        if self.noise_std < 0.0:
            raise SynthConfigError(f"noise_std must be >= 0, got {self.noise_std}")
        n = self.tone_duration * self.sample_rate
        if abs(n - round(n)) > 1e-9:
            raise SynthConfigError(
                f"tone_duration * sample_rate must be an integer, got {n}"
            )
        top = self.base_frequency + (vocab_size - 1) * self.frequency_step
        nyquist = self.sample_rate / 2
        if top >= nyquist:
            raise SynthConfigError(
                f"Nyquist violation: base_frequency + (vocab_size-1)*frequency_step = "
                f"{top:.1f} Hz must stay below sample_rate/2 = {nyquist:.1f} Hz"
            )

    def to_dict(self) -> dict:
        return {
            "sample_rate": self.sample_rate,
            "tone_duration": self.tone_duration,
            "base_frequency": self.base_frequency,
            "frequency_step": self.frequency_step,
            "amplitude": self.amplitude,
            "noise_std": self.noise_std,
            "clip_duration": self.clip_duration,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SynthConfig":
        return cls(**payload)

    def with_noise(self, noise_std: float) -> "SynthConfig":
        return replace(self, noise_std=noise_std)


def token_frequency(token_id: int, cfg: SynthConfig) -> float:
    return cfg.base_frequency + token_id * cfg.frequency_step


def synthesize_waveform(
    tokens: list[int],
    cfg: SynthConfig,
    vocab: Vocabulary,
    seed: int = 0,
) -> np.ndarray:
    """Concatenated per-token sinusoid segments, each starting at zero phase.

    Token id k plays at ``base_frequency + k * frequency_step`` for
    ``tone_duration`` seconds. Additive gaussian noise of ``noise_std`` is
    applied when nonzero; output is deterministic given (tokens, cfg, seed).
    """
    cfg.validate(len(vocab))
    for t in tokens:
        if not vocab.is_content(t):
            raise VocabularyError(
                f"token id {t} ({vocab.symbol_of(t) if 0 <= t < len(vocab) else 'out of range'}) "
                "is not a content token"
            )
    n = cfg.samples_per_token
    t_axis = np.arange(n, dtype=np.float64) / cfg.sample_rate
    segments = [
        cfg.amplitude * np.sin(2.0 * np.pi * token_frequency(tok, cfg) * t_axis)
        for tok in tokens
    ]
    wave = np.concatenate(segments) if segments else np.zeros(0, dtype=np.float64)
    if cfg.noise_std > 0.0 and wave.size:
        rng = np.random.default_rng(seed)
        wave = wave + rng.normal(0.0, cfg.noise_std, size=wave.shape)
    return wave


def dominant_frequency(segment: np.ndarray, sample_rate: int) -> float:
    """Frequency of the largest non-DC rfft magnitude bin."""
    spectrum = np.abs(np.fft.rfft(segment))
    spectrum[0] = 0.0  # DC carries no tone identity
    freqs = np.fft.rfftfreq(segment.size, d=1.0 / sample_rate)
    return float(freqs[int(np.argmax(spectrum))])


def oracle_decode(waveform: np.ndarray, cfg: SynthConfig, vocab: Vocabulary) -> list[int]:
    """Per-segment spectral-peak decoding back to token ids.

    All-zero segments map to the dedicated silence id, never to a content
    token. Raises FramingError unless the length is a whole number of
    segments.
    """
    cfg.validate(len(vocab))
    n = cfg.samples_per_token
    if waveform.size % n != 0:
        raise FramingError(
            f"waveform length {waveform.size} is not a multiple of the "
            f"{n}-sample token segment"
        )
    content = np.array(vocab.content_ids)
    content_freqs = np.array([token_frequency(i, cfg) for i in content])
    decoded: list[int] = []
    for k in range(waveform.size // n):
        segment = waveform[k * n : (k + 1) * n]
        if not np.any(segment):
            decoded.append(vocab.silence_id)
            continue
        peak = dominant_frequency(segment, cfg.sample_rate)
        decoded.append(int(content[np.argmin(np.abs(content_freqs - peak))]))
    return decoded


def silence(duration_s: float, cfg: SynthConfig) -> np.ndarray:
    return np.zeros(int(round(duration_s * cfg.sample_rate)), dtype=np.float64)


@dataclass(frozen=True)
class SoundClass:
    class_name: str
    target_word: str  # the verb-style answer
    generator_kind: str


SOUND_CLASSES: tuple[SoundClass, ...] = (
    SoundClass("upsweep", "rises", "chirp_up"),
    SoundClass("downsweep", "falls", "chirp_down"),
    SoundClass("noiseband", "hisses", "noise_band"),
    SoundClass("amtone", "warbles", "am_tone"),
    SoundClass("clicktrain", "ticks", "click_train"),
    SoundClass("puretone", "hums", "pure_tone"),
    SoundClass("squarewave", "buzzes", "square_wave"),
    SoundClass("harmonics", "rings", "harmonic_stack"),
    SoundClass("fmtone", "wobbles", "fm_wobble"),
)


def sound_class_by_name(name: str) -> SoundClass:
    for sc in SOUND_CLASSES:
        if sc.class_name == name:
            return sc
    raise KeyError(f"unknown sound class {name!r}; known: {[s.class_name for s in SOUND_CLASSES]}")


def _clip_axis(cfg: SynthConfig) -> np.ndarray:
    n = int(round(cfg.clip_duration * cfg.sample_rate))
    return np.arange(n, dtype=np.float64) / cfg.sample_rate


def synthesize_sound(sound: SoundClass | str, cfg: SynthConfig, seed: int = 0) -> np.ndarray:
    """One clip of the class's generator; deterministic given (class, cfg, seed)."""
    if isinstance(sound, str):
        sound = sound_class_by_name(sound)
    rng = np.random.default_rng((_class_index(sound), seed))
    t = _clip_axis(cfg)
    kind = sound.generator_kind
    if kind == "chirp_up":
        f0, f1 = 300.0 + rng.uniform(-30, 30), 2800.0 + rng.uniform(-100, 100)
        phase = 2.0 * np.pi * (f0 * t + (f1 - f0) * t**2 / (2.0 * cfg.clip_duration))
        wave = np.sin(phase)
    elif kind == "chirp_down":
        f0, f1 = 3200.0 + rng.uniform(-100, 100), 350.0 + rng.uniform(-30, 30)
        phase = 2.0 * np.pi * (f0 * t + (f1 - f0) * t**2 / (2.0 * cfg.clip_duration))
        wave = np.sin(phase)
    elif kind == "noise_band":
        lo, hi = 4200.0 + rng.uniform(-100, 100), 5600.0 + rng.uniform(-100, 100)
        white = rng.normal(0.0, 1.0, size=t.size)
        spectrum = np.fft.rfft(white)
        freqs = np.fft.rfftfreq(t.size, d=1.0 / cfg.sample_rate)
        spectrum[(freqs < lo) | (freqs > hi)] = 0.0
        wave = np.fft.irfft(spectrum, n=t.size)
        wave = wave / max(np.max(np.abs(wave)), 1e-12)
    elif kind == "am_tone":
        carrier = 1500.0 + rng.uniform(-50, 50)
        mod = 6.0 + rng.uniform(-1, 1)
        wave = (0.55 + 0.45 * np.sin(2.0 * np.pi * mod * t)) * np.sin(2.0 * np.pi * carrier * t)
    elif kind == "click_train":
        period = int(cfg.sample_rate / (10.0 + rng.uniform(-2, 2)))
        wave = np.zeros_like(t)
        wave[::period] = 1.0
    elif kind == "pure_tone":
        f = 250.0 + rng.uniform(-15, 15)
        wave = np.sin(2.0 * np.pi * f * t)
    elif kind == "square_wave":
        f = 500.0 + rng.uniform(-25, 25)
        wave = np.sign(np.sin(2.0 * np.pi * f * t))
    elif kind == "harmonic_stack":
        f = 350.0 + rng.uniform(-20, 20)
        wave = sum((0.5**k) * np.sin(2.0 * np.pi * (k + 1) * f * t) for k in range(4))
        wave = wave / np.max(np.abs(wave))
    elif kind == "fm_wobble":
        carrier = 2200.0 + rng.uniform(-60, 60)
        depth, rate = 400.0, 3.0 + rng.uniform(-0.5, 0.5)
        phase = 2.0 * np.pi * carrier * t - (depth / rate) * np.cos(2.0 * np.pi * rate * t)
        wave = np.sin(phase)
    else:
        raise KeyError(f"unknown generator kind {kind!r}")
    wave = cfg.amplitude * wave
    if cfg.noise_std > 0.0:
        wave = wave + rng.normal(0.0, cfg.noise_std, size=wave.shape)
    return wave


def _class_index(sound: SoundClass) -> int:
    for i, sc in enumerate(SOUND_CLASSES):
        if sc.class_name == sound.class_name:
            return i
    raise KeyError(f"sound class {sound.class_name!r} is not registered")
