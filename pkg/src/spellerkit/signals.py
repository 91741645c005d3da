"""Synthetic SSVEP trials and the preprocessing chain.

The synthesizer is the decoders' test oracle: occipital-like multichannel
trials built from a harmonic stimulus response mixed into channels plus
white or pink noise at a controlled SNR. Decoders never see any of this
machinery; they only consume :class:`EegTrial`.

Preprocessing resamples to 240 Hz and band-pass filters 7-70 Hz with a
zero-phase IIR (forward-backward), preserving the stimulus phase that the
reference templates encode.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .errors import InvalidBandCount, InvalidConfig, SampleRateTooLow
from .keyboard import StimulusSpec

#: Default electrode montage over parietal/occipital sites.
DEFAULT_CHANNELS = ("Pz", "PO1", "PO2", "POz", "PO4", "PO6", "Oz", "O1", "O2")

WORK_RATE = 240.0  # Hz, decoder-facing sample rate
BAND_LOW = 7.0
BAND_HIGH = 70.0
FILTER_ORDER = 4


@dataclass
class EegTrial:
    """C x T multichannel trial in microvolt-scale arbitrary units."""

    data: np.ndarray
    sample_rate: float

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise InvalidConfig("trial data must be a 2D channels x samples matrix")
        if not np.all(np.isfinite(self.data)):
            raise InvalidConfig("trial data must be finite")

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate


@dataclass(frozen=True)
class FilterSpec:
    """Band-pass specification; applied forward-backward when zero_phase."""

    low: float
    high: float
    order: int = FILTER_ORDER
    zero_phase: bool = True
    kind: str = "band-pass"

    def validate(self, sample_rate: float) -> None:
        if not 0 < self.low < self.high < sample_rate / 2:
            raise InvalidConfig(
                f"band [{self.low}, {self.high}] Hz invalid at fs={sample_rate} Hz"
            )


@dataclass
class SynthConfig:
    harmonics: int = 5
    snr_db: float | None = 0.0  # None means noiseless
    mixing: np.ndarray | None = None  # channels x harmonics, full rank
    noise_kind: str = "pink"
    duration: float = 1.5
    sample_rate: float = 1200.0
    n_channels: int = len(DEFAULT_CHANNELS)
    mixing_seed: int = field(default=12345, repr=False)

    def validate(self) -> None:
        if self.harmonics < 1:
            raise InvalidConfig("harmonics must be >= 1")
        if self.duration <= 0:
            raise InvalidConfig("duration must be positive")
        if self.sample_rate <= 0:
            raise InvalidConfig("sample_rate must be positive")
        if self.noise_kind not in ("white", "pink"):
            raise InvalidConfig(f"unknown noise kind {self.noise_kind!r}")
        m = self.resolved_mixing()
        if m.shape != (self.n_channels, self.harmonics):
            raise InvalidConfig(
                f"mixing must be {self.n_channels}x{self.harmonics}, got {m.shape}"
            )
        if np.linalg.matrix_rank(m) < min(m.shape):
            raise InvalidConfig("mixing matrix must be full rank")

    def resolved_mixing(self) -> np.ndarray:
        if self.mixing is not None:
            return np.asarray(self.mixing, dtype=float)
        return default_mixing(self.n_channels, self.harmonics, self.mixing_seed)


def default_mixing(n_channels: int, n_sources: int, seed: int) -> np.ndarray:
    """Deterministic full-rank forward model with unit-norm channel rows.

    Acts as one synthetic subject's scalp projection; hold it fixed across
    trials so template-based decoders see a consistent spatial pattern.
    """
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n_channels, n_sources))
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    return m


def harmonic_sources(stim: StimulusSpec, harmonics: int, n_samples: int,
                     sample_rate: float) -> np.ndarray:
    """Source matrix S (harmonics x T): s_h(t) = sin(2pi h f t + h phi) / h."""
    t = np.arange(n_samples) / sample_rate
    h = np.arange(1, harmonics + 1)[:, None]
    return np.sin(2 * np.pi * h * stim.frequency * t + h * stim.phase) / h


def _pink_noise(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    """1/f-power noise per channel via spectral shaping of white noise."""
    n = shape[1]
    white = rng.standard_normal(shape)
    spec = np.fft.rfft(white, axis=1)
    freqs = np.fft.rfftfreq(n)
    scale = np.zeros_like(freqs)
    scale[1:] = 1.0 / np.sqrt(freqs[1:])
    shaped = np.fft.irfft(spec * scale, n=n, axis=1)
    rms = np.sqrt(np.mean(shaped**2, axis=1, keepdims=True))
    return shaped / rms


def synth_trial(stim: StimulusSpec, cfg: SynthConfig, seed: int) -> EegTrial:
    """Deterministic synthetic trial: mixing @ sources + scaled noise.

    Noise is scaled so the clean-to-noise energy ratio across all channels
    equals ``cfg.snr_db``; ``snr_db=None`` (or +inf) yields the clean signal.
    """
    cfg.validate()
    n_samples = round(cfg.duration * cfg.sample_rate)
    sources = harmonic_sources(stim, cfg.harmonics, n_samples, cfg.sample_rate)
    clean = cfg.resolved_mixing() @ sources

    if cfg.snr_db is None or math.isinf(cfg.snr_db):
        return EegTrial(clean, cfg.sample_rate)

    rng = np.random.default_rng(seed)
    if cfg.noise_kind == "white":
        noise = rng.standard_normal(clean.shape)
    else:
        noise = _pink_noise(rng, clean.shape)

    e_signal = float(np.sum(clean**2))
    e_noise = float(np.sum(noise**2))
    target = 10.0 ** (cfg.snr_db / 10.0)
    alpha = math.sqrt(e_signal / (e_noise * target))
    return EegTrial(clean + alpha * noise, cfg.sample_rate)


def measure_snr_db(trial: EegTrial, stim: StimulusSpec, harmonics: int = 5) -> float:
    """Energy-ratio SNR estimate over the stimulus harmonic subspace.

    Projects each channel onto the sin/cos span of the stimulus harmonics;
    the out-of-subspace residual estimates the noise floor, and its expected
    leak into the subspace is subtracted from the signal-energy estimate.
    """
    n = trial.n_samples
    t = np.arange(n) / trial.sample_rate
    h = np.arange(1, harmonics + 1)[:, None]
    basis = np.vstack(
        [np.sin(2 * np.pi * h * stim.frequency * t), np.cos(2 * np.pi * h * stim.frequency * t)]
    )
    q, _ = np.linalg.qr(basis.T)  # T x d orthonormal
    d = q.shape[1]

    x = trial.data - trial.data.mean(axis=1, keepdims=True)
    coeffs = x @ q
    e_in = np.sum(coeffs**2, axis=1)
    e_tot = np.sum(x**2, axis=1)
    e_out = e_tot - e_in
    noise_var = e_out / max(n - 1 - d, 1)
    e_signal = np.maximum(e_in - noise_var * d, 1e-300)
    e_noise = np.maximum(noise_var * n, 1e-300)
    return 10.0 * math.log10(float(np.sum(e_signal) / np.sum(e_noise)))


def bandpass_sos(low: float, high: float, sample_rate: float, order: int = FILTER_ORDER):
    nyq = sample_rate / 2
    return sps.butter(order, [low / nyq, high / nyq], btype="bandpass", output="sos")


def apply_filter(data: np.ndarray, spec: FilterSpec, sample_rate: float) -> np.ndarray:
    """Apply a band-pass spec along the time axis."""
    spec.validate(sample_rate)
    sos = bandpass_sos(spec.low, spec.high, sample_rate, spec.order)
    if spec.zero_phase:
        return sps.sosfiltfilt(sos, data, axis=-1)
    return sps.sosfilt(sos, data, axis=-1)


def preprocess(trial: EegTrial) -> EegTrial:
    """Resample to 240 Hz then band-pass 7-70 Hz with zero phase.

    Uses a polyphase resampler (delay-compensated FIR) followed by a
    forward-backward Butterworth band-pass, so SSVEP phase is preserved.
    """
    if trial.sample_rate < 2 * WORK_RATE:
        raise SampleRateTooLow(
            f"sample rate {trial.sample_rate} Hz below required {2 * WORK_RATE:.0f} Hz"
        )
    ratio = Fraction(WORK_RATE / trial.sample_rate).limit_denominator(1000)
    resampled = sps.resample_poly(trial.data, ratio.numerator, ratio.denominator, axis=-1)
    filtered = apply_filter(
        resampled, FilterSpec(low=BAND_LOW, high=BAND_HIGH), WORK_RATE
    )
    return EegTrial(filtered, WORK_RATE)


def design_filter_bank(n_bands: int, sample_rate: float = WORK_RATE) -> list[FilterSpec]:
    """Sub-band m (1-based) passes [8*m, 70] Hz."""
    if n_bands < 1 or 8.0 * n_bands >= BAND_HIGH:
        raise InvalidBandCount(
            f"n_bands={n_bands} invalid: need 1 <= n and 8*n < {BAND_HIGH:.0f}"
        )
    if BAND_HIGH >= sample_rate / 2:
        raise InvalidBandCount(f"70 Hz band edge exceeds Nyquist at fs={sample_rate}")
    return [FilterSpec(low=8.0 * m, high=BAND_HIGH) for m in range(1, n_bands + 1)]


def save_trial(trial: EegTrial, basepath: str | Path,
               channels: tuple[str, ...] = DEFAULT_CHANNELS) -> None:
    """Write ``basepath.json`` (header) and ``basepath.csv`` (channel rows)."""
    base = Path(basepath)
    names = channels[: trial.n_channels]
    header = {
        "channels": list(names),
        "n_channels": trial.n_channels,
        "n_samples": trial.n_samples,
        "sample_rate": trial.sample_rate,
    }
    base.with_suffix(".json").write_text(json.dumps(header, indent=2))
    with base.with_suffix(".csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        for row in trial.data:
            writer.writerow([repr(float(v)) for v in row])


def load_trial(basepath: str | Path) -> EegTrial:
    base = Path(basepath)
    header = json.loads(base.with_suffix(".json").read_text())
    with base.with_suffix(".csv").open() as fh:
        data = np.array([[float(v) for v in row] for row in csv.reader(fh)])
    if data.shape != (header["n_channels"], header["n_samples"]):
        raise InvalidConfig(
            f"data shape {data.shape} disagrees with header "
            f"({header['n_channels']}, {header['n_samples']})"
        )
    return EegTrial(data, header["sample_rate"])
