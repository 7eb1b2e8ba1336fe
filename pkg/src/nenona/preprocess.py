"""Raw recording -> clean 1-second epochs.

Fixed processing order: average reference, 60 Hz notch, 1-50 Hz band-pass,
epoch segmentation, optional ICA artifact rejection. Filters are applied
forward-backward for zero phase.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps
from scipy.stats import kurtosis

from .ingest import PipelineConfig, SignalRecording


class PreprocessError(ValueError):
    pass


class SingleChannel(PreprocessError):
    pass


class UnstableFilter(PreprocessError):
    pass


class TooShort(PreprocessError):
    pass


class InsufficientData(PreprocessError):
    pass


class IcaConvergenceWarning(UserWarning):
    """ICA hit the iteration cap; pipeline proceeds with unmixed data."""


@dataclass(frozen=True)
class Epoch:
    """One fixed-length segment of the cleaned recording.

    channels has shape (n_channels, samples_per_epoch); time_span is the
    half-open [start, end) interval in recording time.
    """

    index: int
    channels: np.ndarray
    time_span: tuple[float, float]

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.time_span[0] + self.time_span[1])


@dataclass(frozen=True)
class FilterSpec:
    kind: str  # "notch" | "bandpass"
    center_or_band: float | tuple[float, float]
    order: int = 4
    q_factor: float = 30.0
    zero_phase: bool = True

    def __post_init__(self):
        if self.kind not in ("notch", "bandpass"):
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if self.kind == "bandpass" and (self.order < 2 or self.order % 2):
            raise ValueError("band-pass order must be even and ≥ 2")
        if self.q_factor <= 0:
            raise ValueError("q_factor must be > 0")


@dataclass(frozen=True)
class IcaReport:
    rejected: tuple[int, ...]
    kurtosis: tuple[float, ...]
    converged: bool


def average_reference(rec: SignalRecording) -> SignalRecording:
    """Subtract the cross-channel mean at every sample instant."""
    if len(rec.channels) < 2:
        raise SingleChannel("average reference needs ≥ 2 channels")
    return rec.with_samples(rec.samples - rec.samples.mean(axis=0, keepdims=True))


def _design(spec: FilterSpec, fs: float):
    if spec.kind == "notch":
        return sps.iirnotch(spec.center_or_band, spec.q_factor, fs=fs)
    low, high = spec.center_or_band
    return sps.butter(spec.order // 2, (low, high), btype="bandpass", fs=fs)


def apply_filter(rec: SignalRecording, spec: FilterSpec) -> SignalRecording:
    """Zero-phase (forward-backward) IIR filtering, per channel."""
    if rec.n_samples <= 3 * spec.order:
        raise TooShort("recording shorter than 3 × filter order")
    b, a = _design(spec, rec.sample_rate)
    if np.any(np.abs(np.roots(a)) >= 1.0):
        raise UnstableFilter(f"{spec.kind} filter has poles outside the unit circle")
    if spec.zero_phase:
        out = sps.filtfilt(b, a, rec.samples, axis=1)
    else:
        out = sps.lfilter(b, a, rec.samples, axis=1)
    return rec.with_samples(out)


def segment_epochs(rec: SignalRecording, epoch_length: float = 1.0) -> list[Epoch]:
    """Cut the recording into contiguous fixed-length epochs.

    Trailing partial data is discarded, never zero-padded (padding would
    bias downstream PSD estimates).
    """
    n_per = round(epoch_length * rec.sample_rate)
    n_epochs = rec.n_samples // n_per
    if n_epochs < 1:
        raise TooShort(f"recording shorter than one epoch ({epoch_length} s)")
    epochs = []
    for k in range(n_epochs):
        seg = rec.samples[:, k * n_per : (k + 1) * n_per]
        t0 = rec.start_time + k * epoch_length
        epochs.append(Epoch(index=k, channels=seg, time_span=(t0, t0 + epoch_length)))
    return epochs


def concatenate_epochs(epochs: list[Epoch]) -> np.ndarray:
    return np.concatenate([e.channels for e in epochs], axis=1)


def ica_clean(epochs: list[Epoch], config: PipelineConfig,
              kurtosis_threshold: float = 5.0) -> tuple[list[Epoch], IcaReport]:
    """Reject high-kurtosis independent components from concatenated epochs.

    The decomposition is fit once per recording on the concatenated data
    (a single 256-sample epoch is too short for a stable 4-component
    unmixing). Components with |excess kurtosis| above the threshold are
    zeroed before reconstruction. On non-convergence the input is passed
    through unchanged with an IcaConvergenceWarning.
    """
    if not config.ica_enabled:
        return epochs, IcaReport((), (), True)
    if not epochs:
        return epochs, IcaReport((), (), True)
    n_ch = epochs[0].channels.shape[0]
    if n_ch < 4:
        raise InsufficientData("ICA needs ≥ 4 channels")
    data = concatenate_epochs(epochs)  # (n_ch, n_samples)
    if data.shape[1] < 20 * n_ch * n_ch:
        raise InsufficientData(
            f"need ≥ {20 * n_ch * n_ch} samples for a stable {n_ch}-component fit"
        )

    from sklearn.decomposition import FastICA
    from sklearn.exceptions import ConvergenceWarning

    ica = FastICA(
        n_components=n_ch,
        algorithm="parallel",
        fun="logcosh",
        max_iter=500,
        tol=1e-5,
        whiten="unit-variance",
        random_state=config.rng_seed,
    )
    converged = True
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sources = ica.fit_transform(data.T)  # (n_samples, n_ch)
    for w in caught:
        if issubclass(w.category, ConvergenceWarning):
            converged = False
    if not converged:
        warnings.warn("ICA did not converge; keeping unmixed data", IcaConvergenceWarning)
        return epochs, IcaReport((), (), False)

    kurt = kurtosis(sources, axis=0, fisher=True)
    rejected = tuple(int(i) for i in np.flatnonzero(np.abs(kurt) > kurtosis_threshold))
    cleaned_sources = sources.copy()
    for i in rejected:
        cleaned_sources[:, i] = 0.0
    clean = ica.inverse_transform(cleaned_sources).T  # (n_ch, n_samples)

    n_per = epochs[0].channels.shape[1]
    out = []
    for e in epochs:
        seg = clean[:, e.index * n_per : (e.index + 1) * n_per]
        out.append(Epoch(index=e.index, channels=seg, time_span=e.time_span))
    return out, IcaReport(rejected, tuple(float(k) for k in kurt), True)


def preprocess_recording(rec: SignalRecording, config: PipelineConfig
                         ) -> tuple[list[Epoch], IcaReport]:
    """Full chain: re-reference, notch, band-pass, epoch, ICA."""
    rec = average_reference(rec)
    rec = apply_filter(rec, FilterSpec("notch", config.notch_freq))
    rec = apply_filter(rec, FilterSpec("bandpass", (config.bandpass_low, config.bandpass_high)))
    epochs = segment_epochs(rec, config.epoch_length)
    return ica_clean(epochs, config)
