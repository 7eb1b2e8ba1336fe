"""Epoch -> binary code vector over {delta..gamma, correct, incorrect}.

Per channel: averaged-periodogram PSD (Hamming-windowed overlapping
segments), band-share integration, SNR gating. Channels are consolidated
by majority vote and trial labels attached by epoch midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import (
    BAND_NAMES,
    CODES,
    BandDefinition,
    PipelineConfig,
    TrialLog,
    UnitId,
)
from .preprocess import Epoch


class FeatureError(ValueError):
    pass


class InvalidSegmentation(FeatureError):
    pass


class TooShort(FeatureError):
    pass


class ZeroTotalPower(FeatureError):
    pass


@dataclass(frozen=True)
class PsdEstimate:
    frequencies: np.ndarray
    power: np.ndarray  # density, µV²/Hz
    resolution: float


@dataclass(frozen=True)
class CodeVector:
    epoch_index: int
    codes: tuple[int, ...]  # aligned with ingest.CODES
    unit: UnitId

    def active(self) -> tuple[str, ...]:
        return tuple(c for c, v in zip(CODES, self.codes) if v)


def segment_starts(n_total: int, n_seg: int, segments: int) -> list[int]:
    """Segment start offsets: evenly spread, last segment flush with the end."""
    if segments == 1:
        return [0]
    return [round(i * (n_total - n_seg) / (segments - 1)) for i in range(segments)]


def welch_psd(epoch_channel: np.ndarray, sample_rate: float,
              segments: int = 3, overlap: float = 0.5) -> PsdEstimate:
    """Averaged-periodogram PSD of one epoch channel.

    Segment length n solves N = n + (segments-1)*(1-overlap)*n and is
    rounded down; the final segment shifts to end flush with the epoch so
    exactly `segments` periodograms are averaged. Each segment is
    Hamming-windowed; density scaling compensates the window power so the
    one-sided integral over [0, Nyquist] equals the signal's mean square.
    """
    x = np.asarray(epoch_channel, dtype=float)
    n_total = x.size
    if segments < 2:
        raise InvalidSegmentation("need ≥ 2 segments")
    n_seg = int(n_total / (1.0 + (segments - 1) * (1.0 - overlap)))
    if n_seg < 8:
        raise TooShort(f"epoch of {n_total} samples too short for {segments} segments")
    starts = segment_starts(n_total, n_seg, segments)
    if starts[-1] + n_seg > n_total:
        raise InvalidSegmentation("segments exceed the epoch")

    window = np.hamming(n_seg)
    scale = 1.0 / (sample_rate * np.sum(window**2))
    psd = np.zeros(n_seg // 2 + 1)
    for s in starts:
        seg = x[s : s + n_seg] * window
        spec = np.abs(np.fft.rfft(seg)) ** 2 * scale
        # one-sided: double everything except DC (and Nyquist when present)
        if n_seg % 2 == 0:
            spec[1:-1] *= 2.0
        else:
            spec[1:] *= 2.0
        psd += spec
    psd /= segments

    freqs = np.fft.rfftfreq(n_seg, d=1.0 / sample_rate)
    return PsdEstimate(frequencies=freqs, power=psd, resolution=float(freqs[1]))


def _integrate(freqs: np.ndarray, power: np.ndarray, lo: float, hi: float) -> float:
    """Trapezoidal integral of the PSD over [lo, hi], interpolating endpoints."""
    lo = max(lo, float(freqs[0]))
    hi = min(hi, float(freqs[-1]))
    if hi <= lo:
        return 0.0
    inner = freqs[(freqs > lo) & (freqs < hi)]
    grid = np.concatenate(([lo], inner, [hi]))
    vals = np.interp(grid, freqs, power)
    return float(np.trapezoid(vals, grid))


def band_shares(psd: PsdEstimate, bands: tuple[BandDefinition, ...],
                total_range: tuple[float, float] = (1.0, 50.0)) -> dict[str, float]:
    """Per-band fraction of the total power over the analysis range.

    Bins in inter-band gaps count toward the total only, so shares sum
    to at most 1.
    """
    total = _integrate(psd.frequencies, psd.power, *total_range)
    if total <= 0.0:
        raise ZeroTotalPower("PSD integrates to zero over the analysis range")
    return {b.name: _integrate(psd.frequencies, psd.power, b.low, b.high) / total
            for b in bands}


def snr_gate(shares: dict[str, float], threshold: float) -> dict[str, bool]:
    """Binarize shares: present iff share/(1-share) ≥ threshold."""
    out = {}
    for name, share in shares.items():
        if share >= 1.0:
            out[name] = True
        else:
            out[name] = share / (1.0 - share) >= threshold
    return out


def majority_vote(per_channel_presence: np.ndarray, quorum: int) -> np.ndarray:
    """Consolidate a (channels × bands) 0/1 matrix into one row.

    A band is present iff at least `quorum` channels voted present; a
    2-2 tie with the default quorum of 3 resolves to absent.
    """
    votes = np.asarray(per_channel_presence, dtype=int)
    return (votes.sum(axis=0) >= quorum).astype(int)


def encode_epoch(epoch: Epoch, config: PipelineConfig) -> np.ndarray:
    """Per-band binary presence for one epoch (bands only, no labels)."""
    n_ch = epoch.channels.shape[0]
    fs = epoch.channels.shape[1] / (epoch.time_span[1] - epoch.time_span[0])
    presence = np.zeros((n_ch, len(config.bands)), dtype=int)
    for c in range(n_ch):
        psd = welch_psd(epoch.channels[c], sample_rate=fs,
                        segments=config.welch_segments, overlap=config.welch_overlap)
        try:
            shares = band_shares(psd, config.bands,
                                 total_range=(config.bandpass_low, config.bandpass_high))
        except ZeroTotalPower:
            continue  # silent channel: votes absent for every band
        gated = snr_gate(shares, config.snr_threshold)
        presence[c] = [int(gated[b.name]) for b in config.bands]
    return majority_vote(presence, config.majority_quorum)


def attach_labels(epochs: list[Epoch], presences: np.ndarray, trials: TrialLog,
                  participant: str, alignment_offset: float = 0.0
                  ) -> tuple[list[CodeVector], int]:
    """Attach correct/incorrect labels by epoch midpoint.

    An epoch whose midpoint falls inside a trial's half-open [start, end)
    gets that trial's response code and the trial's condition in its unit
    id. Epochs outside all trials are dropped; the drop count is returned.
    """
    out: list[CodeVector] = []
    dropped = 0
    for epoch, bands in zip(epochs, presences):
        mid = epoch.midpoint + alignment_offset
        trial = next((t for t in trials.trials if t.start <= mid < t.end), None)
        if trial is None:
            dropped += 1
            continue
        correct = int(trial.response == "correct")
        codes = tuple(int(v) for v in bands) + (correct, 1 - correct)
        out.append(CodeVector(epoch_index=epoch.index, codes=codes,
                              unit=UnitId(participant, trial.condition)))
    return out, dropped


def encode_recording(epochs: list[Epoch], trials: TrialLog, config: PipelineConfig,
                     participant: str) -> tuple[list[CodeVector], int]:
    """Full feature chain for one cleaned recording."""
    presences = np.array([encode_epoch(e, config) for e in epochs])
    return attach_labels(epochs, presences, trials, participant,
                         alignment_offset=config.alignment_offset)


def code_table_rows(vectors: list[CodeVector]) -> list[list]:
    """Rows for the interchange code-table CSV."""
    rows = []
    for v in vectors:
        rows.append([v.unit.participant, v.unit.condition, v.epoch_index, *v.codes])
    return rows


CODE_TABLE_HEADER = ["participant", "condition", "epoch_index", *BAND_NAMES,
                     "correct", "incorrect"]
