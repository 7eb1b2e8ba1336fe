"""Parsing of raw EEG CSVs, trial/response logs, and run configuration.

All loaders return immutable domain objects that the rest of the pipeline
treats as read-only. Rows with unparseable numeric fields are dropped and
counted, never interpolated.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

DEFAULT_CHANNELS = ("TP9", "AF7", "AF8", "TP10")
DEFAULT_SAMPLE_RATE = 256.0

CONDITION_FEEDBACK = "feedback"
CONDITION_NO_FEEDBACK = "no_feedback"
CONDITIONS = (CONDITION_FEEDBACK, CONDITION_NO_FEEDBACK)

RESPONSE_CORRECT = "correct"
RESPONSE_INCORRECT = "incorrect"
RESPONSES = (RESPONSE_CORRECT, RESPONSE_INCORRECT)


class IngestError(ValueError):
    """Base class for ingestion failures."""


class MissingColumn(IngestError):
    def __init__(self, column: str):
        super().__init__(f"missing required column: {column}")
        self.column = column


class NonMonotonicTimestamps(IngestError):
    pass


class EmptyFile(IngestError):
    pass


class OverlappingTrials(IngestError):
    def __init__(self, first: int, second: int):
        super().__init__(f"trials {first} and {second} overlap in time")
        self.pair = (first, second)


class UnknownConditionLabel(IngestError):
    pass


class InvalidValue(IngestError):
    def __init__(self, key: str, constraint: str):
        super().__init__(f"config key '{key}' violates constraint: {constraint}")
        self.key = key
        self.constraint = constraint


@dataclass(frozen=True)
class SignalRecording:
    """Multi-channel time series in microvolts.

    samples has shape (n_channels, n_samples); channel order matches
    `channels`. start_time is seconds relative to the session clock.
    """

    channels: tuple[str, ...]
    sample_rate: float
    samples: np.ndarray
    start_time: float = 0.0
    dropped_rows: int = 0
    gap_count: int = 0

    def __post_init__(self):
        if self.samples.ndim != 2 or self.samples.shape[0] != len(self.channels):
            raise ValueError("samples must be (n_channels, n_samples)")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("recording contains non-finite samples")

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> "SignalRecording":
        return replace(self, samples=samples)


@dataclass(frozen=True)
class TrialRecord:
    start: float
    end: float
    condition: str
    response: str


@dataclass(frozen=True)
class TrialLog:
    trials: tuple[TrialRecord, ...]

    def __post_init__(self):
        for i in range(len(self.trials) - 1):
            if self.trials[i].end > self.trials[i + 1].start:
                raise OverlappingTrials(i, i + 1)


@dataclass(frozen=True)
class UnitId:
    """One row of the downstream network model: a (participant, condition) pair."""

    participant: str
    condition: str

    def __post_init__(self):
        if not self.participant:
            raise ValueError("participant id must be non-empty")
        if self.condition not in CONDITIONS:
            raise UnknownConditionLabel(self.condition)


@dataclass(frozen=True)
class BandDefinition:
    name: str
    low: float
    high: float

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"band {self.name}: low must be < high")


DEFAULT_BANDS = (
    BandDefinition("delta", 1.0, 3.0),
    BandDefinition("theta", 4.0, 7.0),
    BandDefinition("alpha", 8.0, 13.0),
    BandDefinition("beta", 14.0, 30.0),
    BandDefinition("gamma", 31.0, 49.0),
)

BAND_NAMES = tuple(b.name for b in DEFAULT_BANDS)

#: Canonical code order used by every adjacency matrix and export.
CODES = BAND_NAMES + (RESPONSE_CORRECT, RESPONSE_INCORRECT)


@dataclass(frozen=True)
class PipelineConfig:
    bands: tuple[BandDefinition, ...] = DEFAULT_BANDS
    snr_threshold: float = 0.25
    majority_quorum: int = 3
    nona_window: int = 2
    welch_segments: int = 3
    welch_overlap: float = 0.5
    ica_enabled: bool = True
    notch_freq: float = 60.0
    bandpass_low: float = 1.0
    bandpass_high: float = 50.0
    epoch_length: float = 1.0
    normalization_mode: str = "epoch-count"
    rng_seed: int = 0
    alignment_offset: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.welch_overlap < 1.0:
            raise InvalidValue("welch_overlap", "0 < overlap < 1")
        if self.welch_segments < 2:
            raise InvalidValue("welch_segments", "≥ 2")
        if self.nona_window < 2:
            raise InvalidValue("nona_window", "≥ 2")
        if not 1 <= self.majority_quorum <= len(DEFAULT_CHANNELS):
            raise InvalidValue("majority_quorum", "1 ≤ quorum ≤ channel count")
        if not self.bandpass_low < self.bandpass_high:
            raise InvalidValue("bandpass", "low < high")
        if self.snr_threshold <= 0:
            raise InvalidValue("snr_threshold", "> 0")
        if self.epoch_length <= 0:
            raise InvalidValue("epoch_length", "> 0")
        if self.normalization_mode not in ("epoch-count", "entry-sum"):
            raise InvalidValue("normalization_mode", "epoch-count | entry-sum")


def read_eeg_csv(path, expected_rate: float = DEFAULT_SAMPLE_RATE) -> SignalRecording:
    """Parse a raw EEG CSV (header: timestamp,TP9,AF7,AF8,TP10).

    Channel columns may appear in any order; output channel order is
    canonical. Rows with unparseable numeric fields are dropped and
    counted. Timestamps must increase monotonically; gaps longer than
    two sample intervals are counted and reported as a warning.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(str(path))
        header = [h.strip() for h in header]
        if "timestamp" not in header:
            raise MissingColumn("timestamp")
        for ch in DEFAULT_CHANNELS:
            if ch not in header:
                raise MissingColumn(ch)
        col_idx = [header.index("timestamp")] + [header.index(ch) for ch in DEFAULT_CHANNELS]

        times: list[float] = []
        rows: list[list[float]] = []
        dropped = 0
        for raw in reader:
            if not raw or all(not c.strip() for c in raw):
                continue
            try:
                vals = [float(raw[i]) for i in col_idx]
            except (ValueError, IndexError):
                dropped += 1
                continue
            if not all(np.isfinite(vals)):
                dropped += 1
                continue
            times.append(vals[0])
            rows.append(vals[1:])

    if not rows:
        raise EmptyFile(str(path))

    t = np.asarray(times)
    if np.any(np.diff(t) <= 0):
        bad = int(np.argmax(np.diff(t) <= 0))
        raise NonMonotonicTimestamps(f"timestamp not increasing at row {bad + 1}")

    gap_limit = 2.0 / expected_rate
    gaps = int(np.sum(np.diff(t) > gap_limit))
    if gaps:
        warnings.warn(f"{path.name}: {gaps} gap(s) longer than 2 sample intervals")

    samples = np.asarray(rows).T
    return SignalRecording(
        channels=DEFAULT_CHANNELS,
        sample_rate=expected_rate,
        samples=samples,
        start_time=float(t[0]),
        dropped_rows=dropped,
        gap_count=gaps,
    )


def write_eeg_csv(path, rec: SignalRecording) -> None:
    """Inverse of read_eeg_csv; used for debug dumps and synthetic data."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("timestamp",) + tuple(rec.channels))
        t = rec.start_time + np.arange(rec.n_samples) / rec.sample_rate
        for i in range(rec.n_samples):
            w.writerow([f"{t[i]:.10g}"] + [f"{v:.10g}" for v in rec.samples[:, i]])


def read_trial_log(path) -> TrialLog:
    """Parse a trial log CSV (header: start,end,condition,response).

    Rows are sorted by start time; overlapping trials are rejected.
    Labels are case-insensitive.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyFile(str(path))
        fields = [f.strip().lower() for f in reader.fieldnames]
        for col in ("start", "end", "condition", "response"):
            if col not in fields:
                raise MissingColumn(col)
        trials = []
        for raw in reader:
            row = {k.strip().lower(): (v or "").strip() for k, v in raw.items() if k}
            if not row.get("start"):
                continue
            cond = row["condition"].lower()
            resp = row["response"].lower()
            if cond not in CONDITIONS:
                raise UnknownConditionLabel(cond)
            if resp not in RESPONSES:
                raise UnknownConditionLabel(resp)
            start, end = float(row["start"]), float(row["end"])
            if not start < end:
                raise IngestError(f"trial with start {start} ≥ end {end}")
            trials.append(TrialRecord(start, end, cond, resp))

    if not trials:
        raise EmptyFile(str(path))
    trials.sort(key=lambda tr: tr.start)
    return TrialLog(tuple(trials))


def write_trial_log(path, log: TrialLog) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("start", "end", "condition", "response"))
        for tr in log.trials:
            w.writerow([f"{tr.start:.10g}", f"{tr.end:.10g}", tr.condition, tr.response])


_CONFIG_TYPES = {
    "snr_threshold": float,
    "majority_quorum": int,
    "nona_window": int,
    "welch_segments": int,
    "welch_overlap": float,
    "notch_freq": float,
    "bandpass_low": float,
    "bandpass_high": float,
    "epoch_length": float,
    "normalization_mode": str,
    "rng_seed": int,
    "alignment_offset": float,
}


def load_config(path) -> PipelineConfig:
    """Load a flat key=value config file, applying defaults for absent keys.

    Unknown keys produce a warning, not an error. Band definitions may be
    overridden with e.g. ``band_alpha=8,13``.
    """
    kwargs: dict = {}
    bands = {b.name: b for b in DEFAULT_BANDS}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidValue(f"line {lineno}", "expected key=value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in _CONFIG_TYPES:
                conv = _CONFIG_TYPES[key]
                try:
                    kwargs[key] = conv(value)
                except ValueError:
                    raise InvalidValue(key, f"expected {conv.__name__}")
            elif key == "ica_enabled":
                if value.lower() not in ("true", "false", "0", "1"):
                    raise InvalidValue(key, "true | false")
                kwargs[key] = value.lower() in ("true", "1")
            elif key.startswith("band_") and key[5:] in bands:
                name = key[5:]
                try:
                    lo, hi = (float(v) for v in value.split(","))
                except ValueError:
                    raise InvalidValue(key, "expected low,high")
                bands[name] = BandDefinition(name, lo, hi)
            else:
                warnings.warn(f"unknown config key '{key}' ignored")
    kwargs["bands"] = tuple(bands[b.name] for b in DEFAULT_BANDS)
    return PipelineConfig(**kwargs)
