"""Synthetic EEG with a known band-activation schedule.

Used as the ground-truth oracle for end-to-end validation: every epoch's
active bands and response label are chosen up front, the corresponding
sinusoids are synthesized at band-center frequencies, and the expected
code-vector sequence is returned alongside the signal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import CodeVector
from .ingest import (
    BAND_NAMES,
    CONDITION_FEEDBACK,
    CONDITION_NO_FEEDBACK,
    DEFAULT_CHANNELS,
    DEFAULT_SAMPLE_RATE,
    SignalRecording,
    TrialLog,
    TrialRecord,
    UnitId,
)

#: Band-center tone frequencies (midpoints of the default band edges),
#: chosen for maximal margin from the band boundaries under filtering.
BAND_CENTER_HZ = {
    "delta": 2.0,
    "theta": 5.5,
    "alpha": 10.5,
    "beta": 22.0,
    "gamma": 40.0,
}


class SynthError(ValueError):
    pass


class InvalidSchedule(SynthError):
    pass


class InvalidCoupling(SynthError):
    pass


@dataclass(frozen=True)
class EpochPlan:
    active_bands: frozenset[str]
    trial_index: int
    response: str  # correct | incorrect
    condition: str


@dataclass(frozen=True)
class ActivationSchedule:
    plan: tuple[EpochPlan, ...]
    amplitude_active: float = 10.0
    amplitude_background: float = 0.0
    noise_sd: float = 0.0
    seed: int = 0
    # (epoch_index, band) -> channel indices where the band tone is omitted
    dropout: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.amplitude_active <= self.amplitude_background:
            raise InvalidSchedule("active amplitude must exceed background amplitude")
        if self.amplitude_background < 0:
            raise InvalidSchedule("background amplitude must be ≥ 0")
        for p in self.plan:
            unknown = p.active_bands - set(BAND_NAMES)
            if unknown:
                raise InvalidSchedule(f"unknown bands {sorted(unknown)}")
        for prev, cur in zip(self.plan, self.plan[1:]):
            if prev.trial_index == cur.trial_index and (
                    prev.response != cur.response
                    or prev.condition != cur.condition):
                raise InvalidSchedule(
                    f"trial {cur.trial_index} mixes responses or conditions")


def generate_recording(schedule: ActivationSchedule,
                       channels: int = len(DEFAULT_CHANNELS),
                       sample_rate: float = DEFAULT_SAMPLE_RATE,
                       participant: str = "synthetic",
                       ) -> tuple[SignalRecording, TrialLog, list[CodeVector]]:
    """Synthesize a recording, its trial log, and the expected code vectors.

    Per epoch: one sinusoid at band center per active band (amplitude_active)
    plus one per inactive band (amplitude_background, 0 disables), plus
    seeded Gaussian noise. A base phase is redrawn per epoch per band and
    offset by c * 2*pi/n_channels on channel c, so each tone's cross-channel
    mean is exactly zero and average referencing leaves the per-channel
    tones untouched. Dropout removes a band's tone from specific channels.

    Expected code vectors are guaranteed recoverable only for epochs with
    at least one active band: a tone-free epoch contains only broadband
    residue (noise and boundary transients), and under a relative SNR gate
    the widest bands can exceed the share cut on broadband content alone.
    """
    if not schedule.plan:
        raise InvalidSchedule("empty epoch plan")
    rng = np.random.default_rng(schedule.seed)
    n_per = int(sample_rate)  # 1-second epochs
    t = np.arange(n_per) / sample_rate

    segments = []
    for e_idx, plan in enumerate(schedule.plan):
        epoch = np.zeros((channels, n_per))
        for band in BAND_NAMES:
            active = band in plan.active_bands
            amp = schedule.amplitude_active if active else schedule.amplitude_background
            phase = rng.uniform(0.0, 2.0 * np.pi)
            if amp <= 0.0:
                continue
            dropped = schedule.dropout.get((e_idx, band), ())
            for c in range(channels):
                if c in dropped:
                    continue
                shift = phase + 2.0 * np.pi * c / channels
                epoch[c] += amp * np.sin(
                    2.0 * np.pi * BAND_CENTER_HZ[band] * t + shift)
        if schedule.noise_sd > 0.0:
            epoch += rng.normal(0.0, schedule.noise_sd, size=epoch.shape)
        segments.append(epoch)

    samples = np.concatenate(segments, axis=1)
    rec = SignalRecording(channels=tuple(DEFAULT_CHANNELS[:channels]),
                          sample_rate=sample_rate, samples=samples)

    trials = []
    expected = []
    for e_idx, plan in enumerate(schedule.plan):
        correct = int(plan.response == "correct")
        codes = tuple(int(b in plan.active_bands) for b in BAND_NAMES) + (correct, 1 - correct)
        expected.append(CodeVector(epoch_index=e_idx, codes=codes,
                                   unit=UnitId(participant, plan.condition)))
    # one trial per contiguous run of equal trial_index
    start = 0
    for e_idx in range(1, len(schedule.plan) + 1):
        if e_idx == len(schedule.plan) or schedule.plan[e_idx].trial_index != schedule.plan[start].trial_index:
            p = schedule.plan[start]
            trials.append(TrialRecord(float(start), float(e_idx), p.condition, p.response))
            start = e_idx

    return rec, TrialLog(tuple(trials)), expected


@dataclass(frozen=True)
class CouplingSpec:
    """Condition-specific band/response coupling used by generate_cohort.

    Condition A (feedback) epochs activate {beta, gamma} with probability
    p_high on correct trials; condition B (no feedback) epochs activate
    {theta, alpha} with probability p_high on incorrect trials. Everything
    else activates at the baseline rate p_low.
    """

    p_high: float = 0.9
    p_low: float = 0.1
    correct_rate_a: float = 0.7
    correct_rate_b: float = 0.3
    trials_per_condition: int = 18
    epochs_per_trial: int = 4
    amplitude_active: float = 10.0
    noise_sd: float = 0.5

    def __post_init__(self):
        for name in ("p_high", "p_low", "correct_rate_a", "correct_rate_b"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidCoupling(f"{name} must be in [0, 1]")


_COUPLED_BANDS = {
    CONDITION_FEEDBACK: ("beta", "gamma"),
    CONDITION_NO_FEEDBACK: ("theta", "alpha"),
}
_COUPLED_RESPONSE = {
    CONDITION_FEEDBACK: "correct",
    CONDITION_NO_FEEDBACK: "incorrect",
}


def _participant_schedule(coupling: CouplingSpec, rng: np.random.Generator,
                          seed: int) -> ActivationSchedule:
    plan: list[EpochPlan] = []
    trial_index = 0
    # conditions interleave trial blocks, mirroring a counterbalanced session
    order = [CONDITION_FEEDBACK, CONDITION_NO_FEEDBACK]
    for k in range(coupling.trials_per_condition):
        for cond in order:
            correct_rate = (coupling.correct_rate_a if cond == CONDITION_FEEDBACK
                            else coupling.correct_rate_b)
            response = "correct" if rng.random() < correct_rate else "incorrect"
            for _ in range(coupling.epochs_per_trial):
                active = set()
                for band in BAND_NAMES:
                    if (band in _COUPLED_BANDS[cond]
                            and response == _COUPLED_RESPONSE[cond]):
                        p = coupling.p_high
                    else:
                        p = coupling.p_low
                    if rng.random() < p:
                        active.add(band)
                plan.append(EpochPlan(frozenset(active), trial_index, response, cond))
            trial_index += 1
    return ActivationSchedule(
        plan=tuple(plan),
        amplitude_active=coupling.amplitude_active,
        amplitude_background=0.0,
        noise_sd=coupling.noise_sd,
        seed=seed,
    )


def generate_cohort(n_participants: int, coupling: CouplingSpec = CouplingSpec(),
                    seed: int = 0) -> list[tuple[str, SignalRecording, TrialLog]]:
    """Per-participant recordings with both conditions in one session.

    Each participant's trial log interleaves feedback and no-feedback
    trials, so downstream label attachment yields two units per
    participant. Seeds derive deterministically from (seed, index).
    """
    if n_participants < 3:
        raise InvalidCoupling("need at least 3 participants")
    cohort = []
    for i in range(n_participants):
        sub_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        rng = np.random.default_rng(sub_seed)
        schedule = _participant_schedule(coupling, rng, seed=sub_seed + 1)
        pid = f"P{i + 1:02d}"
        rec, log, _ = generate_recording(schedule, participant=pid)
        cohort.append((pid, rec, log))
    return cohort
