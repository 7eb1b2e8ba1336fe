"""From raw oscillations to binary codes.

Walks one synthetic recording through the spectral half of the pipeline:
band-center tones -> preprocessing -> Welch band shares -> SNR gate ->
per-channel votes -> one binary code vector per epoch.

Run: python3 demos/01_spectral_coding.py
"""

import numpy as np

from nenona.features import band_shares, encode_recording, welch_psd
from nenona.ingest import CODES, DEFAULT_BANDS, PipelineConfig
from nenona.preprocess import preprocess_recording
from nenona.synth import ActivationSchedule, EpochPlan, generate_recording

# ---------------------------------------------------------------------------
# Plan four 1-second epochs by hand. Each epoch activates a known set of
# bands, so we know exactly which codes the encoder should recover.
# ---------------------------------------------------------------------------
plan = (
    EpochPlan(frozenset({"alpha"}), 0, "correct", "feedback"),
    EpochPlan(frozenset({"beta", "gamma"}), 0, "correct", "feedback"),
    EpochPlan(frozenset({"theta"}), 1, "incorrect", "feedback"),
    EpochPlan(frozenset({"delta", "alpha"}), 1, "incorrect", "feedback"),
)
schedule = ActivationSchedule(plan=plan, noise_sd=0.5, seed=1)
recording, trials, expected = generate_recording(schedule, participant="demo")
print(f"recording: {recording.samples.shape[0]} channels x "
      f"{recording.samples.shape[1]} samples at {recording.sample_rate:g} Hz")

# ---------------------------------------------------------------------------
# Preprocess: average reference, 60 Hz notch, 1-50 Hz band-pass, epoching.
# ICA is skipped here; pure tones carry no artifacts worth removing.
# ---------------------------------------------------------------------------
config = PipelineConfig(ica_enabled=False)
epochs, _ = preprocess_recording(recording, config)

# ---------------------------------------------------------------------------
# Welch PSD and band shares for the first epoch, one channel. The planned
# alpha tone should dominate the share table.
# ---------------------------------------------------------------------------
psd = welch_psd(epochs[0].channels[0], recording.sample_rate)
shares = band_shares(psd, DEFAULT_BANDS)
print("\nepoch 0 band shares (channel TP9):")
for name, share in shares.items():
    bar = "#" * int(40 * share)
    print(f"  {name:>5}  {share:6.3f}  {bar}")

# ---------------------------------------------------------------------------
# Full encoding: gate each channel's shares, take the majority vote across
# channels, then attach correct/incorrect from the trial log.
# ---------------------------------------------------------------------------
vectors, dropped = encode_recording(epochs, trials, config, "demo")
print(f"\nencoded {len(vectors)} epochs ({dropped} dropped outside trials)")
print(f"{'epoch':>5}  {'  '.join(f'{c:>9}' for c in CODES)}")
for got, want in zip(vectors, expected):
    row = "  ".join(f"{v:>9}" for v in got.codes)
    flag = "" if got.codes == want.codes else "   <- differs from plan"
    print(f"{got.epoch_index:>5}  {row}{flag}")

recovered = sum(got.codes == want.codes for got, want in zip(vectors, expected))
print(f"\nrecovered {recovered}/{len(expected)} planned code vectors exactly")
assert recovered == len(expected)
