"""End-to-end cohort study on synthetic data.

Generates a full synthetic cohort, runs every pipeline stage through the
same file interchange the CLI uses, and leaves the complete export tree
(CSV tables, statistics, eight SVG figures) in demos/output/.

Equivalent CLI session:
    nenona synth --out demos/output/input --participants 7 --seed 11
    nenona run --in demos/output/input --out demos/output/run --no-ica

Run: python3 demos/03_full_cohort.py
"""

from pathlib import Path

from nenona import pipeline
from nenona.ingest import PipelineConfig
from nenona.synth import CouplingSpec

out_root = Path(__file__).parent / "output"
in_dir = out_root / "input"
run_dir = out_root / "run"

# ---------------------------------------------------------------------------
# Synthesize the cohort: 7 participants, both conditions interleaved in one
# session each, written as the same CSV files a real headband export uses.
# ---------------------------------------------------------------------------
coupling = CouplingSpec(trials_per_condition=9)
paths = pipeline.stage_synth(in_dir, n_participants=7, coupling=coupling, seed=11)
print(f"wrote {len(paths)} participants to {in_dir}")

# ---------------------------------------------------------------------------
# Run all six stages. ICA is disabled: the synthetic tones carry no
# artifacts, and skipping it keeps the demo fast.
# ---------------------------------------------------------------------------
manifest = pipeline.run_all(in_dir, run_dir, config=PipelineConfig(ica_enabled=False))
print(f"stages completed: {', '.join(manifest['stages'])}")
for stage, ms in manifest["timings_ms"].items():
    print(f"  {stage:>10}: {ms:8.1f} ms")

# ---------------------------------------------------------------------------
# The summary collects the per-axis statistics for both network kinds.
# ---------------------------------------------------------------------------
print("\n" + (run_dir / "summary.txt").read_text())
print("figures:")
for svg in sorted((run_dir / "render").glob("*.svg")):
    print(f"  {svg}")
