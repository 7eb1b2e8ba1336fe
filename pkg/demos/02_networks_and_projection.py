"""Code sequences to networks to a 2D map.

Builds symmetric (NENA) and directed (NONA) networks from a small cohort's
code vectors, normalizes them into unit vectors, projects the units with
SVD, and co-registers the code nodes into the same plane.

Run: python3 demos/02_networks_and_projection.py
"""

import numpy as np

from nenona import network
from nenona.features import encode_recording
from nenona.ingest import CODES, PipelineConfig
from nenona.network import DIRECTED, SYMMETRIC, unflatten
from nenona.preprocess import preprocess_recording
from nenona.projection import fit_projection, place_nodes
from nenona.synth import CouplingSpec, generate_cohort

config = PipelineConfig(ica_enabled=False)

# ---------------------------------------------------------------------------
# Five participants, both conditions each. The coupling ties {beta, gamma}
# to correct feedback trials and {theta, alpha} to incorrect no-feedback
# trials, which is the structure the projection should expose.
# ---------------------------------------------------------------------------
coupling = CouplingSpec(trials_per_condition=9)
vectors = []
for pid, recording, trials in generate_cohort(5, coupling, seed=7):
    epochs, _ = preprocess_recording(recording, config)
    vecs, _ = encode_recording(epochs, trials, config, pid)
    vectors.extend(vecs)
print(f"encoded {len(vectors)} epochs across 5 participants x 2 conditions")

# ---------------------------------------------------------------------------
# Accumulate one network per (participant, condition) unit, for both kinds.
# ---------------------------------------------------------------------------
for kind in (SYMMETRIC, DIRECTED):
    accs = network.accumulate_units(vectors, kind, window=config.nona_window)
    unit_vecs = [network.normalize(a, config.normalization_mode) for a in accs]
    print(f"\n[{kind}] {len(unit_vecs)} unit vectors of length "
          f"{unit_vecs[0].values.size}")

    # strongest average connection, as a sanity check on the coupling
    mean_w = np.mean([unflatten(v) for v in unit_vecs], axis=0)
    np.fill_diagonal(mean_w, 0.0)
    i, j = np.unravel_index(np.argmax(mean_w), mean_w.shape)
    print(f"  strongest mean edge: {CODES[i]} -> {CODES[j]} "
          f"({mean_w[i, j]:.3f} per epoch)")

    # SVD projection: units become points, conditions should separate on SVD1
    model = fit_projection(unit_vecs)
    v1, v2 = 100 * model.variance_explained[:2]
    print(f"  variance explained: SVD1 {v1:.1f}%, SVD2 {v2:.1f}%")
    for condition in ("feedback", "no_feedback"):
        pts = model.unit_points[[u.condition == condition for u in model.units], 0]
        print(f"  SVD1 {condition:>11}: mean {pts.mean():+.3f}, sd {pts.std(ddof=1):.3f}")

    # node co-registration: code positions whose weighted centroids best
    # approximate the unit points, so nodes and units share one plane
    layout = place_nodes(model, unit_vecs)
    print(f"  node layout residual: {layout.residual:.2e}")
    for code, (x, y) in zip(CODES, layout.positions):
        print(f"    {code:>9}: ({x:+.3f}, {y:+.3f})")
