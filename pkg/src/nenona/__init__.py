"""EEG band/performance co-occurrence networks.

Pipeline: raw multi-channel EEG + trial logs -> cleaned 1-second epochs ->
binary code vectors over five frequency bands and correct/incorrect ->
symmetric and directed co-occurrence networks per (participant, condition)
unit -> 2D SVD projection with co-registered node positions -> group
statistics and deterministic SVG diagrams.
"""

from .ingest import (
    CODES,
    BandDefinition,
    PipelineConfig,
    SignalRecording,
    TrialLog,
    UnitId,
    load_config,
    read_eeg_csv,
    read_trial_log,
)
from .preprocess import Epoch, FilterSpec, preprocess_recording
from .features import CodeVector, band_shares, majority_vote, snr_gate, welch_psd
from .network import (
    NetworkAccumulator,
    UnitVector,
    accumulate_directed,
    accumulate_symmetric,
    normalize,
)
from .projection import (
    GroupNetwork,
    NodeLayout,
    ProjectionModel,
    fit_projection,
    group_statistics,
    place_nodes,
)
from .stats import TestReport, cohens_d, welch_t_test
from .render import RenderSpec, render_directed, render_scatter, render_symmetric
from .synth import ActivationSchedule, CouplingSpec, generate_cohort, generate_recording
from .pipeline import run_all

__version__ = "0.1.0"
