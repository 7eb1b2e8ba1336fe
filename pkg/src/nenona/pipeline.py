"""Stage orchestration and the file interchange formats between stages.

Every stage reads the previous stage's documented CSV export and writes
its own, so stages can be run individually (or replaced by external
tools) and composed runs are byte-identical to a monolithic one.
"""

from __future__ import annotations

import csv
import json
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import features, network, preprocess, projection, render, stats, synth
from .features import CODE_TABLE_HEADER, CodeVector
from .ingest import (
    CODES,
    PipelineConfig,
    SignalRecording,
    TrialLog,
    UnitId,
    load_config,
    read_eeg_csv,
    read_trial_log,
    write_eeg_csv,
    write_trial_log,
)
from .network import DIRECTED, SYMMETRIC, NetworkAccumulator, UnitVector
from .render import RenderSpec


class SchemaMismatch(ValueError):
    def __init__(self, path, expected, found):
        super().__init__(f"{path}: expected columns {expected}, found {found}")


class StageError(RuntimeError):
    def __init__(self, stage: str, detail: str):
        super().__init__(f"stage '{stage}': {detail}")
        self.stage = stage


STAGES = ("preprocess", "features", "accumulate", "project", "stats", "render")


# ---------------------------------------------------------------- interchange

def write_code_table(path, vectors: list[CodeVector]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CODE_TABLE_HEADER)
        for row in features.code_table_rows(vectors):
            w.writerow(row)


def read_code_table(path) -> list[CodeVector]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CODE_TABLE_HEADER:
            raise SchemaMismatch(path, CODE_TABLE_HEADER, header)
        out = []
        for row in reader:
            if not row:
                continue
            participant, condition, epoch_index = row[0], row[1], int(row[2])
            codes = tuple(int(v) for v in row[3:10])
            out.append(CodeVector(epoch_index, codes, UnitId(participant, condition)))
    return out


def write_adjacency(path, acc: NetworkAccumulator) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([""] + list(acc.codes))
        for i, code in enumerate(acc.codes):
            w.writerow([code] + [f"{v:.10g}" for v in acc.weights[i]])


def read_adjacency(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header[1:]) != CODES:
            raise SchemaMismatch(path, list(CODES), header)
        rows = [row[1:] for row in reader if row]
    return np.array(rows, dtype=float)


MANIFEST_HEADER = ["participant", "condition", "kind", "update_count", "file"]


def write_network_manifest(path, entries: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=MANIFEST_HEADER)
        w.writeheader()
        for e in entries:
            w.writerow(e)


def read_network_manifest(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != MANIFEST_HEADER:
            raise SchemaMismatch(path, MANIFEST_HEADER, reader.fieldnames)
        return [dict(r) for r in reader]


def load_unit_vectors(networks_dir, kind: str, mode: str) -> list[UnitVector]:
    """Rebuild normalized unit vectors from exported adjacency files."""
    networks_dir = Path(networks_dir)
    entries = read_network_manifest(networks_dir / "manifest.csv")
    vectors = []
    for e in entries:
        if e["kind"] != kind:
            continue
        weights = read_adjacency(networks_dir / e["file"])
        acc = NetworkAccumulator(kind, CODES, weights,
                                 UnitId(e["participant"], e["condition"]),
                                 int(e["update_count"]))
        vectors.append(network.normalize(acc, mode))
    return vectors


def write_points(path, units, points: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["participant", "condition", "svd1", "svd2"])
        for unit, p in zip(units, points):
            w.writerow([unit.participant, unit.condition, f"{p[0]:.12g}", f"{p[1]:.12g}"])


def read_points(path) -> tuple[tuple[UnitId, ...], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["participant", "condition", "svd1", "svd2"]:
            raise SchemaMismatch(path, ["participant", "condition", "svd1", "svd2"], header)
        units, pts = [], []
        for row in reader:
            if not row:
                continue
            units.append(UnitId(row[0], row[1]))
            pts.append([float(row[2]), float(row[3])])
    return tuple(units), np.array(pts)


def write_layout(path, layout: projection.NodeLayout) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["code", "x", "y"])
        for code, (x, y) in zip(CODES, layout.positions):
            w.writerow([code, f"{x:.12g}", f"{y:.12g}"])


def read_layout(path) -> projection.NodeLayout:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["code", "x", "y"]:
            raise SchemaMismatch(path, ["code", "x", "y"], header)
        pos = {row[0]: (float(row[1]), float(row[2])) for row in reader if row}
    return projection.NodeLayout(np.array([pos[c] for c in CODES]), residual=0.0)


def write_keyvalues(path, values: dict) -> None:
    with open(path, "w") as fh:
        for k, v in values.items():
            fh.write(f"{k}={v}\n")


# -------------------------------------------------------------------- stages

def stage_synth(out_dir, n_participants: int = 11,
                coupling: synth.CouplingSpec | None = None, seed: int = 0
                ) -> list[tuple[str, Path, Path]]:
    """Write synthetic EEG + trial-log CSVs in the standard ingest formats."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    coupling = coupling or synth.CouplingSpec()
    cohort = synth.generate_cohort(n_participants, coupling, seed=seed)
    paths = []
    for pid, rec, log in cohort:
        eeg = out_dir / f"{pid}_eeg.csv"
        trials = out_dir / f"{pid}_trials.csv"
        write_eeg_csv(eeg, rec)
        write_trial_log(trials, log)
        paths.append((pid, eeg, trials))
    return paths


def discover_participants(in_dir) -> list[tuple[str, Path, Path]]:
    """Pair `<pid>_eeg.csv` with `<pid>_trials.csv` in a directory."""
    in_dir = Path(in_dir)
    out = []
    for eeg in sorted(in_dir.glob("*_eeg.csv")):
        pid = eeg.name[: -len("_eeg.csv")]
        trials = in_dir / f"{pid}_trials.csv"
        if not trials.exists():
            raise StageError("preprocess", f"missing trial log for participant {pid}")
        out.append((pid, eeg, trials))
    if not out:
        raise StageError("preprocess", f"no *_eeg.csv files in {in_dir}")
    return out


def stage_preprocess(participants: list[tuple[str, Path, Path]],
                     config: PipelineConfig, out_dir, jobs: int = 1,
                     debug_dump: bool = False) -> list[tuple[str, Path, Path]]:
    """Clean each recording and write it back in the EEG CSV format."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(item):
        pid, eeg_path, trials_path = item
        rec = read_eeg_csv(eeg_path)
        epochs, report = preprocess.preprocess_recording(rec, config)
        clean = SignalRecording(rec.channels, rec.sample_rate,
                                preprocess.concatenate_epochs(epochs),
                                start_time=rec.start_time)
        if debug_dump:
            reref = preprocess.average_reference(rec)
            write_eeg_csv(out_dir / f"{pid}.reref.csv", reref)
            filt = preprocess.apply_filter(
                preprocess.apply_filter(reref, preprocess.FilterSpec("notch", config.notch_freq)),
                preprocess.FilterSpec("bandpass", (config.bandpass_low, config.bandpass_high)))
            write_eeg_csv(out_dir / f"{pid}.filt.csv", filt)
        clean_path = out_dir / f"{pid}_clean.csv"
        write_eeg_csv(clean_path, clean)
        if report.rejected:
            warnings.warn(f"{pid}: rejected ICA components {report.rejected}")
        return pid, clean_path, trials_path

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, participants))
    return [one(item) for item in participants]


def stage_features(participants: list[tuple[str, Path, Path]],
                   config: PipelineConfig, out_dir, jobs: int = 1) -> Path:
    """Encode cleaned recordings into the code-table CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(item):
        pid, clean_path, trials_path = item
        rec = read_eeg_csv(clean_path)
        trials = read_trial_log(trials_path)
        epochs = preprocess.segment_epochs(rec, config.epoch_length)
        vectors, dropped = features.encode_recording(epochs, trials, config, pid)
        if dropped:
            warnings.warn(f"{pid}: {dropped} epoch(s) outside all trials dropped")
        return vectors

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, participants))
    else:
        results = [one(item) for item in participants]
    all_vectors = [v for vecs in results for v in vecs]
    path = out_dir / "code_table.csv"
    write_code_table(path, all_vectors)
    return path


def stage_accumulate(code_table: Path, config: PipelineConfig, out_dir,
                     window: int | None = None) -> Path:
    """Accumulate both network kinds per unit; export adjacency + manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vectors = read_code_table(code_table)
    window = window or config.nona_window
    entries = []
    for kind, tag in ((SYMMETRIC, "nena"), (DIRECTED, "nona")):
        for acc in network.accumulate_units(vectors, kind, window=window):
            fname = f"{tag}_{acc.unit.participant}_{acc.unit.condition}.csv"
            write_adjacency(out_dir / fname, acc)
            entries.append({"participant": acc.unit.participant,
                            "condition": acc.unit.condition,
                            "kind": kind,
                            "update_count": acc.update_count,
                            "file": fname})
    write_network_manifest(out_dir / "manifest.csv", entries)
    return out_dir / "manifest.csv"


def stage_project(networks_dir, config: PipelineConfig, out_dir) -> dict[str, Path]:
    """Fit projections per kind; export points, layout, and variance."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    for kind in (SYMMETRIC, DIRECTED):
        vectors = load_unit_vectors(networks_dir, kind, config.normalization_mode)
        model = projection.fit_projection(vectors)
        layout = projection.place_nodes(model, vectors)
        write_points(out_dir / f"points_{kind}.csv", model.units, model.unit_points)
        write_layout(out_dir / f"layout_{kind}.csv", layout)
        write_keyvalues(out_dir / f"variance_{kind}.txt", {
            "svd1_variance_explained": f"{model.variance_explained[0]:.12g}",
            "svd2_variance_explained": f"{model.variance_explained[1] if model.variance_explained.size > 1 else 0.0:.12g}",
            "layout_residual": f"{layout.residual:.12g}",
        })
        written[kind] = out_dir / f"points_{kind}.csv"
    return written


def stage_stats(projection_dir, out_dir, alpha: float = 0.05) -> dict[str, Path]:
    """Welch t-test + Cohen's d per SVD axis, per network kind."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    for kind in (SYMMETRIC, DIRECTED):
        units, pts = read_points(Path(projection_dir) / f"points_{kind}.csv")
        labels = sorted({u.condition for u in units})
        if len(labels) != 2:
            raise StageError("stats", f"need exactly 2 conditions, found {labels}")
        lines = []
        kv = {}
        for dim, name in enumerate(("SVD1", "SVD2")):
            a = pts[[u.condition == labels[0] for u in units], dim]
            b = pts[[u.condition == labels[1] for u in units], dim]
            report = stats.welch_t_test(a, b, alpha=alpha, dimension=name)
            lines.append(stats.format_report(report))
            for key, val in (("t", report.t_statistic), ("df", report.degrees_of_freedom),
                             ("p", report.p_value), ("d", report.cohens_d)):
                kv[f"{name.lower()}_{key}"] = f"{val:.12g}"
            kv[f"{name.lower()}_significant"] = str(report.significant).lower()
        txt = out_dir / f"stats_{kind}.txt"
        txt.write_text(f"groups: A={labels[0]}, B={labels[1]}\n" + "\n".join(lines) + "\n")
        write_keyvalues(out_dir / f"stats_{kind}.kv", kv)
        written[kind] = txt
    return written


_KIND_TAG = {SYMMETRIC: "nena", DIRECTED: "nona"}


def stage_render(networks_dir, projection_dir, config: PipelineConfig, out_dir,
                 spec: RenderSpec = RenderSpec()) -> list[Path]:
    """Emit the full SVG set from exported adjacency, layout, and points."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for kind in (SYMMETRIC, DIRECTED):
        tag = _KIND_TAG[kind]
        vectors = load_unit_vectors(networks_dir, kind, config.normalization_mode)
        units, pts = read_points(Path(projection_dir) / f"points_{kind}.csv")
        layout = read_layout(Path(projection_dir) / f"layout_{kind}.csv")
        order = {(v.unit.participant, v.unit.condition): v for v in vectors}
        vectors = [order[(u.participant, u.condition)] for u in units]
        groups = projection.group_networks(units, pts, vectors)
        renderer = render.render_symmetric if kind == SYMMETRIC else render.render_directed
        for g in groups:
            name = "diff" if g.condition == "difference" else g.condition
            path = out_dir / f"{tag}_{name}.svg"
            path.write_text(renderer(layout, g, spec))
            written.append(path)
        model = projection.ProjectionModel(
            kind=kind, units=units, column_means=np.zeros(0),
            basis=np.zeros((0, 2)), singular_values=np.zeros(0),
            unit_points=pts, variance_explained=_read_variance(projection_dir, kind))
        scatter = out_dir / f"points_{kind}.svg"
        scatter.write_text(render.render_scatter(model, groups, spec))
        written.append(scatter)
    return written


def _read_variance(projection_dir, kind: str) -> np.ndarray:
    kv = {}
    with open(Path(projection_dir) / f"variance_{kind}.txt") as fh:
        for line in fh:
            if "=" in line:
                k, _, v = line.strip().partition("=")
                kv[k] = float(v)
    return np.array([kv.get("svd1_variance_explained", 0.0),
                     kv.get("svd2_variance_explained", 0.0)])


# ------------------------------------------------------------------- run_all

def run_all(input_dir, out_dir, config: PipelineConfig | None = None,
            config_path=None, stages: list[str] | None = None,
            jobs: int = 1, seed: int | None = None,
            ica: bool | None = None) -> dict:
    """Execute the staged pipeline end to end over a participant directory.

    Returns the run manifest (also written to run_manifest.json last, so
    its presence marks a complete run). Stage errors are re-raised as
    StageError naming the stage.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / ".partial").unlink(missing_ok=True)
    # the manifest marks a complete run; never leave a stale one behind
    (out_dir / "run_manifest.json").unlink(missing_ok=True)
    if config is None:
        config = load_config(config_path) if config_path else PipelineConfig()
    from dataclasses import replace
    if seed is not None:
        config = replace(config, rng_seed=seed)
    if ica is not None:
        config = replace(config, ica_enabled=ica)
    selected = list(stages) if stages else list(STAGES)
    unknown = set(selected) - set(STAGES)
    if unknown:
        raise StageError("run", f"unknown stage(s) {sorted(unknown)}")

    manifest: dict = {"input_dir": str(input_dir), "out_dir": str(out_dir),
                      "stages": [], "timings_ms": {}, "warnings": []}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        participants = discover_participants(input_dir)
        manifest["participants"] = [p[0] for p in participants]
        current = participants

        def timed(name, fn, *args, **kwargs):
            t0 = time.perf_counter()
            try:
                result = fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, str(exc)) from exc
            manifest["stages"].append(name)
            manifest["timings_ms"][name] = round(1000 * (time.perf_counter() - t0), 3)
            return result

        try:
            if "preprocess" in selected:
                current = timed("preprocess", stage_preprocess, current, config,
                                out_dir / "preprocess", jobs=jobs)
            elif "features" in selected:
                # resume from an earlier preprocess run
                current = [(pid, out_dir / "preprocess" / f"{pid}_clean.csv", trials)
                           for pid, _, trials in participants]
            if "features" in selected:
                timed("features", stage_features, current, config,
                      out_dir / "codes", jobs=jobs)
            if "accumulate" in selected:
                timed("accumulate", stage_accumulate,
                      out_dir / "codes" / "code_table.csv", config,
                      out_dir / "networks")
            if "project" in selected:
                timed("project", stage_project, out_dir / "networks", config,
                      out_dir / "projection")
            if "stats" in selected:
                timed("stats", stage_stats, out_dir / "projection", out_dir / "stats")
            if "render" in selected:
                timed("render", stage_render, out_dir / "networks",
                      out_dir / "projection", config, out_dir / "render")
        except StageError:
            # partial outputs stay on disk, flagged for the caller
            (out_dir / ".partial").write_text("incomplete run\n")
            raise
        manifest["warnings"] = sorted({str(w.message) for w in caught})

    _write_summary(out_dir, manifest)
    with open(out_dir / "run_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest


def _write_summary(out_dir: Path, manifest: dict) -> None:
    """Human-readable run summary collecting the per-axis statistics."""
    lines = [f"participants: {', '.join(manifest.get('participants', []))}",
             f"stages: {', '.join(manifest['stages'])}"]
    for kind in (SYMMETRIC, DIRECTED):
        txt = out_dir / "stats" / f"stats_{kind}.txt"
        var = out_dir / "projection" / f"variance_{kind}.txt"
        if txt.exists():
            lines.append(f"\n[{_KIND_TAG[kind]}]")
            if var.exists():
                v = _read_variance(out_dir / "projection", kind)
                lines.append(f"variance explained: SVD1 {100 * v[0]:.1f}%, SVD2 {100 * v[1]:.1f}%")
            lines.append(txt.read_text().rstrip())
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")
