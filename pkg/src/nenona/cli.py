"""Command-line entry point.

Subcommands expose each pipeline stage plus an end-to-end `run`; every
stage reads the previous stage's documented CSV export, so external tools
can substitute any step. Flag precedence: CLI > config file > built-in
default.

Exit codes: 0 success, 1 input error, 2 numerical failure, 3 partial
completion (some stages finished before the failure).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import pipeline, synth
from .ingest import IngestError, PipelineConfig, load_config
from .pipeline import StageError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2
EXIT_PARTIAL = 3


def _config_from_args(args) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    if getattr(args, "seed", None) is not None:
        config = replace(config, rng_seed=args.seed)
    if getattr(args, "no_ica", False):
        config = replace(config, ica_enabled=False)
    if getattr(args, "window", None) is not None:
        config = replace(config, nona_window=args.window)
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nenona",
        description="EEG band/performance co-occurrence network pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", type=Path, default=None,
                       help="flat key=value config file (CLI flags win)")
        p.add_argument("--out", type=Path, required=out_required, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for all randomness (ICA init, synthesis)")

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    common(p)
    p.add_argument("--participants", type=int, default=11)
    p.add_argument("--p-high", type=float, default=0.9)
    p.add_argument("--p-low", type=float, default=0.1)

    p = sub.add_parser("preprocess", help="clean raw EEG CSVs into filtered recordings")
    common(p)
    p.add_argument("--in", dest="input", type=Path, required=True,
                   help="directory of <pid>_eeg.csv and <pid>_trials.csv")
    p.add_argument("--no-ica", action="store_true", help="skip ICA artifact removal")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--debug-dump", action="store_true",
                   help="also write per-stage .reref.csv/.filt.csv snapshots")

    p = sub.add_parser("encode", help="cleaned recordings -> code table CSV")
    common(p)
    p.add_argument("--in", dest="input", type=Path, required=True,
                   help="directory of <pid>_clean.csv files")
    p.add_argument("--trials", type=Path, required=True,
                   help="directory of <pid>_trials.csv files")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("network", help="code table -> adjacency CSVs + manifest")
    common(p)
    p.add_argument("--codes", type=Path, required=True, help="code table CSV")
    p.add_argument("--window", type=int, default=None,
                   help="directed-network window length (overrides config)")

    p = sub.add_parser("project", help="networks -> 2D points, layout, variance")
    common(p)
    p.add_argument("--networks", type=Path, required=True, help="network export directory")

    p = sub.add_parser("stats", help="projection points -> per-axis test reports")
    common(p)
    p.add_argument("--projection", type=Path, required=True)
    p.add_argument("--alpha", type=float, default=0.05)

    p = sub.add_parser("render", help="exports -> SVG diagrams")
    common(p)
    p.add_argument("--networks", type=Path, required=True)
    p.add_argument("--projection", type=Path, required=True)

    p = sub.add_parser("run", help="run the full pipeline end to end")
    common(p)
    p.add_argument("--in", dest="input", type=Path, required=True,
                   help="participant directory (or output of `synth`)")
    p.add_argument("--stages", type=str, default=None,
                   help=f"comma-separated subset of {','.join(pipeline.STAGES)}")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-ica", action="store_true")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "synth":
            coupling = synth.CouplingSpec(p_high=args.p_high, p_low=args.p_low)
            paths = pipeline.stage_synth(args.out, args.participants, coupling,
                                         seed=args.seed or 0)
            print(f"wrote {len(paths)} participant(s) to {args.out}")
        elif args.command == "preprocess":
            participants = pipeline.discover_participants(args.input)
            pipeline.stage_preprocess(participants, config, args.out,
                                      jobs=args.jobs, debug_dump=args.debug_dump)
            print(f"cleaned {len(participants)} recording(s) into {args.out}")
        elif args.command == "encode":
            items = []
            for clean in sorted(Path(args.input).glob("*_clean.csv")):
                pid = clean.name[: -len("_clean.csv")]
                trials = Path(args.trials) / f"{pid}_trials.csv"
                if not trials.exists():
                    raise StageError("encode", f"missing trial log for {pid}")
                items.append((pid, clean, trials))
            if not items:
                raise StageError("encode", f"no *_clean.csv files in {args.input}")
            path = pipeline.stage_features(items, config, args.out, jobs=args.jobs)
            print(f"wrote {path}")
        elif args.command == "network":
            path = pipeline.stage_accumulate(args.codes, config, args.out,
                                             window=args.window)
            print(f"wrote {path}")
        elif args.command == "project":
            written = pipeline.stage_project(args.networks, config, args.out)
            print("wrote " + ", ".join(str(p) for p in written.values()))
        elif args.command == "stats":
            written = pipeline.stage_stats(args.projection, args.out, alpha=args.alpha)
            print("wrote " + ", ".join(str(p) for p in written.values()))
        elif args.command == "render":
            written = pipeline.stage_render(args.networks, args.projection,
                                            config, args.out)
            print(f"wrote {len(written)} SVG(s) to {args.out}")
        elif args.command == "run":
            stages = args.stages.split(",") if args.stages else None
            manifest = pipeline.run_all(args.input, args.out, config=config,
                                        stages=stages, jobs=args.jobs)
            print(f"completed stages: {', '.join(manifest['stages'])}")
    except (IngestError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        partial = args.out and (Path(args.out) / ".partial").exists()
        return EXIT_PARTIAL if partial else EXIT_INPUT
    except (ValueError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
