#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""
Command-line entry point.

To Run:
$ asvplan simulate configs/scenarios/centerline.yaml --variant MOA_PLUS --out out/centerline

# Monte-Carlo grid from a batch preset, on 8 worker processes
$ ASVPLAN_THREADS=8 asvplan batch --config configs/batch_smoke.yaml --out out/smoke

# Train the passing classifier on synthetic encounters, then score it
$ asvplan train --n 2000 --out out/train
$ asvplan eval --weights out/train/weights.json --dataset out/train/dataset.csv --out out/eval

# Replay the bundled collision reconstruction
$ asvplan replay --ego-id A --out out/replay
$ asvplan replay --historical --out out/historical

# Information-gain field of one snapshot
$ asvplan gainfield configs/scenarios/crossing_snapshot.yaml --variant MOA_PLUS --out out/gainfield

Exit codes: 0 success, 2 collision or nearmiss outcome, 64 usage error,
65 malformed input file, 70 diverged training.
"""

import argparse
import logging
import os
import sys
import time
from dataclasses import asdict

import numpy as np
import pandas as pd
import yaml
from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

import asvplan

from ..classifier import (
    REFERENCE_F1,
    evaluate,
    generate_synthetic_dataset,
    load_dataset,
    load_weights,
    lstm_train,
    save_dataset,
    save_weights,
    split_dataset,
)
from ..config import cfg
from ..errors import CorruptFile, DivergedLoss, InfeasibleConfig, MalformedCsv, VersionMismatch
from ..infogain import GainField, action_velocities
from ..planner import PlannerConfig, Variant, no_go_zone
from ..planner.costs import domain_for, info_field
from ..planner.actions import action_grid
from ..planner.select import in_range
from ..simulator import (
    METRICS_COLUMNS,
    Outcome,
    RandomBeliefEstimator,
    load_ais_csv,
    load_scenario,
    load_snapshot,
    monte_carlo,
    reconstructed_tracks,
    replay_accident,
    run_scenario,
    summarize,
    timing_summary,
)
from ..simulator.episode import default_estimator
from . import plots
from .manifest import RunManifest


EXIT_OK = 0
EXIT_OUTCOME = 2
EXIT_USAGE = 64
EXIT_INPUT = 65
EXIT_DIVERGED = 70

BAD_INPUT = (
    MalformedCsv,
    CorruptFile,
    VersionMismatch,
    InfeasibleConfig,
    yaml.YAMLError,
    OmegaConfBaseException,
    FileNotFoundError,
)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _common_args():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        "--config",
        "-c",
        type=str,
        required=False,
        default=None,
        help="YAML file layered over configs/default.yaml",
    )
    parser.add_argument(
        "--overrides",
        type=str,
        required=False,
        default=None,
        help="planner override file of `key = value` lines",
    )
    parser.add_argument(
        "--seed",
        "-s",
        type=int,
        required=False,
        default=None,
        help="master seed (defaults to the scenario or config seed)",
    )
    parser.add_argument(
        "--variant",
        "-v",
        type=str,
        required=False,
        default=None,
        choices=[v.value for v in Variant],
        help="planner variant of the ego",
    )
    parser.add_argument(
        "--out",
        "-o",
        type=str,
        required=False,
        default="out",
        help="output directory; nothing is written outside it",
    )
    parser.add_argument(
        "--no-plots",
        required=False,
        default=False,
        action="store_true",
        help="skip SVG figures",
    )
    parser.add_argument(
        "--verbose",
        required=False,
        default=False,
        action="store_true",
        help="log at DEBUG level",
    )
    return parser


def get_args(argv=None):
    """Parses command line arguments"""
    common = _common_args()
    parser = _ArgumentParser(prog="asvplan", description="Intention-aware ASV planning")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    simulate = subparsers.add_parser("simulate", parents=[common], help="run one scenario")
    simulate.add_argument("scenario", type=str, help="scenario YAML file")

    batch = subparsers.add_parser("batch", parents=[common], help="Monte-Carlo grid")
    batch.add_argument(
        "--workers",
        "-w",
        type=int,
        required=False,
        default=None,
        help="worker processes (defaults to ASVPLAN_THREADS)",
    )

    train = subparsers.add_parser("train", parents=[common], help="train the classifier")
    train.add_argument("--dataset", type=str, default=None, help="dataset CSV (synthetic if omitted)")
    train.add_argument("--n", type=int, default=None, help="synthetic encounter count")
    train.add_argument("--epochs", type=int, default=None, help="training epochs")
    train.add_argument("--resume", type=str, default=None, help="weights file to resume from")

    evaluate_ = subparsers.add_parser("eval", parents=[common], help="score saved weights")
    evaluate_.add_argument("--weights", type=str, required=True, help="weights file")
    evaluate_.add_argument("--dataset", type=str, default=None, help="dataset CSV (synthetic if omitted)")
    evaluate_.add_argument("--n", type=int, default=None, help="synthetic encounter count")

    replay = subparsers.add_parser("replay", parents=[common], help="replay an AIS encounter")
    replay.add_argument("--ais", type=str, default=None, help="AIS CSV (bundled reconstruction if omitted)")
    replay.add_argument("--ego-id", type=str, default="A", help="vessel id of the own ship")
    replay.add_argument("--historical", default=False, action="store_true", help="replay the recorded ego track")
    replay.add_argument(
        "--random-beliefs",
        default=False,
        action="store_true",
        help="replace classifier beliefs with uniform random ones",
    )

    gainfield = subparsers.add_parser("gainfield", parents=[common], help="dump an information-gain field")
    gainfield.add_argument("snapshot", type=str, help="snapshot YAML file")
    gainfield.add_argument("--speed-ratio", type=float, default=None, help="speed ratio for the reported minimum")

    return parser.parse_args(argv)


def _write_csv(frame, args, name, manifest):
    path = os.path.join(args.out, name)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    manifest.outputs.append(name)
    return path


def _plot(args, manifest, fn, *fn_args, name, **kwargs):
    if args.no_plots or not cfg.cli.plots:
        return
    fn(*fn_args, os.path.join(args.out, name), **kwargs)
    manifest.outputs.append(name)


def _metrics_frame(row):
    return pd.DataFrame([asdict(row)])[METRICS_COLUMNS]


def cmd_simulate(args, manifest):
    sc = load_scenario(args.scenario)
    variant = Variant(args.variant or cfg.planner.variant)
    seed = sc.seed if args.seed is None else args.seed
    manifest.seed = int(seed)
    log = run_scenario(sc, variant, seed=seed)

    _write_csv(log.to_frame(), args, "steps.csv", manifest)
    _write_csv(log.beliefs_frame(), args, "beliefs.csv", manifest)
    row = log.metrics_row(
        len(sc.obstacles), sc.mix.value, sc.noise, bool(cfg.planner.rule_compliance.enabled)
    )
    _write_csv(_metrics_frame(row), args, "metrics.csv", manifest)
    _write_csv(log.timing_frame(), args, "timing.csv", manifest)
    _plot(args, manifest, plots.plot_trajectories, log, name="trajectory.svg", arena=sc.arena)
    _plot(args, manifest, plots.plot_beliefs, log, name="beliefs.svg")

    manifest.outcome = log.outcome.value
    return EXIT_OK if log.outcome is Outcome.SUCCESS else EXIT_OUTCOME


def cmd_batch(args, manifest):
    settings = OmegaConf.create(cfg.to_container()["batch"])
    if args.seed is not None:
        settings.seed = int(args.seed)
    if args.variant is not None:
        settings.variants = [args.variant]
    manifest.seed = int(settings.seed)
    if Variant.MOA_LSTM.value in list(settings.variants):
        # fail before spawning workers
        default_estimator(cfg.classifier.weights_path, cfg.seed)
    started = time.perf_counter()
    metrics, timing = monte_carlo(settings, workers=args.workers)
    logging.info(f"Batch of {len(metrics)} episodes took {time.perf_counter() - started:.1f} s")

    summary = summarize(metrics, list(settings.variants))
    _write_csv(metrics, args, "metrics.csv", manifest)
    _write_csv(timing, args, "timing.csv", manifest)
    _write_csv(summary, args, "summary.csv", manifest)
    _write_csv(timing_summary(timing), args, "timing_summary.csv", manifest)
    if len(summary):
        _plot(args, manifest, plots.plot_summary, summary, name="summary.svg")
    manifest.outcome = f"{len(metrics)} episodes"
    return EXIT_OK


def _dataset(args, seed, manifest):
    if args.dataset is not None:
        return load_dataset(args.dataset)
    data = generate_synthetic_dataset(n=args.n, seed=seed)
    save_dataset(data, os.path.join(args.out, "dataset.csv"))
    manifest.outputs.append("dataset.csv")
    return data


def _report_frame(metrics):
    frame = pd.DataFrame([{k: metrics[k] for k in ("n", "accuracy", "precision", "recall", "f1", "loss")}])
    frame["reference_f1"] = REFERENCE_F1
    return frame


def cmd_train(args, manifest):
    seed = cfg.seed if args.seed is None else args.seed
    manifest.seed = int(seed)
    hp = OmegaConf.create(cfg.to_container()["classifier"]["training"])
    if args.epochs is not None:
        if args.epochs < 0:
            raise ValueError(f"--epochs must be >= 0, got {args.epochs}")
        hp.epochs = int(args.epochs)
    data = _dataset(args, seed, manifest)
    train, test = split_dataset(data, float(hp.validation_fraction), seed)
    model = load_weights(args.resume) if args.resume is not None else None

    model, report = lstm_train(train, hp=hp, seed=seed, model=model, validation=test)
    save_weights(model, os.path.join(args.out, "weights.json"))
    manifest.outputs.append("weights.json")
    _write_csv(report.to_frame(), args, "training.csv", manifest)

    metrics = evaluate(model, test or train)
    _write_csv(_report_frame(metrics), args, "report.csv", manifest)
    if len(report.epochs):
        _plot(args, manifest, plots.plot_training, report, name="training.svg")
    logging.info(f"Held-out F1 {metrics['f1']:.4f} (reference {REFERENCE_F1})")
    manifest.outcome = f"f1={metrics['f1']:.4f}"
    return EXIT_OK


def cmd_eval(args, manifest):
    seed = cfg.seed if args.seed is None else args.seed
    manifest.seed = int(seed)
    model = load_weights(args.weights)
    data = _dataset(args, seed, manifest)
    metrics = evaluate(model, data)
    _write_csv(_report_frame(metrics), args, "report.csv", manifest)
    logging.info(f"F1 {metrics['f1']:.4f} on {metrics['n']} encounters (reference {REFERENCE_F1})")
    manifest.outcome = f"f1={metrics['f1']:.4f}"
    return EXIT_OK


def cmd_replay(args, manifest):
    seed = cfg.seed if args.seed is None else args.seed
    manifest.seed = int(seed)
    frame = reconstructed_tracks() if args.ais is None else load_ais_csv(args.ais)
    variant = Variant(args.variant or cfg.planner.variant)
    estimator = None
    if args.random_beliefs:
        if variant is not Variant.MOA_LSTM:
            logging.warning(f"--random-beliefs has no effect on {variant.value}")
        estimator = RandomBeliefEstimator(seed)
    log = replay_accident(
        frame,
        args.ego_id,
        variant=variant,
        seed=seed,
        historical=args.historical,
        estimator=estimator,
    )

    _write_csv(log.to_frame(), args, "steps.csv", manifest)
    _write_csv(log.beliefs_frame(), args, "beliefs.csv", manifest)
    _write_csv(log.separation_frame(), args, "separation.csv", manifest)
    row = log.metrics_row(len(set(frame.id)) - 1, "", False, True)
    _write_csv(_metrics_frame(row), args, "metrics.csv", manifest)

    lengths = frame.length_m if "length_m" in frame.columns else [cfg.replay.ego.length]
    collision_radius = float(cfg.ship_domain.collision_factor) * float(np.max(lengths))
    _plot(
        args,
        manifest,
        plots.plot_separation,
        {log.variant: log},
        name="separation.svg",
        collision_radius=collision_radius,
    )
    _plot(args, manifest, plots.plot_trajectories, log, name="trajectory.svg")
    _plot(args, manifest, plots.plot_beliefs, log, name="beliefs.svg")

    manifest.outcome = log.outcome.value
    return EXIT_OUTCOME if log.outcome is Outcome.COLLISION else EXIT_OK


def cmd_gainfield(args, manifest):
    snapshot, extras = load_snapshot(args.snapshot)
    seed = extras["seed"] if args.seed is None else args.seed
    manifest.seed = int(seed)
    variant = Variant(args.variant or cfg.planner.variant)
    if not variant.uses_information:
        logging.warning(f"{variant.value} ignores information gain; using MOA_PLUS")
        variant = Variant.MOA_PLUS
    config = PlannerConfig.from_config(variant=variant)
    estimator = default_estimator(cfg.classifier.weights_path, cfg.seed) if variant is Variant.MOA_LSTM else None

    headings, ratios = action_grid()
    estimates = in_range(snapshot, config.sensing_range)
    info = info_field(snapshot, estimates, headings, ratios, config, seed, estimator)
    field = GainField(headings=headings, speed_ratios=ratios, values=info.values)
    states = [estimate.state for estimate in estimates]
    zone = no_go_zone(
        snapshot.ego,
        states,
        [domain_for(obs, config) for obs in states],
        action_velocities(headings, ratios, config.v_max),
        config.horizon_s,
    )

    frame = field.to_frame()
    frame["heading_deg"] = frame.heading_deg.astype(np.int64)
    frame["in_no_go"] = zone.mask.astype(np.int64)
    _write_csv(frame, args, "gain_field.csv", manifest)
    _plot(
        args,
        manifest,
        plots.plot_gain_field,
        headings,
        ratios,
        field.values,
        name="gain_field.svg",
        in_no_go=zone.mask,
    )

    ratio = args.speed_ratio if args.speed_ratio is not None else extras["speed_ratio"]
    ratio = 1.0 if ratio is None else float(ratio)
    best = field.argmin_heading(ratio)
    logging.info(f"Minimum information-gain cost at heading {best:.0f} deg (speed ratio {ratio})")
    manifest.outcome = f"argmin_heading={best:.0f}"
    return EXIT_OK


HANDLERS = {
    "simulate": cmd_simulate,
    "batch": cmd_batch,
    "train": cmd_train,
    "eval": cmd_eval,
    "replay": cmd_replay,
    "gainfield": cmd_gainfield,
}


def _setup(args):
    try:
        cfg.load_config(args.config)
        if args.overrides is not None:
            cfg.load_overrides(args.overrides)
    finally:
        # level from the loaded config, or the previous one when loading failed
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else getattr(logging, str(cfg.cli.log_level)),
            format="%(asctime)s %(levelname)s %(message)s",
            force=True,
        )
    asvplan.init(seed=args.seed)


def main(argv=None):
    """Runs one command and returns its exit code"""
    args = get_args(argv)
    os.makedirs(args.out, exist_ok=True)
    manifest = RunManifest(
        command=args.command,
        config_path=args.config,
        seed=0 if args.seed is None else int(args.seed),
        out_dir=args.out,
        argv=list(sys.argv[1:] if argv is None else argv),
    )
    started = time.perf_counter()
    try:
        _setup(args)
        code = HANDLERS[args.command](args, manifest)
    except DivergedLoss as e:
        logging.error(str(e))
        code = EXIT_DIVERGED
    except BAD_INPUT as e:
        logging.error(f"{type(e).__name__}: {e}")
        code = EXIT_INPUT
    except ValueError as e:
        # bad values in config or override files
        logging.error(str(e))
        code = EXIT_INPUT
    manifest.exit_code = code
    manifest.wall_clock_s = round(time.perf_counter() - started, 3)
    manifest.write()
    return code


if __name__ == "__main__":
    sys.exit(main())
