#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import concurrent.futures
import itertools
import logging
import os
from dataclasses import asdict, dataclass

import pandas as pd
from omegaconf import OmegaConf

from ..common import rng
from ..common.util import num_threads
from ..config import cfg
from ..planner import Variant
from .episode import METRICS_COLUMNS, TIMING_FIELDS, ego_planner_config, run_scenario
from .kinematics import EgoSpec
from .scenario import Mix, randomize_scenario


@dataclass(frozen=True)
class BatchJob:
    index: int
    n_obstacles: int
    mix: str
    noise: bool
    rule_compliance: bool
    scenario: int
    variant: str
    seed: int


def scenario_seed(batch_seed, n_obstacles, mix, noise, index):
    """Seed of one scenario; every variant of a bin reuses it"""
    return rng.derive_seed(batch_seed, "scenario", n_obstacles, Mix(mix).value, int(noise), index)


def batch_jobs(settings=None):
    """Full grid of jobs: obstacle bins x mixes x noise x rule compliance x scenarios x variants"""
    settings = cfg.batch if settings is None else settings
    variants = [Variant(v).value for v in settings.variants]
    grid = itertools.product(
        [int(n) for n in settings.obstacles],
        [Mix(m).value for m in settings.mixes],
        [bool(x) for x in settings.noise],
        [bool(x) for x in settings.rule_compliance],
        range(int(settings.scenarios_per_bin)),
        variants,
    )
    jobs = []
    for index, (n, mix, noise, rc, scenario, variant) in enumerate(grid):
        seed = scenario_seed(int(settings.seed), n, mix, noise, scenario)
        jobs.append(BatchJob(index, n, mix, noise, rc, scenario, variant, seed))
    return jobs


def run_job(job):
    """Runs one (scenario, variant) pair; returns its MetricsRow as a dict"""
    sc = randomize_scenario(job.n_obstacles, job.mix, job.seed, job.noise)
    spec = EgoSpec.from_config()
    config = ego_planner_config(job.variant, spec, rule_compliance=job.rule_compliance)
    log = run_scenario(sc, job.variant, config=config, seed=job.seed, spec=spec)
    row = asdict(log.metrics_row(job.n_obstacles, job.mix, job.noise, job.rule_compliance))
    row["scenario"] = job.scenario
    return job.index, row


def _launch(config, threads):
    # each worker runs its episodes single-threaded unless told otherwise
    os.environ["ASVPLAN_THREADS"] = str(threads)
    cfg.set_config(OmegaConf.create(config))


def monte_carlo(settings=None, workers=None, jobs=None):
    """
    Runs every batch job, in parallel over processes when more than one
    worker is available. Results are ordered by job index, so the output is
    independent of the worker count.

    Returns:
        (metrics, timing) DataFrames; metrics holds no wall-clock columns
    """
    jobs = batch_jobs(settings) if jobs is None else list(jobs)
    workers = num_threads() if workers is None else int(workers)
    workers = max(1, min(workers, len(jobs) or 1))
    logging.info(f"Running {len(jobs)} episodes on {workers} worker(s)")

    results = []
    if workers == 1:
        for done, job in enumerate(jobs, start=1):
            results.append(run_job(job))
            if done % 50 == 0:
                logging.info(f"{done}/{len(jobs)} episodes done")
    else:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=workers,
            initializer=_launch,
            initargs=(cfg.to_container(), 1),
        ) as executor:
            for done, result in enumerate(executor.map(run_job, jobs, chunksize=1), start=1):
                results.append(result)
                if done % 50 == 0:
                    logging.info(f"{done}/{len(jobs)} episodes done")
    rows = [row for _, row in sorted(results, key=lambda r: r[0])]

    frame = pd.DataFrame(rows)
    columns = ["scenario"] + METRICS_COLUMNS
    metrics = frame[columns] if len(frame) else pd.DataFrame(columns=columns)
    keys = ["variant", "n_obstacles", "mix", "noise", "rule_compliance", "scenario"]
    timing = frame[keys + list(TIMING_FIELDS)] if len(frame) else pd.DataFrame(
        columns=keys + list(TIMING_FIELDS)
    )
    return metrics.reset_index(drop=True), timing.reset_index(drop=True)


def summarize(metrics, variant_order=None):
    """
    Aggregates per-episode metrics into one row per variant and bin: success
    rates (strict and relaxed) with their standard deviation, nearmiss total,
    mean minimum CPA, traveled distance, total encounters (TE) and average
    encounters per timestamp (AET).
    """
    keys = ["variant", "n_obstacles", "mix", "noise", "rule_compliance"]
    grouped = metrics.groupby(keys, sort=False)
    summary = grouped.agg(
        episodes=("success", "size"),
        success_rate=("success", "mean"),
        success_std=("success", lambda s: float(s.astype(float).std(ddof=0))),
        success_relaxed_rate=("success_relaxed", "mean"),
        collision_rate=("collision", "mean"),
        nearmiss_total=("nearmiss_count", "sum"),
        min_cpa_mean=("min_cpa", "mean"),
        traveled_mean=("traveled_distance", "mean"),
        TE=("total_encounters", "mean"),
        AET=("avg_encounters", "mean"),
    ).reset_index()
    if variant_order is not None:
        order = {Variant(v).value: i for i, v in enumerate(variant_order)}
        summary["_order"] = summary.variant.map(order)
        summary = summary.sort_values(
            ["n_obstacles", "mix", "noise", "rule_compliance", "_order"], kind="stable"
        ).drop(columns="_order")
    return summary.reset_index(drop=True)


def timing_summary(timing):
    keys = ["variant", "n_obstacles"]
    return (
        timing.groupby(keys, sort=False)
        .agg(planner_ms_mean=("planner_ms_mean", "mean"), planner_ms_std=("planner_ms_std", "mean"))
        .reset_index()
    )
