#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.
"""
Latency benchmarks for the planner and the passing classifier

To Run:
$ python benchmark.py

# Only planner benchmarks, 50 timed calls each
$ python benchmark.py --only-planner --loops 50

# Save benchmarks to csv
$ python benchmark.py -p ~/Downloads/
"""

import argparse
import functools
import os
import timeit
from collections import namedtuple

import asvplan
import numpy as np
import pandas as pd
from asvplan.classifier import IntentionEstimator, lstm_forward, untrained_model
from asvplan.planner import LocalGoal, ObstacleEstimate, PlannerConfig, Snapshot, Variant, select_action
from asvplan.simulator import EgoSpec, randomize_scenario
from asvplan.simulator.scenario import start_heading
from asvplan.topology import VesselState


Runtime = namedtuple("Runtime", "mid q1 q3 mean")


def time_me(func=None, n_loops=10):
    """Decorator returning the median runtime in seconds over n_loops

    Args:
        func (function): invoked with given args / kwargs
        n_loops (int): number of times to invoke function for timing

    Returns: tuple of (Runtime with median, quartiles and mean, function return value).
    """
    if func is None:
        return functools.partial(time_me, n_loops=n_loops)

    @functools.wraps(func)
    def timing_wrapper(*args, **kwargs):
        return_val = func(*args, **kwargs)
        times = []
        for _ in range(n_loops):
            start = timeit.default_timer()
            func(*args, **kwargs)
            times.append(timeit.default_timer() - start)
        runtime = Runtime(
            np.quantile(times, 0.5),
            np.quantile(times, 0.25),
            np.quantile(times, 0.75),
            float(np.mean(times)),
        )
        return runtime, return_val

    return timing_wrapper


def random_snapshot(n_obstacles, seed=0):
    """Ego at the scenario start facing its goal, obstacles known exactly at their fixes"""
    sc = randomize_scenario(n_obstacles, seed=seed, noise=True)
    spec = EgoSpec.from_config()
    ego = VesselState(
        t=0.0,
        pos=sc.start,
        heading=start_heading(sc),
        speed=spec.v_max,
        id="ego",
        length=spec.length,
        beam=spec.beam,
    )
    estimates = [ObstacleEstimate(state=obs.state, noise=obs.noise) for obs in sc.obstacles]
    # every obstacle inside sensing range
    config = PlannerConfig.from_config(sensing_range=10.0 * sc.arena)
    return Snapshot(ego=ego, obstacles=estimates), LocalGoal.toward(ego, sc.goal), config


def _timing_columns(runtime):
    return {
        "runtime ms": runtime.mid * 1000.0,
        "runtime ms Q1": runtime.q1 * 1000.0,
        "runtime ms Q3": runtime.q3 * 1000.0,
        "runtime ms mean": runtime.mean * 1000.0,
    }


class Benchmarks:
    """Collects one row per timed configuration into `self.df`

    Subclasses set `name` and implement `rows`.
    """

    name = None

    def __init__(self, n_loops=10):
        self.n_loops = n_loops
        self.df = None

    def __repr__(self):
        if self.df is None:
            return f"No {self.name} benchmarks"
        return self.df.to_string(index=False, justify="left")

    def rows(self):
        raise NotImplementedError

    def run(self):
        self.df = pd.DataFrame(list(self.rows()))

    def save(self, path):
        self.df.to_csv(os.path.join(path, f"{self.name}_benchmarks.csv"), index=False)


class PlannerBenchmarks(Benchmarks):
    """select_action wall time per variant and obstacle count"""

    name = "planner"

    def __init__(self, obstacle_counts=(10, 20, 30), n_loops=10, variants=None):
        super().__init__(n_loops)
        self.obstacle_counts = obstacle_counts
        self.variants = [Variant(v) for v in (variants or Variant)]

    def rows(self):
        timed = time_me(select_action, n_loops=self.n_loops)
        # timing is independent of the weight values
        estimator = IntentionEstimator(untrained_model(seed=0))
        for n in self.obstacle_counts:
            snapshot, goal, config = random_snapshot(n)
            for variant in self.variants:
                runtime, result = timed(snapshot, goal, config.with_variant(variant.value), 0, estimator)
                yield {
                    "variant": variant.value,
                    "obstacles": n,
                    "particles": config.particles,
                    **_timing_columns(runtime),
                    "heading": result.action.heading,
                }


class ClassifierBenchmarks(Benchmarks):
    """One passing-classifier forward pass per window length"""

    name = "classifier"
    WINDOWS = (1, 5, 10)

    def rows(self):
        model = untrained_model(seed=0)
        features = np.random.default_rng(0)
        timed = time_me(lstm_forward, n_loops=self.n_loops)
        for window in self.WINDOWS:
            runtime, belief = timed(model, features.normal(size=(window, 7)))
            yield {"window": window, **_timing_columns(runtime), "p_l": belief.p_l}


def get_args():
    parser = argparse.ArgumentParser(description="Planner and classifier latency")
    parser.add_argument("--path", "-p", type=str, default=None, help="directory for the csv files")
    parser.add_argument(
        "--only-planner", "-f", action="store_true", help="run only planner benchmarks"
    )
    parser.add_argument("--loops", "-n", type=int, default=10, help="timed calls per configuration")
    return parser.parse_args()


def main():
    asvplan.init()
    args = get_args()
    benchmarks = [PlannerBenchmarks(n_loops=args.loops)]
    if not args.only_planner:
        benchmarks.append(ClassifierBenchmarks(n_loops=args.loops))

    pd.set_option("display.precision", 3)
    for benchmark in benchmarks:
        benchmark.run()
        print(benchmark)
        if args.path:
            benchmark.save(args.path)


if __name__ == "__main__":
    main()
