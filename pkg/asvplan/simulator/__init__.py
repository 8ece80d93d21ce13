#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from .batch import BatchJob, batch_jobs, monte_carlo, run_job, summarize, timing_summary
from .episode import (
    METRICS_COLUMNS,
    STEP_COLUMNS,
    EpisodeLog,
    MetricsRow,
    Outcome,
    run_scenario,
    simulate,
)
from .kinematics import Command, EgoSpec, step_kinematics
from .policies import behavior_policy
from .replay import (
    RandomBeliefEstimator,
    Track,
    load_ais_csv,
    reconstructed_tracks,
    replay_accident,
)
from .scenario import (
    Mix,
    ObstacleSpec,
    Policy,
    Scenario,
    load_scenario,
    load_snapshot,
    randomize_scenario,
    save_scenario,
)
from .sensor import AisFix, AisReceiver, ais_observe


__all__ = [
    "METRICS_COLUMNS",
    "STEP_COLUMNS",
    "AisFix",
    "AisReceiver",
    "BatchJob",
    "Command",
    "EgoSpec",
    "EpisodeLog",
    "MetricsRow",
    "Mix",
    "ObstacleSpec",
    "Outcome",
    "Policy",
    "RandomBeliefEstimator",
    "Scenario",
    "Track",
    "ais_observe",
    "batch_jobs",
    "behavior_policy",
    "load_ais_csv",
    "load_scenario",
    "load_snapshot",
    "monte_carlo",
    "randomize_scenario",
    "reconstructed_tracks",
    "replay_accident",
    "run_job",
    "run_scenario",
    "save_scenario",
    "simulate",
    "step_kinematics",
    "summarize",
    "timing_summary",
]
