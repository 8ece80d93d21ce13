#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import enum
import functools
import logging
import math
import time
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np
import pandas as pd

from ..classifier import IntentionEstimator, load_or_init
from ..config import cfg
from ..errors import EmptyWindow
from ..infogain import NoiseModel
from ..planner import (
    LocalGoal,
    ObstacleEstimate,
    PlannerConfig,
    ShipDomain,
    Snapshot,
    Variant,
    next_target,
    plan,
)
from ..topology import VesselState
from .kinematics import Command, EgoSpec, step_kinematics
from .policies import behavior_policy, cv_policy
from .scenario import Policy, start_heading
from .sensor import AisReceiver, ais_observe, on_broadcast_grid, propagate_fix


class Outcome(str, enum.Enum):
    SUCCESS = "SUCCESS"
    NEARMISS = "NEARMISS"
    COLLISION = "COLLISION"
    TIMEOUT = "TIMEOUT"


STEP_COLUMNS = [
    "t",
    "vessel_id",
    "x",
    "y",
    "heading_deg",
    "speed_mps",
    "p_l",
    "p_r",
    "J_d",
    "J_s",
    "J_i",
    "chosen_heading",
    "chosen_speed",
    "in_no_go_count",
]


@dataclass
class MetricsRow:
    variant: str
    n_obstacles: int
    mix: str
    noise: bool
    rule_compliance: bool
    seed: int
    outcome: str
    success: bool
    success_relaxed: bool
    collision: bool
    nearmiss_count: int
    min_cpa: float
    traveled_distance: float
    duration_s: float
    total_encounters: int
    avg_encounters: float
    planner_ms_mean: float = float("nan")
    planner_ms_std: float = float("nan")

    def __post_init__(self):
        assert not self.success or self.nearmiss_count == 0, "success with a nearmiss"


# wall-clock columns, written to timing.csv instead
TIMING_FIELDS = ("planner_ms_mean", "planner_ms_std")
METRICS_COLUMNS = [f.name for f in fields(MetricsRow) if f.name not in TIMING_FIELDS]


@dataclass
class _Vessel:
    state: VesselState
    spec: EgoSpec
    policy: Policy = Policy.CV
    goal: Optional[tuple] = None
    noise: NoiseModel = field(default_factory=NoiseModel)
    track: Optional[object] = None
    command: Optional[object] = None

    @property
    def id(self):
        return self.state.id

    @property
    def cooperative(self):
        return self.policy.cooperative and self.track is None


@dataclass
class EpisodeLog:
    variant: str
    seed: int
    name: str = ""
    rows: list = field(default_factory=list)
    beliefs: list = field(default_factory=list)
    planner_ms: list = field(default_factory=list)
    cost_fields: list = field(default_factory=list)
    cooperative_ids: list = field(default_factory=list)
    route: tuple = ()
    outcome: Outcome = Outcome.TIMEOUT
    reached_goal: bool = False
    min_cpa: float = math.inf
    min_separation: dict = field(default_factory=dict)
    nearmiss_count: int = 0
    traveled_distance: float = 0.0
    duration_s: float = 0.0
    encountered: set = field(default_factory=set)
    encounter_counts: list = field(default_factory=list)
    emergency_stops: int = 0

    @property
    def total_encounters(self):
        return len(self.encountered)

    @property
    def avg_encounters(self):
        return float(np.mean(self.encounter_counts)) if self.encounter_counts else 0.0

    def to_frame(self):
        return pd.DataFrame(self.rows, columns=STEP_COLUMNS)

    def beliefs_frame(self):
        return pd.DataFrame(self.beliefs, columns=["t", "vessel_id", "p_l", "p_r"])

    def timing_frame(self):
        return pd.DataFrame({"call": range(len(self.planner_ms)), "planner_ms": self.planner_ms})

    def trajectories(self):
        """vessel id -> (T, 2) array of positions"""
        frame = self.to_frame()
        return {
            vessel_id: group[["x", "y"]].to_numpy()
            for vessel_id, group in frame.groupby("vessel_id", sort=False)
        }

    def separation_frame(self):
        """Ego-to-obstacle distance per step and obstacle"""
        frame = self.to_frame()
        ego = frame[frame.vessel_id == "ego"].set_index("t")[["x", "y"]]
        others = frame[frame.vessel_id != "ego"].join(ego, on="t", rsuffix="_ego")
        others["separation"] = np.hypot(others.x - others.x_ego, others.y - others.y_ego)
        return others[["t", "vessel_id", "separation"]].reset_index(drop=True)

    def metrics_row(self, n_obstacles=0, mix="", noise=False, rule_compliance=False):
        ms = np.asarray(self.planner_ms, dtype=np.float64)
        return MetricsRow(
            variant=self.variant,
            n_obstacles=int(n_obstacles),
            mix=str(mix),
            noise=bool(noise),
            rule_compliance=bool(rule_compliance),
            seed=int(self.seed),
            outcome=self.outcome.value,
            success=self.outcome is Outcome.SUCCESS,
            success_relaxed=self.reached_goal and self.outcome is not Outcome.COLLISION,
            collision=self.outcome is Outcome.COLLISION,
            nearmiss_count=int(self.nearmiss_count),
            min_cpa=float(self.min_cpa),
            traveled_distance=float(self.traveled_distance),
            duration_s=float(self.duration_s),
            total_encounters=self.total_encounters,
            avg_encounters=self.avg_encounters,
            planner_ms_mean=float(ms.mean()) if ms.size else float("nan"),
            planner_ms_std=float(ms.std()) if ms.size else float("nan"),
        )


@functools.lru_cache(maxsize=4)
def _cached_estimator(path, seed, allow_untrained):
    return IntentionEstimator(load_or_init(path, seed, allow_untrained))


def default_estimator(path=None, seed=None):
    """Classifier for MOA_LSTM; raises MissingWeights unless untrained weights are allowed"""
    return _cached_estimator(path, seed, bool(cfg.classifier.allow_untrained))


def ego_planner_config(variant, spec, rule_compliance=None, **overrides):
    values = {
        "variant": Variant(variant),
        "v_max": spec.v_max,
        "ego_length": spec.length,
        "sensing_range": spec.sensing_range,
    }
    if rule_compliance is not None:
        values["rule_compliance"] = bool(rule_compliance)
    values.update(overrides)
    return PlannerConfig.from_config(**values)


def _domain(spec, vessel, config):
    return ShipDomain.for_vessels(
        spec.length, vessel.state.length, config.collision_factor, config.risky_factor
    )


def _nan_row(t, state):
    nan = float("nan")
    return [t, str(state.id), state.pos[0], state.pos[1], state.heading, state.speed] + [nan] * 8


def simulate(
    ego,
    route,
    vessels,
    variant,
    spec,
    config=None,
    seed=0,
    estimator=None,
    ego_track=None,
    timeout=None,
    record_fields=False,
    name="",
):
    """
    Runs one episode: physics at `simulator.dt`, AIS broadcasts and ego
    planning at their configured rates, until the ego captures its last
    route point, enters a collision boundary or times out.

    Args:
        ego: initial ego VesselState
        route: sequence of (x, y) points, the last one being the goal
        vessels: list of _Vessel obstacles (never mutated in place)
        variant: planner Variant of the ego
        spec: EgoSpec of the ego
        config: PlannerConfig (built from the global config if None)
        ego_track: recorded track replayed verbatim instead of planning
    """
    variant = Variant(variant)
    config = ego_planner_config(variant, spec) if config is None else config
    if variant is Variant.MOA_LSTM and estimator is None and ego_track is None:
        estimator = default_estimator(cfg.classifier.weights_path, cfg.seed)
    dt = float(cfg.simulator.dt)
    timeout = float(cfg.simulator.timeout if timeout is None else timeout)
    goal_radius = float(cfg.simulator.goal_radius)
    plan_every = max(1, int(round(float(cfg.simulator.plan_period) / dt)))
    n_steps = int(round(timeout / dt))

    vessels = [_Vessel(**{f.name: getattr(v, f.name) for f in fields(_Vessel)}) for v in vessels]
    noise_of = {v.id: v.noise for v in vessels}
    domains = {v.id: _domain(spec, v, config) for v in vessels}
    inside_r = {v.id: False for v in vessels}

    log = EpisodeLog(
        variant="HISTORICAL" if ego_track is not None else variant.value,
        seed=int(seed),
        name=name,
        cooperative_ids=[str(v.id) for v in vessels if v.cooperative],
        route=tuple(tuple(p) for p in route),
    )
    receiver = AisReceiver()
    command = Command(heading=ego.heading, speed_ratio=0.0)
    last = None
    theta_tgt = None
    waypoint = 0
    belief_of = {}

    for k in range(n_steps + 1):
        t = k * dt

        for v in vessels:
            separation = float(np.hypot(*(v.state.position - ego.position)))
            log.min_cpa = min(log.min_cpa, separation)
            log.min_separation[v.id] = min(log.min_separation.get(v.id, math.inf), separation)
            inside = separation < domains[v.id].risky_radius
            if inside and not inside_r[v.id]:
                log.nearmiss_count += 1
                logging.debug(f"Nearmiss with {v.id} at t={t:.1f} ({separation:.2f} m)")
            inside_r[v.id] = inside
            if separation < domains[v.id].collision_radius:
                log.outcome = Outcome.COLLISION
        if log.outcome is Outcome.COLLISION:
            log.duration_s = t
            break
        while (
            waypoint < len(route)
            and np.hypot(*(np.asarray(route[waypoint]) - ego.position)) <= goal_radius
        ):
            waypoint += 1
        if waypoint == len(route):
            log.reached_goal = True
            log.outcome = Outcome.SUCCESS if log.nearmiss_count == 0 else Outcome.NEARMISS
            log.duration_s = t
            break
        if k == n_steps:
            log.outcome = Outcome.TIMEOUT
            log.duration_s = t
            break

        if on_broadcast_grid(t):
            for v in vessels:
                receiver.broadcast(ais_observe(v.state, v.noise, t, seed), ego)
        receiver.deliver(t)

        if k % plan_every == 0:
            step = k // plan_every
            in_range = [
                str(v.id)
                for v in vessels
                if np.hypot(*(v.state.position - ego.position)) <= spec.sensing_range
            ]
            log.encountered.update(in_range)
            log.encounter_counts.append(len(in_range))

            if ego_track is None:
                estimates = []
                for vessel_id, fix in sorted(receiver.latest().items()):
                    try:
                        window = receiver.observation_window(vessel_id)
                    except EmptyWindow:
                        window = None
                    estimates.append(
                        ObstacleEstimate(
                            state=propagate_fix(fix, t),
                            noise=noise_of[vessel_id],
                            window=window,
                        )
                    )
                snapshot = Snapshot(ego=ego, obstacles=estimates, step=step)
                goal = LocalGoal.toward(ego, route[waypoint], 1.0, theta_tgt)
                started = time.perf_counter()
                last = plan(snapshot, goal, config, seed, estimator, record_fields)
                log.planner_ms.append((time.perf_counter() - started) * 1000.0)
                theta_tgt = next_target(goal, last)
                command = last.action
                if last.emergency:
                    log.emergency_stops += 1
                if record_fields and last.cost_field is not None:
                    log.cost_fields.append((t, last.cost_field))
                belief_of = {i: b.as_tuple() for i, b in last.beliefs.items()}
                for vessel_id, (p_l, p_r) in sorted(belief_of.items()):
                    log.beliefs.append((t, str(vessel_id), p_l, p_r))

            truths = [ego] + [v.state for v in vessels]
            for v in vessels:
                if v.track is not None:
                    continue
                if v.goal is not None:
                    to_goal = np.asarray(v.goal) - v.state.position
                    if np.hypot(*to_goal) <= goal_radius:
                        v.goal = None
                if v.cooperative and v.goal is not None:
                    v.command = behavior_policy(v.policy, v.state, truths, v.goal, v.spec, seed, step)
                else:
                    v.command = cv_policy(v.state, v.spec)

        row = [t, "ego", ego.pos[0], ego.pos[1], ego.heading, ego.speed, math.nan, math.nan]
        if last is not None:
            row += [
                last.J_d,
                last.J_s,
                last.J_i,
                float(last.action.heading),
                last.action.speed_ratio * spec.v_max,
                int(last.no_go_count),
            ]
        else:
            row += [math.nan] * 6
        log.rows.append(row)
        for v in sorted(vessels, key=lambda v: str(v.id)):
            row = _nan_row(t, v.state)
            if v.id in belief_of:
                row[6], row[7] = belief_of[v.id]
            log.rows.append(row)

        if ego_track is not None:
            moved = ego_track.state_at(t + dt, ego)
        else:
            moved = step_kinematics(ego, command, spec, dt)
        log.traveled_distance += float(np.hypot(*(moved.position - ego.position)))
        ego = moved
        for v in vessels:
            if v.track is not None:
                v.state = v.track.state_at(t + dt, v.state)
            else:
                v.state = step_kinematics(v.state, v.command, v.spec, dt)

    logging.info(
        f"Episode {name or seed} [{log.variant}]: {log.outcome.value} at t={log.duration_s:.1f} s, "
        f"min CPA {log.min_cpa:.2f} m, {log.nearmiss_count} nearmiss"
    )
    return log


def vessels_from_scenario(sc):
    vessels = []
    for obs in sc.obstacles:
        spec = EgoSpec.for_agent(obs.state.length, obs.state.beam, obs.state.speed)
        vessels.append(
            _Vessel(state=obs.state, spec=spec, policy=obs.policy, goal=obs.goal, noise=obs.noise)
        )
    return vessels


def run_scenario(sc, ego_variant, config=None, seed=None, estimator=None, spec=None, record_fields=False):
    """
    Runs the ego planner variant through a scenario. The ego starts at rest
    at `sc.start` heading for the first route point. `seed` defaults to the
    scenario seed, which also fixes the AIS noise and particle streams.
    """
    spec = EgoSpec.from_config() if spec is None else spec
    seed = sc.seed if seed is None else seed
    ego = VesselState(
        t=0.0,
        pos=sc.start,
        heading=start_heading(sc),
        speed=0.0,
        id="ego",
        length=spec.length,
        beam=spec.beam,
    )
    return simulate(
        ego,
        sc.route,
        vessels_from_scenario(sc),
        ego_variant,
        spec,
        config=config,
        seed=seed,
        estimator=estimator,
        record_fields=record_fields,
        name=sc.name,
    )


__all__ = [
    "METRICS_COLUMNS",
    "STEP_COLUMNS",
    "EpisodeLog",
    "MetricsRow",
    "Outcome",
    "default_estimator",
    "ego_planner_config",
    "run_scenario",
    "simulate",
    "vessels_from_scenario",
]
