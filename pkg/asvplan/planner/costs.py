#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""
Cost terms of the local planner over the action grid:

    J(theta, v) = J_d + w_s * J_s + w_i * J_i
    J_d = w_f * f(theta) + w_f2 * f2(theta) + w_g * g(v)

with f = |wrap(theta - theta_wp)| / 180, f2 = |wrap(theta - theta_tgt)| / 180
and g = |v - v_wp| (speed ratios). Every term lies in [0, 1].
"""

import concurrent.futures
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..classifier.belief import PassingBelief
from ..classifier.features import ObservationWindow
from ..common.util import bearing_deg, heading_mod, num_threads, wrap_deg
from ..infogain import (
    NoiseModel,
    action_velocities,
    cluster_gain,
    expected_left_probability,
    obstacle_gain,
    obstacle_weights,
    sample_particles,
    total_gain,
)
from ..topology import VesselState, cpa_arrays
from .clustering import ClusterSet, cluster_obstacles
from .config import Variant
from .domain import ShipDomain, dcpa_field


@dataclass(frozen=True)
class LocalGoal:
    theta_wp: float
    v_wp: float = 1.0
    theta_tgt: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "theta_wp", heading_mod(self.theta_wp))
        tgt = self.theta_wp if self.theta_tgt is None else heading_mod(self.theta_tgt)
        object.__setattr__(self, "theta_tgt", tgt)
        if not 0.0 <= self.v_wp <= 1.0:
            raise ValueError(f"v_wp must be a speed ratio in [0, 1], got {self.v_wp}")

    @classmethod
    def toward(cls, ego, waypoint, v_wp=1.0, theta_tgt=None):
        theta_wp = bearing_deg(np.asarray(waypoint, dtype=np.float64) - ego.position)
        return cls(theta_wp=theta_wp, v_wp=v_wp, theta_tgt=theta_tgt)


@dataclass
class ObstacleEstimate:
    """What the planner knows of one obstacle: latest fix, noise, recent window"""

    state: VesselState
    noise: NoiseModel = field(default_factory=NoiseModel)
    window: Optional[ObservationWindow] = None

    @property
    def id(self):
        return self.state.id


@dataclass
class Snapshot:
    ego: VesselState
    obstacles: list = field(default_factory=list)
    step: int = 0


def deviation_field(headings, speed_ratios, goal, config):
    f = np.abs(wrap_deg(np.asarray(headings, dtype=np.float64) - goal.theta_wp)) / 180.0
    f2 = np.abs(wrap_deg(np.asarray(headings, dtype=np.float64) - goal.theta_tgt)) / 180.0
    g = np.abs(np.asarray(speed_ratios, dtype=np.float64) - goal.v_wp)
    return config.w_f * f + config.w_f2 * f2 + config.w_g * g


def deviation_cost(a, goal, config):
    return float(deviation_field(a.heading, a.speed_ratio, goal, config))


def domain_for(obs, config):
    return ShipDomain.for_vessels(
        config.ego_length, obs.length, config.collision_factor, config.risky_factor
    )


def safety_field(ego, obstacles, domains, ego_velocities, horizon_s):
    """
    Worst-obstacle DCPA risk per action: 0 at DCPA >= R, 1 at DCPA <= C,
    linear in between, over obstacles reached within `horizon_s`.
    """
    risk = np.zeros(len(ego_velocities), dtype=np.float64)
    for obs, domain in zip(obstacles, domains):
        tcpa, dcpa = dcpa_field(ego, obs, ego_velocities)
        span = domain.risky_radius - domain.collision_radius
        level = np.clip((domain.risky_radius - dcpa) / span, 0.0, 1.0)
        risk = np.maximum(risk, np.where(tcpa <= horizon_s, level, 0.0))
    return risk


def safety_cost(a, ego, obstacles, domains, config):
    velocity = action_velocities(a.heading, a.speed_ratio, config.v_max)[None, :]
    return float(safety_field(ego, obstacles, domains, velocity, config.horizon_s)[0])


@dataclass
class InfoTerms:
    """Per-action J_i with the per-obstacle terms it aggregates"""

    values: np.ndarray
    clusters: ClusterSet = field(default_factory=ClusterSet)
    current: dict = field(default_factory=dict)
    gains: dict = field(default_factory=dict)


def current_belief(estimate, ego, particles, config, estimator=None):
    """Belief the obstacle passes left under the ego's present motion.

    MOA_LSTM reads the classifier over the observation window; the other
    information-aware variants use the particle prediction at the current
    heading and speed.
    """
    if estimator is not None and estimate.window is not None:
        return estimator.belief(estimate.window)
    ratio = min(ego.speed / config.v_max, 1.0) if config.v_max > 0 else 0.0
    velocity = action_velocities(ego.heading, ratio, config.v_max)
    return PassingBelief.from_left(expected_left_probability(ego.position, velocity, particles)[0])


def in_encounter(ego, estimate, horizon_s):
    """True when the obstacle closes on the ego, under present motion, within `horizon_s`"""
    tcpa, _ = cpa_arrays(
        estimate.state.position - ego.position, estimate.state.velocity - ego.velocity
    )
    return 0.0 < float(tcpa) <= horizon_s


def _obstacle_terms(snapshot, estimate, headings, speed_ratios, config, seed, estimator):
    ego = snapshot.ego
    particles = sample_particles(
        estimate.state,
        estimate.noise,
        config.particles,
        seed,
        int(snapshot.step),
        str(estimate.id),
    )
    current = current_belief(estimate, ego, particles, config, estimator)
    if not in_encounter(ego, estimate, config.horizon_s):
        return current, None
    return current, obstacle_gain(
        ego,
        estimate.state,
        estimate.noise,
        current,
        headings,
        speed_ratios,
        particles=particles,
        rule_factor=config.rule_factor if config.rule_compliance else None,
        v_max=config.v_max,
    )


def info_field(snapshot, estimates, headings, speed_ratios, config, seed=0, estimator=None):
    """
    J_i over the action grid: per-obstacle costs aggregated by cluster with
    trace-ratio weights, normalized by the total weight so J_i lies in [0, 1].
    VO_PLUS treats every obstacle as its own cluster. Only obstacles inside
    the encounter window (see `in_encounter`) get per-action terms; every
    estimate still reports its current belief. Zero without such obstacles.
    """
    values = np.zeros(len(headings), dtype=np.float64)
    if not estimates:
        return InfoTerms(values=values)
    lstm = estimator if config.variant == Variant.MOA_LSTM else None

    def terms(estimate):
        return _obstacle_terms(
            snapshot, estimate, headings, speed_ratios, config, seed, lstm
        )

    workers = min(num_threads(), len(estimates))
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(terms, estimates))
    else:
        results = [terms(estimate) for estimate in estimates]
    current = {estimate.id: belief for estimate, (belief, _) in zip(estimates, results)}
    by_id = {gain.obstacle_id: gain for _, gain in results if gain is not None}
    noise_by_id = {estimate.id: estimate.noise for estimate in estimates}

    if config.variant.clusters_obstacles:
        clusters = cluster_obstacles(
            [estimate.state for estimate in estimates],
            snapshot.ego,
            config.tau_t,
            config.tau_d,
            config.tau_b,
        )
    else:
        clusters = ClusterSet.singletons([estimate.id for estimate in estimates])

    cluster_values, cluster_alphas = [], []
    for members in clusters:
        members = [m for m in members if m in by_id]
        if not members:
            continue
        alphas = obstacle_weights([noise_by_id[m] for m in members])
        cluster_values.append(cluster_gain([by_id[m].cost for m in members], alphas))
        cluster_alphas.append(alphas)
    if cluster_values:
        weight = sum(float(np.max(a)) * float(np.sum(a)) for a in cluster_alphas)
        values = np.clip(total_gain(cluster_values, cluster_alphas) / weight, 0.0, 1.0)
    return InfoTerms(values=values, clusters=clusters, current=current, gains=by_id)


def info_cost(a, snapshot, config, seed=0, estimator=None):
    estimates = [
        e
        for e in snapshot.obstacles
        if np.hypot(*(e.state.position - snapshot.ego.position)) <= config.sensing_range
    ]
    terms = info_field(
        snapshot,
        estimates,
        np.array([a.heading], dtype=np.float64),
        np.array([a.speed_ratio]),
        config,
        seed,
        estimator,
    )
    return float(terms.values[0])


__all__ = [
    "InfoTerms",
    "LocalGoal",
    "ObstacleEstimate",
    "Snapshot",
    "current_belief",
    "deviation_cost",
    "deviation_field",
    "domain_for",
    "in_encounter",
    "info_cost",
    "info_field",
    "safety_cost",
    "safety_field",
]
