#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""
Behavior policies of obstacle vessels. Non-cooperative vessels hold constant
velocity; cooperative ones steer toward their own goal with an artificial
potential field, a dynamic window or the velocity-obstacle / MOA planner.
"""

import numpy as np

from ..common.util import bearing_deg, heading_unit, wrap_deg
from ..config import cfg
from ..planner import LocalGoal, ObstacleEstimate, PlannerConfig, Snapshot, Variant, plan
from .kinematics import Command
from .scenario import Policy


def _neighbors(state, others, sensing_range):
    return [
        other
        for other in others
        if other.id != state.id
        and np.hypot(*(other.position - state.position)) <= sensing_range
    ]


def cv_policy(state, spec):
    ratio = state.speed / spec.v_max if spec.v_max > 0 else 0.0
    return Command(heading=state.heading, speed_ratio=min(ratio, 1.0))


def apf_policy(state, others, goal, spec, settings=None):
    """
    Attraction toward the goal plus repulsion inside the influence radius.
    The repulsion carries a starboard tangential component so an obstacle
    dead ahead still deflects the heading.
    """
    settings = cfg.simulator.apf if settings is None else settings
    influence = float(settings.influence)
    to_goal = np.asarray(goal, dtype=np.float64) - state.position
    distance = np.hypot(*to_goal)
    force = float(settings.k_att) * (to_goal / distance if distance > 0 else np.zeros(2))
    for other in _neighbors(state, others, influence):
        los = other.position - state.position
        d = max(np.hypot(*los), 1e-6)
        magnitude = float(settings.k_rep) * (1.0 / d - 1.0 / influence) / d**2
        away = -los / d
        starboard = heading_unit(bearing_deg(los) + 90.0)
        force = force + magnitude * (away + float(settings.k_tangent) * starboard)
    if np.hypot(*force) <= 1e-12:
        return Command(heading=state.heading, speed_ratio=1.0)
    return Command(heading=float(bearing_deg(force)), speed_ratio=1.0)


def dwa_policy(state, others, goal, spec, settings=None, dt=None):
    """
    Dynamic window over headings reachable within one second and speed
    ratios in [0, 1]; each candidate is rolled out at constant velocity for
    `predict_time` against constant-velocity neighbors.
    """
    settings = cfg.simulator.dwa if settings is None else settings
    dt = float(cfg.simulator.dt if dt is None else dt)
    reach = spec.turn_rate_max * float(cfg.simulator.plan_period)
    headings = state.heading + np.linspace(-reach, reach, int(settings.heading_samples))
    ratios = np.linspace(0.0, 1.0, int(settings.speed_samples))
    h_grid, r_grid = (a.ravel() for a in np.meshgrid(headings, ratios, indexing="ij"))

    neighbors = _neighbors(state, others, spec.sensing_range)
    steps = np.arange(1, int(round(float(settings.predict_time) / dt)) + 1) * dt
    velocities = (r_grid * spec.v_max)[:, None] * heading_unit(h_grid)
    path = state.position + velocities[:, None, :] * steps[None, :, None]  # (C, S, 2)

    clearance = np.full(len(h_grid), np.inf)
    admissible = np.ones(len(h_grid), dtype=bool)
    for other in neighbors:
        track = other.position + other.velocity * steps[:, None]  # (S, 2)
        gap = np.hypot(*(path - track[None]).transpose(2, 0, 1)).min(axis=1)
        clearance = np.minimum(clearance, gap)
        admissible &= gap >= 2.0 * max(spec.length, other.length)

    if not np.any(admissible):
        return Command(heading=state.heading, speed_ratio=0.0)
    theta_goal = bearing_deg(np.asarray(goal, dtype=np.float64) - state.position)
    influence = float(cfg.simulator.apf.influence)
    cost = (
        float(settings.w_goal) * np.abs(wrap_deg(h_grid - theta_goal)) / 180.0
        + float(settings.w_clear) * (1.0 - np.minimum(clearance, influence) / influence)
        + float(settings.w_speed) * (1.0 - r_grid)
    )
    cost = np.where(admissible, cost, np.inf)
    best = int(np.lexsort((-r_grid, np.abs(h_grid - state.heading), cost))[0])
    return Command(heading=float(h_grid[best] % 360.0), speed_ratio=float(r_grid[best]))


def planner_policy(kind, state, others, goal, spec, seed=0, step=0):
    """VO or MOA planner run from the obstacle's own perspective on true states"""
    variant = Variant.VO if kind is Policy.VO else Variant.MOA
    config = PlannerConfig.from_config(
        variant=variant,
        w_i=0.0,
        v_max=spec.v_max,
        ego_length=spec.length,
        sensing_range=spec.sensing_range,
    )
    snapshot = Snapshot(
        ego=state,
        obstacles=[ObstacleEstimate(state=other) for other in others if other.id != state.id],
        step=step,
    )
    result = plan(snapshot, LocalGoal.toward(state, goal), config, seed)
    return result.action


def behavior_policy(kind, state, others, goal, spec, seed=0, step=0):
    """
    Command of one obstacle vessel.

    Args:
        kind: Policy tag
        state: the vessel's true state
        others: true states of every other vessel, the ego included
        goal: the vessel's goal point (cooperative policies only)
        spec: EgoSpec holding the vessel's limits
    """
    kind = Policy(kind)
    if kind is Policy.CV or goal is None or spec.v_max <= 0.0:
        return cv_policy(state, spec)
    if kind is Policy.APF:
        return apf_policy(state, others, goal, spec)
    if kind is Policy.DWA:
        return dwa_policy(state, others, goal, spec)
    return planner_policy(kind, state, others, goal, spec, seed, step)
