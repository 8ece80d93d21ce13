#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from ..common.util import heading_unit, wrap_deg
from ..errors import NoFeasibleAction
from ..infogain import action_velocities
from .actions import Action, action_grid
from .config import PlannerConfig, Variant
from .costs import InfoTerms, deviation_field, domain_for, info_field, safety_field
from .domain import no_go_zone


@dataclass
class CostField:
    """Per-action cost breakdown over the full 360 x 5 grid"""

    headings: np.ndarray
    speed_ratios: np.ndarray
    J_d: np.ndarray
    J_s: np.ndarray
    J_i: np.ndarray
    total: np.ndarray
    in_no_go: np.ndarray

    def __len__(self):
        return len(self.headings)

    def index_of(self, action):
        return int(action.heading) * 5 + int(round(action.speed_ratio * 4))

    def at(self, action):
        i = self.index_of(action)
        return {
            "J_d": float(self.J_d[i]),
            "J_s": float(self.J_s[i]),
            "J_i": float(self.J_i[i]),
            "total": float(self.total[i]),
            "in_no_go": bool(self.in_no_go[i]),
        }

    def to_frame(self):
        return pd.DataFrame(
            {
                "heading_deg": self.headings.astype(np.int64),
                "speed_ratio": self.speed_ratios,
                "J_d": self.J_d,
                "J_s": self.J_s,
                "J_i": self.J_i,
                "total": self.total,
                "in_no_go": self.in_no_go.astype(np.int64),
            }
        )


@dataclass
class PlanResult:
    action: Action
    J_d: float = 0.0
    J_s: float = 0.0
    J_i: float = 0.0
    total: float = 0.0
    no_go_count: int = 0
    inside_c: list = field(default_factory=list)
    beliefs: dict = field(default_factory=dict)
    expected_p_left: dict = field(default_factory=dict)
    mean_winding: dict = field(default_factory=dict)
    risk_active: bool = False
    emergency: bool = False
    cost_field: Optional[CostField] = None


def in_range(snapshot, sensing_range):
    """Obstacle estimates within the sensing range of the ego"""
    ego = snapshot.ego.position
    return [
        estimate
        for estimate in snapshot.obstacles
        if np.hypot(*(estimate.state.position - ego)) <= sensing_range
    ]


def _argmin(cost_field, feasible, theta_tgt):
    """
    Exact grid argmin of the total cost over feasible actions. Ties resolve
    to the smallest |wrap(theta - theta_tgt)|, then the largest speed, then
    the smallest heading.
    """
    candidates = np.nonzero(feasible)[0]
    if candidates.size == 0:
        raise NoFeasibleAction("every action of the grid lies in the no-go zone")
    headings = cost_field.headings[candidates]
    order = np.lexsort(
        (
            headings,
            -cost_field.speed_ratios[candidates],
            np.abs(wrap_deg(headings - theta_tgt)),
            cost_field.total[candidates],
        )
    )
    return int(candidates[order[0]])


def _evaluate(snapshot, goal, config, seed, estimator, deviation):
    estimates = in_range(snapshot, config.sensing_range)
    states = [estimate.state for estimate in estimates]
    headings, ratios = action_grid()
    velocities = action_velocities(headings, ratios, config.v_max)
    domains = [domain_for(obs, config) for obs in states]

    zone = no_go_zone(snapshot.ego, states, domains, velocities, config.horizon_s)
    J_d = deviation(headings, ratios, velocities)
    if config.variant.is_vo:
        J_s = np.zeros(len(headings), dtype=np.float64)
    else:
        J_s = safety_field(snapshot.ego, states, domains, velocities, config.horizon_s)
    if config.variant.uses_information and config.w_i > 0.0:
        info = info_field(snapshot, estimates, headings, ratios, config, seed, estimator)
    else:
        info = InfoTerms(values=np.zeros(len(headings), dtype=np.float64))

    total = J_d + config.w_s * J_s + config.w_i * info.values
    cost_field = CostField(
        headings=headings,
        speed_ratios=ratios,
        J_d=J_d,
        J_s=J_s,
        J_i=info.values,
        total=total,
        in_no_go=zone.mask,
    )
    return cost_field, zone, info


def _result(cost_field, zone, info, index, return_field):
    gains = info.gains
    return PlanResult(
        action=Action(int(cost_field.headings[index]), float(cost_field.speed_ratios[index])),
        J_d=float(cost_field.J_d[index]),
        J_s=float(cost_field.J_s[index]),
        J_i=float(cost_field.J_i[index]),
        total=float(cost_field.total[index]),
        no_go_count=len(zone),
        inside_c=list(zone.inside_c),
        beliefs=dict(info.current),
        expected_p_left={i: float(g.p_left[index]) for i, g in gains.items()},
        mean_winding={
            i: float(g.mean_winding[index]) for i, g in gains.items() if g.mean_winding is not None
        },
        risk_active=bool(cost_field.J_s[index] > 0.0),
        cost_field=cost_field if return_field else None,
    )


def select_action(snapshot, goal, config=None, seed=0, estimator=None, return_field=False):
    """
    Selects argmin over A - A' of J_d + w_s * J_s + w_i * J_i.

    Args:
        snapshot: Snapshot of the ego state and obstacle estimates
        goal: LocalGoal with theta_wp, v_wp and the hysteresis target theta_tgt
        config: PlannerConfig (defaults to the global config)
        seed: master seed of the particle streams
        estimator: IntentionEstimator used by MOA_LSTM
        return_field: attach the full CostField to the result

    Raises NoFeasibleAction when every action is in the no-go zone.
    """
    config = PlannerConfig.from_config() if config is None else config

    def deviation(headings, ratios, _):
        return deviation_field(headings, ratios, goal, config)

    cost_field, zone, info = _evaluate(snapshot, goal, config, seed, estimator, deviation)
    index = _argmin(cost_field, ~zone.mask, goal.theta_tgt)
    return _result(cost_field, zone, info, index, return_field)


def vo_baseline(snapshot, goal, config=None, seed=0, estimator=None, return_field=False):
    """
    Velocity-obstacle baseline: the feasible grid velocity closest to the goal
    velocity, |v - v_goal| / (2 v_max), outside every obstacle's cone inflated
    by its collision radius. VO_PLUS adds w_i * J_i over individual obstacles.
    """
    config = PlannerConfig.from_config() if config is None else config
    if not config.variant.is_vo:
        config = config.with_variant(Variant.VO)
    v_goal = goal.v_wp * config.v_max * heading_unit(goal.theta_wp)

    def deviation(headings, ratios, velocities):
        gap = np.hypot(*(velocities - v_goal).T)
        if config.v_max <= 0.0:
            return np.zeros_like(gap)
        return np.clip(gap / (2.0 * config.v_max), 0.0, 1.0)

    cost_field, zone, info = _evaluate(snapshot, goal, config, seed, estimator, deviation)
    index = _argmin(cost_field, ~zone.mask, goal.theta_tgt)
    return _result(cost_field, zone, info, index, return_field)


def emergency_stop(ego):
    """Zero speed, holding the current heading (rounded onto the grid)"""
    return Action(int(np.round(ego.heading)) % 360, 0.0)


def plan(snapshot, goal, config=None, seed=0, estimator=None, return_field=False):
    """Runs the configured variant; escalates NoFeasibleAction to an emergency stop"""
    config = PlannerConfig.from_config() if config is None else config
    planner = vo_baseline if config.variant.is_vo else select_action
    try:
        return planner(snapshot, goal, config, seed, estimator, return_field)
    except NoFeasibleAction:
        logging.warning(
            f"No feasible action at t={snapshot.ego.t:.1f}, emergency stop"
        )
        return PlanResult(action=emergency_stop(snapshot.ego), no_go_count=1800, emergency=True)


def next_target(goal, result):
    """Hysteresis target: keep the last heading while a risk is active"""
    if result.risk_active and not result.emergency:
        return float(result.action.heading)
    return goal.theta_wp
