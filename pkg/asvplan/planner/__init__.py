#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from .actions import SPEED_RATIOS, Action, action_grid, action_space, nearest_action
from .clustering import ClusterSet, cluster_obstacles
from .config import PlannerConfig, Variant
from .costs import (
    LocalGoal,
    ObstacleEstimate,
    Snapshot,
    deviation_cost,
    in_encounter,
    info_cost,
    info_field,
    safety_cost,
)
from .domain import NoGoZone, ShipDomain, no_go_zone
from .select import (
    CostField,
    PlanResult,
    emergency_stop,
    next_target,
    plan,
    select_action,
    vo_baseline,
)


__all__ = [
    "SPEED_RATIOS",
    "Action",
    "ClusterSet",
    "CostField",
    "LocalGoal",
    "NoGoZone",
    "ObstacleEstimate",
    "PlanResult",
    "PlannerConfig",
    "ShipDomain",
    "Snapshot",
    "Variant",
    "action_grid",
    "action_space",
    "cluster_obstacles",
    "deviation_cost",
    "emergency_stop",
    "in_encounter",
    "info_cost",
    "info_field",
    "next_target",
    "nearest_action",
    "no_go_zone",
    "plan",
    "safety_cost",
    "select_action",
    "vo_baseline",
]
