#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import logging
from dataclasses import dataclass

import numpy as np

from ..common.util import dot2
from ..topology import cpa_arrays
from .actions import action_grid


@dataclass(frozen=True)
class ShipDomain:
    """Circular collision (C) and risky (R) boundaries around an obstacle"""

    collision_radius: float
    risky_radius: float

    def __post_init__(self):
        if not 0.0 < self.collision_radius < self.risky_radius:
            raise ValueError(
                f"need 0 < collision_radius < risky_radius, got "
                f"{self.collision_radius}, {self.risky_radius}"
            )

    @classmethod
    def for_vessels(cls, ego_length, obs_length, collision_factor=2.0, risky_factor=2.0):
        collision = collision_factor * max(ego_length, obs_length)
        return cls(collision_radius=collision, risky_radius=risky_factor * collision)


@dataclass
class NoGoZone:
    """Boolean mask over the action grid plus the obstacles already inside C"""

    mask: np.ndarray
    inside_c: list

    def __contains__(self, action):
        headings, ratios = action_grid()
        index = action.heading * 5 + int(round(action.speed_ratio * 4))
        assert headings[index] == action.heading and ratios[index] == action.speed_ratio
        return bool(self.mask[index])

    def __len__(self):
        return int(self.mask.sum())


def velocity_obstacle_mask(los, obs_velocity, ego_velocities, radius, horizon_s):
    """
    True where the ego velocity carries the ego inside the obstacle's disc of
    `radius` within `horizon_s` under constant velocities: the time-limited
    velocity obstacle bounded by the tangent lines to the disc.

    When the ego already sits inside the disc, every velocity that closes the
    range is forbidden.
    """
    los = np.asarray(los, dtype=np.float64)
    w = np.asarray(obs_velocity, dtype=np.float64) - np.asarray(ego_velocities)
    if np.hypot(*los) < radius:
        return dot2(los, w) < 0.0
    w_sq = dot2(w, w)
    moving = w_sq > 0.0
    t_star = np.where(moving, -dot2(los, w) / np.where(moving, w_sq, 1.0), 0.0)
    t_star = np.clip(t_star, 0.0, horizon_s)
    closest = los + w * t_star[..., None]
    return np.hypot(closest[..., 0], closest[..., 1]) < radius


def no_go_zone(ego, obstacles, domains, ego_velocities, horizon_s=30.0):
    """
    Actions whose constant-velocity execution enters some obstacle's collision
    boundary C within `horizon_s`.

    Args:
        ego: VesselState
        obstacles: nominal obstacle VesselStates
        domains: ShipDomain per obstacle
        ego_velocities: (A, 2) ego velocity of every grid action
    """
    mask = np.zeros(len(ego_velocities), dtype=bool)
    inside_c = []
    for obs, domain in zip(obstacles, domains):
        los = obs.position - ego.position
        if np.hypot(*los) < domain.collision_radius:
            inside_c.append(obs.id)
        mask |= velocity_obstacle_mask(
            los, obs.velocity, ego_velocities, domain.collision_radius, horizon_s
        )
    if inside_c:
        logging.warning(f"Ego inside collision boundary of {inside_c} at t={ego.t:.1f}")
    return NoGoZone(mask=mask, inside_c=inside_c)


def dcpa_field(ego, obs, ego_velocities):
    """(tcpa, dcpa) of one obstacle under every ego velocity"""
    los = obs.position - ego.position
    return cpa_arrays(
        np.broadcast_to(los, np.shape(ego_velocities)), obs.velocity - ego_velocities
    )
