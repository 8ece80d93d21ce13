#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from dataclasses import dataclass

import numpy as np

from ..common.util import heading_mod, heading_unit, wrap_deg
from ..config import cfg


@dataclass(frozen=True)
class Command:
    """Continuous heading / speed-ratio command; grid Actions satisfy the same protocol"""

    heading: float
    speed_ratio: float


@dataclass(frozen=True)
class EgoSpec:
    length: float = 2.5
    beam: float = 1.4
    sensing_range: float = 100.0
    v_max: float = 2.5
    turn_rate_max: float = 45.0  # deg/s
    accel_max: float = 1.0  # m/s^2

    def __post_init__(self):
        if self.length <= 0 or self.beam <= 0 or self.sensing_range <= 0:
            raise ValueError("length, beam and sensing_range must be positive")
        if self.v_max < 0 or self.turn_rate_max <= 0 or self.accel_max <= 0:
            raise ValueError("need v_max >= 0 and positive turn and acceleration limits")

    @classmethod
    def from_config(cls, section=None):
        section = cfg.ego if section is None else section
        return cls(
            length=float(section.length),
            beam=float(section.beam),
            sensing_range=float(section.sensing_range),
            v_max=float(section.v_max),
            turn_rate_max=float(section.turn_rate_max),
            accel_max=float(section.accel_max),
        )

    @classmethod
    def for_agent(cls, length, beam, cruise_speed, sensing_range=None):
        """Obstacle vessel limits: ego rate limits, top speed at its cruise speed"""
        ego = cls.from_config()
        return cls(
            length=length,
            beam=beam,
            sensing_range=ego.sensing_range if sensing_range is None else sensing_range,
            v_max=cruise_speed,
            turn_rate_max=ego.turn_rate_max,
            accel_max=ego.accel_max,
        )


def step_kinematics(s, cmd, spec, dt):
    """
    First-order kinematics: heading slews toward cmd.heading along the shorter
    arc by at most turn_rate_max * dt (a 180 deg request turns clockwise),
    speed moves toward cmd.speed_ratio * v_max by at most accel_max * dt and
    the position integrates the updated velocity.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    max_turn = spec.turn_rate_max * dt
    turn = float(np.clip(wrap_deg(cmd.heading - s.heading), -max_turn, max_turn))
    heading = heading_mod(s.heading + turn)

    target = float(np.clip(cmd.speed_ratio, 0.0, 1.0)) * spec.v_max
    max_dv = spec.accel_max * dt
    speed = max(s.speed + float(np.clip(target - s.speed, -max_dv, max_dv)), 0.0)

    pos = s.position + speed * heading_unit(heading) * dt
    return s.moved(t=s.t + dt, pos=tuple(pos), heading=heading, speed=speed)
