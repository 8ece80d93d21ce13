#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import functools
from dataclasses import dataclass

import numpy as np

from ..common.util import action_headings


SPEED_RATIOS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True, order=True)
class Action:
    """Ego command on the action grid: absolute heading (deg) and speed ratio of v_max"""

    heading: int
    speed_ratio: float

    def __post_init__(self):
        if int(self.heading) != self.heading or not 0 <= self.heading < 360:
            raise ValueError(f"action heading must be an integer in [0, 360), got {self.heading}")
        if self.speed_ratio not in SPEED_RATIOS:
            raise ValueError(f"speed ratio must be one of {SPEED_RATIOS}, got {self.speed_ratio}")
        object.__setattr__(self, "heading", int(self.heading))
        object.__setattr__(self, "speed_ratio", float(self.speed_ratio))


@functools.lru_cache(maxsize=1)
def action_grid():
    """(headings, speed_ratios) arrays of the 360 x 5 grid, heading-major"""
    headings = np.repeat(action_headings(1), len(SPEED_RATIOS))
    ratios = np.tile(np.array(SPEED_RATIOS, dtype=np.float64), 360)
    headings.setflags(write=False)
    ratios.setflags(write=False)
    return headings, ratios


@functools.lru_cache(maxsize=1)
def action_space():
    """All 1,800 grid actions in grid order"""
    headings, ratios = action_grid()
    return tuple(Action(int(h), float(r)) for h, r in zip(headings, ratios))


def nearest_action(heading, speed_ratio):
    """Grid action closest to a continuous command"""
    grid_heading = int(np.round(np.mod(heading, 360.0))) % 360
    ratios = np.array(SPEED_RATIOS)
    grid_ratio = float(ratios[np.argmin(np.abs(ratios - speed_ratio))])
    return Action(grid_heading, grid_ratio)
