#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""
Per-timestep input features of the passing classifier:

    (dx, dy, range, sin(psi), cos(psi), sin(los), cos(los))

with dx, dy the LOS vector from ego to obstacle, psi the obstacle heading
and los the LOS bearing, both clockwise from north.
"""

import collections
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..config import cfg
from ..errors import EmptyWindow
from ..topology import VesselState


FEATURE_NAMES = ("dx", "dy", "range", "sin_psi", "cos_psi", "sin_los", "cos_los")
NUM_FEATURES = len(FEATURE_NAMES)


@dataclass
class ObservationWindow:
    obstacle_id: str
    fixes: Sequence[VesselState]
    ego: Sequence[VesselState]
    horizon: Optional[float] = None

    def __post_init__(self):
        if len(self.fixes) == 0:
            raise EmptyWindow(f"window of obstacle {self.obstacle_id} holds no fixes")
        if len(self.fixes) != len(self.ego):
            raise ValueError("fixes and ego states must pair one-to-one")
        times = np.array([fix.t for fix in self.fixes], dtype=np.float64)
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("window timestamps must be strictly increasing")
        horizon = self.horizon
        if horizon is None:
            horizon = float(cfg.classifier.window)
        if times[-1] - times[0] > horizon:
            raise ValueError(
                f"window spans {times[-1] - times[0]:.3f} s, above horizon {horizon} s"
            )


def feature_arrays(ego_pos, obs_pos, obs_heading):
    """Vectorized features from (T, 2) positions and (T,) headings in degrees.

    Rows with coincident positions have range 0; callers drop them.
    """
    delta = np.asarray(obs_pos, dtype=np.float64) - np.asarray(ego_pos, dtype=np.float64)
    dist = np.hypot(delta[..., 0], delta[..., 1])
    safe = np.where(dist > 0.0, dist, 1.0)
    psi = np.deg2rad(np.asarray(obs_heading, dtype=np.float64))
    return np.stack(
        [
            delta[..., 0],
            delta[..., 1],
            dist,
            np.sin(psi),
            np.cos(psi),
            delta[..., 0] / safe,
            delta[..., 1] / safe,
        ],
        axis=-1,
    )


def extract_features(window):
    """Returns a (T, 7) float64 array, one row per usable fix of the window"""
    ego_pos = np.array([s.pos for s in window.ego], dtype=np.float64)
    obs_pos = np.array([s.pos for s in window.fixes], dtype=np.float64)
    headings = np.array([s.heading for s in window.fixes], dtype=np.float64)
    features = feature_arrays(ego_pos, obs_pos, headings)
    # coincident fixes carry no LOS angle
    features = features[features[:, 2] > 0.0]
    if len(features) == 0:
        raise EmptyWindow(
            f"window of obstacle {window.obstacle_id} holds only coincident fixes"
        )
    return features


class WindowBuffer:
    """
    Sliding observation window kept per obstacle while a scenario runs:
    the latest `horizon` seconds of (ego state, obstacle fix) pairs.
    """

    def __init__(self, obstacle_id, horizon=None):
        self.obstacle_id = obstacle_id
        self.horizon = float(cfg.classifier.window if horizon is None else horizon)
        self._pairs = collections.deque()

    def __len__(self):
        return len(self._pairs)

    def push(self, ego, fix):
        if self._pairs and fix.t <= self._pairs[-1][1].t:
            return
        self._pairs.append((ego, fix))
        # keep at most `horizon` samples at 1 Hz, span strictly below horizon
        while self._pairs and fix.t - self._pairs[0][1].t >= self.horizon:
            self._pairs.popleft()

    def window(self):
        if not self._pairs:
            raise EmptyWindow(f"no fixes received for obstacle {self.obstacle_id}")
        ego, fixes = zip(*self._pairs)
        return ObservationWindow(self.obstacle_id, list(fixes), list(ego), self.horizon)
