#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""
Winding-number geometry between an ego vessel and an obstacle.

Frames: local ENU meters (x east, y north); headings are maritime degrees
clockwise from north. A positive winding increment is a counter-clockwise
rotation of the line-of-sight (LOS) vector, i.e. the obstacle passes on the
ego's left (LEFT); negative is RIGHT.
"""

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .common.util import bearing_deg, cross2, dot2, heading_mod, heading_unit, wrap_deg
from .config import cfg
from .errors import ZeroLosVector


@dataclass(frozen=True)
class VesselState:
    t: float
    pos: tuple
    heading: float
    speed: float
    id: str = "ego"
    length: float = 2.5
    beam: float = 1.4

    def __post_init__(self):
        object.__setattr__(self, "pos", (float(self.pos[0]), float(self.pos[1])))
        if not 0.0 <= self.heading < 360.0:
            raise ValueError(f"heading must lie in [0, 360), got {self.heading}")
        if self.speed < 0.0:
            raise ValueError(f"speed must be >= 0, got {self.speed}")
        if self.length <= 0.0 or self.beam <= 0.0:
            raise ValueError("length and beam must be positive")

    @property
    def position(self):
        return np.array(self.pos, dtype=np.float64)

    @property
    def velocity(self):
        return self.speed * heading_unit(self.heading)

    def moved(self, **changes):
        """Returns a copy with fields replaced (heading normalized to [0, 360))"""
        if "heading" in changes:
            changes["heading"] = heading_mod(changes["heading"])
        return replace(self, **changes)


@dataclass
class TrackPair:
    ego: Sequence[VesselState]
    obs: Sequence[VesselState]
    dt: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if len(self.ego) != len(self.obs):
            raise ValueError(
                f"tracks differ in length ({len(self.ego)} vs {len(self.obs)})"
            )
        for e, o in zip(self.ego, self.obs):
            if not math.isclose(e.t, o.t, abs_tol=1e-9):
                raise ValueError(f"tracks do not share timestamps ({e.t} vs {o.t})")

    def __len__(self):
        return len(self.ego)

    def los_vectors(self):
        ego = np.array([s.pos for s in self.ego], dtype=np.float64).reshape(-1, 2)
        obs = np.array([s.pos for s in self.obs], dtype=np.float64).reshape(-1, 2)
        return obs - ego

    def relative_velocities(self):
        ego = np.array([s.velocity for s in self.ego]).reshape(-1, 2)
        obs = np.array([s.velocity for s in self.obs]).reshape(-1, 2)
        return obs - ego


class PassingSide(enum.IntEnum):
    RIGHT = 0
    LEFT = 1
    UNDETERMINED = 2


@dataclass(frozen=True)
class PassingLabel:
    side: PassingSide
    winding_angle: float
    clearance_index: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CpaResult:
    tcpa: float
    dcpa: float
    rel_bearing: float


def los_vector(ego, obs):
    """LOS vector from the ego to the obstacle in the global frame"""
    return obs.position - ego.position


def winding_increments(los):
    """Signed LOS rotation between consecutive rows of an (N, 2) array.

    Vectorized over any leading dimensions of shape (..., N, 2); returns
    shape (..., N - 1). Raises ZeroLosVector when any LOS vector is zero.
    """
    los = np.asarray(los, dtype=np.float64)
    if np.any(np.hypot(los[..., 0], los[..., 1]) == 0.0):
        raise ZeroLosVector("LOS vector with zero norm")
    head, tail = los[..., :-1, :], los[..., 1:, :]
    return np.arctan2(cross2(head, tail), dot2(head, tail))


def winding_increment(lambda_t, lambda_t1):
    """atan2(lambda_t x lambda_t1, lambda_t . lambda_t1) in (-pi, pi]"""
    return float(winding_increments(np.stack([lambda_t, lambda_t1]))[0])


def winding_angle(pair, clearance_index):
    """Signed sum of LOS rotations from index 0 to clearance_index"""
    if not 0 <= clearance_index < len(pair):
        raise IndexError(
            f"clearance index {clearance_index} outside track of {len(pair)} samples"
        )
    if clearance_index == 0:
        return 0.0
    los = pair.los_vectors()[: clearance_index + 1]
    return float(np.sum(winding_increments(los)))


def winding_number(pair, clearance_index):
    """Winding angle normalized to signed turns (eta = 1 / 2pi)"""
    return winding_angle(pair, clearance_index) / (2.0 * math.pi)


def cpa_arrays(los, v_rel):
    """Vectorized constant-velocity CPA: returns (tcpa, dcpa) arrays.

    tcpa is clamped to 0 when the relative speed is zero or the closest
    approach lies in the past.
    """
    los = np.asarray(los, dtype=np.float64)
    v_rel = np.asarray(v_rel, dtype=np.float64)
    speed_sq = dot2(v_rel, v_rel)
    moving = speed_sq > 0.0
    tcpa = np.where(moving, -dot2(los, v_rel) / np.where(moving, speed_sq, 1.0), 0.0)
    tcpa = np.maximum(tcpa, 0.0)
    closest = los + v_rel * tcpa[..., None]
    return tcpa, np.hypot(closest[..., 0], closest[..., 1])


def cpa_metrics(ego, obs):
    """TCPA, DCPA and relative bearing of the obstacle seen from the ego"""
    los = los_vector(ego, obs)
    tcpa, dcpa = cpa_arrays(los, obs.velocity - ego.velocity)
    if np.allclose(los, 0.0):
        rel_bearing = 0.0
    else:
        rel_bearing = float(heading_mod(bearing_deg(los) - ego.heading))
    return CpaResult(tcpa=float(tcpa), dcpa=float(dcpa), rel_bearing=rel_bearing)


def relative_bearing(ego_heading, los):
    """Bearing of LOS vector(s) clockwise from the ego heading, in [0, 360)"""
    return heading_mod(bearing_deg(los) - np.asarray(ego_heading))


def clearance_index(pair, sensing_range=None):
    """Index at which the obstacle is considered to have cleared the ego.

    Precedence: first index k >= 1 where TCPA <= 0 (closest approach reached),
    else first index where the range exceeds the sensing range, else the last
    index.
    """
    return _clearance_from_arrays(
        pair.los_vectors(), pair.relative_velocities(), sensing_range
    )


def _clearance_from_arrays(los, v_rel, sensing_range=None):
    n = len(los)
    if n <= 1:
        return 0
    tcpa, _ = cpa_arrays(los, v_rel)
    reached = np.nonzero(tcpa[1:] <= 0.0)[0]
    if reached.size:
        return int(reached[0]) + 1
    if sensing_range is not None:
        outside = np.nonzero(np.hypot(los[1:, 0], los[1:, 1]) > sensing_range)[0]
        if outside.size:
            return int(outside[0]) + 1
    return n - 1


def side_from_angle(angle, deadband=None):
    """Maps signed winding angle(s) to PassingSide values with a dead-band"""
    if deadband is None:
        deadband = cfg.topology.deadband
    angle = np.asarray(angle, dtype=np.float64)
    side = np.full(angle.shape, int(PassingSide.UNDETERMINED), dtype=np.int64)
    side[angle > deadband] = int(PassingSide.LEFT)
    side[angle < -deadband] = int(PassingSide.RIGHT)
    return side if side.ndim else PassingSide(int(side))


def label_passing(pair, deadband=None, sensing_range: Optional[float] = None):
    """Topological passing label (LEFT / RIGHT / UNDETERMINED) of a track pair"""
    if len(pair) == 0:
        raise ValueError("cannot label an empty track pair")
    return label_from_arrays(
        pair.los_vectors(), pair.relative_velocities(), deadband, sensing_range
    )


def label_from_arrays(los, v_rel, deadband=None, sensing_range=None):
    """label_passing over (N, 2) arrays of LOS vectors and relative velocities"""
    los = np.asarray(los, dtype=np.float64)
    if sensing_range is None:
        sensing_range = cfg.topology.sensing_range
    index = _clearance_from_arrays(los, v_rel, sensing_range)
    angle = float(np.sum(winding_increments(los[: index + 1]))) if index else 0.0
    return PassingLabel(
        side=side_from_angle(angle, deadband),
        winding_angle=angle,
        clearance_index=index,
    )


def geometric_side_at_cpa(ego, obs):
    """Side of the ego on which the obstacle lies at the constant-velocity CPA.

    Independent of winding sums: the sign of cross(lambda, v_rel) tells the
    sense in which the LOS sweeps while closing.
    """
    cross = float(cross2(los_vector(ego, obs), obs.velocity - ego.velocity))
    if cross > 0:
        return PassingSide.LEFT
    if cross < 0:
        return PassingSide.RIGHT
    return PassingSide.UNDETERMINED


def propagate_cv(state, duration, dt):
    """Constant-velocity samples of a state from its time over [0, duration]"""
    steps = int(round(duration / dt))
    velocity = state.velocity
    return [
        state.moved(t=state.t + k * dt, pos=tuple(state.position + velocity * k * dt))
        for k in range(steps + 1)
    ]


def relative_heading(a, b):
    """Signed smallest rotation from heading a to heading b in degrees"""
    return wrap_deg(np.asarray(b) - np.asarray(a))
