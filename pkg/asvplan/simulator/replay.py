#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""
Replay of a recorded two-ship encounter from an AIS track table.

The table holds one row per vessel fix in a local ENU frame:

    t_s, id, x_m, y_m, heading_deg, speed_mps[, length_m]

Positions from lat/lon sources must be projected to meters around a local
origin first (e.g. an equirectangular projection at the mean latitude).
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..classifier.belief import PassingBelief
from ..common import rng
from ..common.util import heading_mod, heading_unit
from ..config import cfg
from ..errors import MalformedCsv
from ..infogain import NoiseModel
from ..topology import VesselState
from .episode import _Vessel, ego_planner_config, simulate
from .kinematics import EgoSpec


AIS_COLUMNS = ["t_s", "id", "x_m", "y_m", "heading_deg", "speed_mps"]


@dataclass
class Track:
    """Recorded track, linearly interpolated between fixes and held after the last"""

    t: np.ndarray
    xy: np.ndarray
    heading: np.ndarray  # unwrapped degrees
    speed: np.ndarray

    @classmethod
    def from_frame(cls, frame):
        frame = frame.sort_values("t_s", kind="stable")
        return cls(
            t=frame.t_s.to_numpy(dtype=np.float64),
            xy=frame[["x_m", "y_m"]].to_numpy(dtype=np.float64),
            heading=np.rad2deg(np.unwrap(np.deg2rad(frame.heading_deg.to_numpy(dtype=np.float64)))),
            speed=frame.speed_mps.to_numpy(dtype=np.float64),
        )

    def state_at(self, t, template):
        x = float(np.interp(t, self.t, self.xy[:, 0]))
        y = float(np.interp(t, self.t, self.xy[:, 1]))
        heading = heading_mod(float(np.interp(t, self.t, self.heading)))
        speed = max(float(np.interp(t, self.t, self.speed)), 0.0)
        return template.moved(t=t, pos=(x, y), heading=heading, speed=speed)


@dataclass(frozen=True)
class ReplayVessel:
    id: str
    length: float
    heading: float
    speed: float


# own ship A and the much larger vessel B of the bundled collision reconstruction
RECONSTRUCTED_VESSELS = (
    ReplayVessel(id="A", length=12.6, heading=100.0, speed=5.8),
    ReplayVessel(id="B", length=225.0, heading=225.0, speed=5.7),
)
MEETING_TIME = 480.0


def reconstructed_tracks(duration=None, dt=1.0, meeting_time=MEETING_TIME):
    """
    Reconstructed AIS table: both vessels hold course and speed and reach
    the origin together at `meeting_time`.
    """
    duration = float(cfg.replay.duration if duration is None else duration)
    times = np.arange(0.0, duration + dt / 2.0, dt)
    frames = []
    for vessel in RECONSTRUCTED_VESSELS:
        velocity = vessel.speed * heading_unit(vessel.heading)
        xy = (times - meeting_time)[:, None] * velocity[None, :]
        frames.append(
            pd.DataFrame(
                {
                    "t_s": times,
                    "id": vessel.id,
                    "x_m": xy[:, 0],
                    "y_m": xy[:, 1],
                    "heading_deg": vessel.heading,
                    "speed_mps": vessel.speed,
                    "length_m": vessel.length,
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def load_ais_csv(path):
    """Reads and validates an AIS track table; raises MalformedCsv"""
    try:
        frame = pd.read_csv(path, dtype={"id": str}, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise MalformedCsv(f"{path}: cannot parse AIS table ({e})") from e
    return validate_ais_frame(frame, source=path)


def validate_ais_frame(frame, source="AIS table"):
    missing = [c for c in AIS_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedCsv(f"{source}: missing columns {missing}")
    frame = frame.copy()
    frame["id"] = frame["id"].astype(str)
    numeric = [c for c in AIS_COLUMNS if c != "id"]
    if "length_m" in frame.columns:
        numeric.append("length_m")
    for column in numeric:
        values = pd.to_numeric(frame[column], errors="coerce")
        if values.isna().any() or not np.all(np.isfinite(values)):
            raise MalformedCsv(f"{source}: non-numeric or missing values in {column}")
        frame[column] = values.astype(np.float64)
    if (frame.speed_mps < 0).any():
        raise MalformedCsv(f"{source}: negative speed")
    for vessel_id, group in frame.groupby("id"):
        if np.any(np.diff(np.sort(group.t_s.to_numpy())) <= 0):
            raise MalformedCsv(f"{source}: duplicate timestamps for vessel {vessel_id}")
    return frame


class RandomBeliefEstimator:
    """Stand-in classifier emitting uniformly random passing beliefs"""

    def __init__(self, seed=0):
        self.seed = seed

    def belief(self, window):
        key = int(round(window.fixes[-1].t * 1000.0))
        gen = rng.generator(self.seed, "random_belief", str(window.obstacle_id), key)
        return PassingBelief.from_left(gen.uniform())


def replay_spec(length=None):
    """Ship-scale own-ship limits for replays"""
    section = cfg.replay.ego
    return EgoSpec(
        length=float(section.length if length is None else length),
        beam=float(section.beam),
        sensing_range=float(section.sensing_range),
        v_max=float(section.v_max),
        turn_rate_max=float(section.turn_rate_max),
        accel_max=float(section.accel_max),
    )


def _initial_state(track, vessel_id, length, beam):
    return VesselState(
        t=float(track.t[0]),
        pos=tuple(track.xy[0]),
        heading=heading_mod(float(track.heading[0])),
        speed=float(track.speed[0]),
        id=vessel_id,
        length=length,
        beam=beam,
    )


def obstacle_beam(length):
    """Beam of a replayed vessel, which AIS tables carry only as a length"""
    return float(cfg.replay.beam_ratio) * float(length)


def replay_accident(
    ais,
    ego_vessel_id,
    variant=None,
    seed=0,
    historical=False,
    estimator=None,
    rule_compliance=True,
    duration=None,
):
    """
    Re-plays a recorded encounter. Every vessel but the ego follows its
    recorded track verbatim. The ego starts from its first fix and either
    replays its recorded track (`historical`) or is re-planned by `variant`
    toward its last recorded position.

    Args:
        ais: path to an AIS CSV, or an already loaded DataFrame
        ego_vessel_id: id of the own ship in the table

    Returns the EpisodeLog; its belief trace holds the passing prediction of
    each other vessel.
    """
    frame = load_ais_csv(ais) if isinstance(ais, str) else validate_ais_frame(ais)
    ego_vessel_id = str(ego_vessel_id)
    if ego_vessel_id not in set(frame.id):
        raise MalformedCsv(f"ego vessel {ego_vessel_id!r} not in the AIS table")
    frame = frame.assign(t_s=frame.t_s - frame.t_s.min())
    variant = cfg.planner.variant if variant is None else variant
    duration = float(cfg.replay.duration if duration is None else duration)

    def length_of(group, default):
        return float(group.length_m.iloc[0]) if "length_m" in group.columns else default

    ego_rows = frame[frame.id == ego_vessel_id]
    spec = replay_spec(length_of(ego_rows, float(cfg.replay.ego.length)))
    ego_track = Track.from_frame(ego_rows)
    ego = _initial_state(ego_track, "ego", spec.length, spec.beam)
    ego = ego.moved(speed=min(ego.speed, spec.v_max))

    vessels = []
    for vessel_id, group in frame[frame.id != ego_vessel_id].groupby("id", sort=True):
        length = length_of(group, float(cfg.ego.length))
        track = Track.from_frame(group)
        beam = obstacle_beam(length)
        state = _initial_state(track, vessel_id, length, beam)
        vessels.append(
            _Vessel(
                state=state,
                spec=EgoSpec.for_agent(length, beam, max(state.speed, 0.0)),
                noise=NoiseModel(),
                track=track,
            )
        )

    config = ego_planner_config(
        variant,
        spec,
        rule_compliance=rule_compliance,
        horizon_s=float(cfg.replay.horizon_s),
    )
    log = simulate(
        ego,
        [tuple(ego_track.xy[-1])],
        vessels,
        variant,
        spec,
        config=config,
        seed=seed,
        estimator=estimator,
        ego_track=ego_track if historical else None,
        timeout=duration,
        name=f"replay-{ego_vessel_id}",
    )
    logging.info(
        f"Replay of {ego_vessel_id}: {log.outcome.value}, min separation "
        f"{log.min_cpa:.1f} m"
    )
    return log
