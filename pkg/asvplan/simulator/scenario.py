#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from ..common import rng
from ..common.util import bearing_deg, heading_unit
from ..config import cfg
from ..errors import CorruptFile, VersionMismatch
from ..infogain import NoiseModel
from ..planner import ObstacleEstimate, Snapshot
from ..topology import VesselState


SCENARIO_FORMAT = "asvplan.scenario"
SCENARIO_VERSION = 1


class Mix(str, enum.Enum):
    MIXED_80_20 = "MIXED_80_20"
    NON_COOP_ONLY = "NON_COOP_ONLY"


class Policy(str, enum.Enum):
    CV = "CV"
    APF = "APF"
    DWA = "DWA"
    VO = "VO"
    MOA = "MOA"

    @property
    def cooperative(self):
        return self is not Policy.CV


COOPERATIVE_POLICIES = (Policy.APF, Policy.DWA, Policy.VO, Policy.MOA)


@dataclass(frozen=True)
class ObstacleSpec:
    state: VesselState
    policy: Policy = Policy.CV
    noise: NoiseModel = field(default_factory=NoiseModel)
    goal: Optional[tuple] = None

    @property
    def id(self):
        return self.state.id

    def to_dict(self):
        return {
            "id": str(self.state.id),
            "x": self.state.pos[0],
            "y": self.state.pos[1],
            "heading": self.state.heading,
            "speed": self.state.speed,
            "length": self.state.length,
            "beam": self.state.beam,
            "policy": self.policy.value,
            "noise": {
                "sigma_x": self.noise.sigma_x,
                "sigma_y": self.noise.sigma_y,
                "sigma_theta": self.noise.sigma_theta,
                "sigma_v": self.noise.sigma_v,
            },
            "goal": None if self.goal is None else [float(v) for v in self.goal],
        }

    @classmethod
    def from_dict(cls, entry):
        state = VesselState(
            t=0.0,
            pos=(float(entry["x"]), float(entry["y"])),
            heading=float(entry["heading"]),
            speed=float(entry["speed"]),
            id=str(entry["id"]),
            length=float(entry["length"]),
            beam=float(entry.get("beam", 0.56 * float(entry["length"]))),
        )
        noise = NoiseModel(**{k: float(v) for k, v in (entry.get("noise") or {}).items()})
        goal = entry.get("goal")
        return cls(
            state=state,
            policy=Policy(entry.get("policy", "CV")),
            noise=noise,
            goal=None if goal is None else (float(goal[0]), float(goal[1])),
        )


@dataclass(frozen=True)
class Scenario:
    """
    Everything needed to replay an episode: arena, ego start and goal (or a
    waypoint loop), obstacle initial states with their behavior policies and
    AIS noise, and the seed.
    """

    seed: int
    start: tuple = (0.0, -100.0)
    goal: tuple = (0.0, 100.0)
    arena: float = 200.0
    obstacles: tuple = ()
    mix: Mix = Mix.NON_COOP_ONLY
    noise: bool = True
    waypoints: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "mix", Mix(self.mix))
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "goal", tuple(float(v) for v in self.goal))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(
            self, "waypoints", tuple(tuple(float(v) for v in wp) for wp in self.waypoints)
        )
        if np.allclose(self.start, self.goal):
            raise ValueError("scenario start and goal must differ")
        half = self.arena / 2.0
        for obs in self.obstacles:
            if max(abs(obs.state.pos[0]), abs(obs.state.pos[1])) > half + 1e-9:
                raise ValueError(f"obstacle {obs.id} lies outside the arena at t=0")
        ids = [str(obs.id) for obs in self.obstacles]
        if len(set(ids)) != len(ids) or "ego" in ids:
            raise ValueError("obstacle ids must be unique and differ from 'ego'")

    @property
    def route(self):
        """Waypoints the ego follows; the last is the goal"""
        return self.waypoints + (self.goal,) if self.waypoints else (self.goal,)

    @property
    def n_cooperative(self):
        return sum(1 for obs in self.obstacles if obs.policy.cooperative)

    def to_dict(self):
        return {
            "format": SCENARIO_FORMAT,
            "format_version": SCENARIO_VERSION,
            "name": self.name,
            "seed": int(self.seed),
            "arena": float(self.arena),
            "start": list(self.start),
            "goal": list(self.goal),
            "waypoints": [list(wp) for wp in self.waypoints],
            "mix": self.mix.value,
            "noise": bool(self.noise),
            "obstacles": [obs.to_dict() for obs in self.obstacles],
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise CorruptFile("scenario must be a mapping")
        if data.get("format", SCENARIO_FORMAT) != SCENARIO_FORMAT:
            raise CorruptFile(f"not a scenario file: format {data.get('format')!r}")
        version = data.get("format_version", SCENARIO_VERSION)
        if version != SCENARIO_VERSION:
            raise VersionMismatch(f"unsupported scenario version {version}")
        try:
            return cls(
                seed=int(data.get("seed", 0)),
                start=tuple(data.get("start", cfg.scenario.start)),
                goal=tuple(data.get("goal", cfg.scenario.goal)),
                arena=float(data.get("arena", cfg.scenario.arena)),
                obstacles=tuple(
                    ObstacleSpec.from_dict(entry) for entry in data.get("obstacles") or []
                ),
                mix=data.get("mix", Mix.NON_COOP_ONLY.value),
                noise=bool(data.get("noise", True)),
                waypoints=tuple(tuple(wp) for wp in data.get("waypoints") or []),
                name=str(data.get("name", "")),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CorruptFile(f"malformed scenario ({e})") from e


def save_scenario(sc, path):
    with open(path, "w", encoding="utf-8", newline="\n") as stream:
        yaml.safe_dump(sc.to_dict(), stream, sort_keys=False)


def load_scenario(path):
    """Reads a scenario YAML file; raises CorruptFile on malformed input"""
    try:
        with open(path, encoding="utf-8") as stream:
            data = yaml.safe_load(stream)
    except yaml.YAMLError as e:
        raise CorruptFile(f"{path}: invalid YAML ({e})") from e
    return Scenario.from_dict(data)


def boundary_goal(pos, heading, arena):
    """Point where the ray from `pos` along `heading` leaves the square arena"""
    half = arena / 2.0
    direction = heading_unit(heading)
    hits = []
    for axis in range(2):
        if abs(direction[axis]) > 1e-12:
            bound = half if direction[axis] > 0 else -half
            hits.append((bound - pos[axis]) / direction[axis])
    distance = max(min(hits), 0.0)
    point = np.asarray(pos, dtype=np.float64) + direction * distance
    return (float(point[0]), float(point[1]))


def policy_for(seed, obstacle_id):
    """Cooperative strategy of an obstacle, fixed by the scenario seed alone"""
    gen = rng.generator(seed, "policy", str(obstacle_id))
    return COOPERATIVE_POLICIES[int(gen.integers(len(COOPERATIVE_POLICIES)))]


def randomize_scenario(n, mix=Mix.NON_COOP_ONLY, seed=0, noise=True, settings=None):
    """
    Random scenario with `n` obstacles: lengths and speeds uniform in the
    configured ranges, headings uniform in [0, 360), positions uniform in the
    arena outside the start/goal clearance. With the MIXED_80_20 mix, 20% of
    the obstacles run a cooperative planner chosen per obstacle from the seed.
    """
    settings = cfg.scenario if settings is None else settings
    mix = Mix(mix)
    if n < 0:
        raise ValueError(f"obstacle count must be >= 0, got {n}")
    gen = rng.generator(seed, "scenario")
    arena = float(settings.arena)
    half = arena / 2.0
    start = tuple(float(v) for v in settings.start)
    goal = tuple(float(v) for v in settings.goal)
    clearance = float(settings.clearance)

    n_coop = int(round(float(settings.cooperative_fraction) * n)) if mix is Mix.MIXED_80_20 else 0
    cooperative = set(int(i) for i in gen.permutation(n)[:n_coop])

    obstacles = []
    for i in range(n):
        while True:
            pos = gen.uniform(-half, half, size=2)
            if min(math.dist(pos, start), math.dist(pos, goal)) > clearance:
                break
        length = float(gen.uniform(*settings.obstacle_length))
        speed = float(gen.uniform(*settings.obstacle_speed))
        heading = float(gen.uniform(0.0, 360.0)) % 360.0
        sigma = NoiseModel.draw(
            gen, settings.sigma_pos, settings.sigma_heading, settings.sigma_speed
        )
        obstacle_id = f"o{i:02d}"
        state = VesselState(
            t=0.0,
            pos=(float(pos[0]), float(pos[1])),
            heading=heading,
            speed=speed,
            id=obstacle_id,
            length=length,
            beam=0.56 * length,
        )
        if i in cooperative:
            policy = policy_for(seed, obstacle_id)
            target = boundary_goal(state.pos, heading, arena)
        else:
            policy, target = Policy.CV, None
        obstacles.append(
            ObstacleSpec(
                state=state,
                policy=policy,
                noise=sigma if noise else NoiseModel(),
                goal=target,
            )
        )
    logging.debug(f"Scenario seed {seed}: {n} obstacles, {n_coop} cooperative")
    return Scenario(
        seed=int(seed),
        start=start,
        goal=goal,
        arena=arena,
        obstacles=tuple(obstacles),
        mix=mix,
        noise=bool(noise),
    )


def start_heading(sc):
    """Initial ego heading: bearing toward the first route point"""
    first = np.asarray(sc.route[0]) - np.asarray(sc.start)
    return float(bearing_deg(first))


def _vessel_from_dict(entry, default_id):
    return VesselState(
        t=float(entry.get("t", 0.0)),
        pos=(float(entry["x"]), float(entry["y"])),
        heading=float(entry["heading"]) % 360.0,
        speed=float(entry["speed"]),
        id=str(entry.get("id", default_id)),
        length=float(entry.get("length", cfg.ego.length)),
        beam=float(entry.get("beam", cfg.ego.beam)),
    )


def load_snapshot(path):
    """
    Reads a single planning snapshot:

        ego: {x, y, heading, speed[, length]}
        obstacles: [{id, x, y, heading, speed, length, noise: {...}}, ...]
        speed_ratio: fixed speed ratio for gain-field queries (optional)
        seed, step: particle stream keys (optional)

    Returns (Snapshot, extras dict). Raises CorruptFile on malformed input.
    """
    try:
        with open(path, encoding="utf-8") as stream:
            data = yaml.safe_load(stream)
    except yaml.YAMLError as e:
        raise CorruptFile(f"{path}: invalid YAML ({e})") from e
    if not isinstance(data, dict) or "ego" not in data:
        raise CorruptFile(f"{path}: snapshot needs an `ego` entry")
    try:
        ego = _vessel_from_dict(data["ego"], "ego").moved(id="ego")
        estimates = []
        for i, entry in enumerate(data.get("obstacles") or []):
            noise = NoiseModel(**{k: float(v) for k, v in (entry.get("noise") or {}).items()})
            estimates.append(
                ObstacleEstimate(state=_vessel_from_dict(entry, f"o{i:02d}"), noise=noise)
            )
        step = int(data.get("step", 0))
        extras = {
            "seed": int(data.get("seed", 0)),
            "speed_ratio": data.get("speed_ratio"),
            "name": str(data.get("name", "")),
        }
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptFile(f"{path}: malformed snapshot ({e})") from e
    return Snapshot(ego=ego, obstacles=estimates, step=step), extras
