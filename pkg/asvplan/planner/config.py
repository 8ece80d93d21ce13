#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import enum
from dataclasses import dataclass, fields, replace

from ..config import cfg


class Variant(str, enum.Enum):
    MOA_LSTM = "MOA_LSTM"
    MOA_PLUS = "MOA_PLUS"
    MOA = "MOA"
    VO_PLUS = "VO_PLUS"
    VO = "VO"

    @property
    def is_vo(self):
        return self in (Variant.VO, Variant.VO_PLUS)

    @property
    def uses_information(self):
        return self in (Variant.MOA_LSTM, Variant.MOA_PLUS, Variant.VO_PLUS)

    @property
    def clusters_obstacles(self):
        return self in (Variant.MOA_LSTM, Variant.MOA_PLUS)


# PlannerConfig field -> dotted config key (the keys accepted in override files)
FIELD_PATHS = {
    "variant": "planner.variant",
    "w_f": "planner.weights.w_f",
    "w_f2": "planner.weights.w_f2",
    "w_g": "planner.weights.w_g",
    "w_s": "planner.weights.w_s",
    "w_i": "planner.weights.w_i",
    "rule_compliance": "planner.rule_compliance.enabled",
    "rule_factor": "planner.rule_compliance.factor",
    "sensing_range": "planner.sensing_range",
    "particles": "infogain.particles",
    "horizon_s": "planner.horizon_s",
    "tau_t": "planner.clustering.tau_t",
    "tau_d": "planner.clustering.tau_d",
    "tau_b": "planner.clustering.tau_b",
    "collision_factor": "ship_domain.collision_factor",
    "risky_factor": "ship_domain.risky_factor",
    "v_max": "ego.v_max",
    "ego_length": "ego.length",
}


@dataclass(frozen=True)
class PlannerConfig:
    variant: Variant = Variant.MOA_LSTM
    w_f: float = 1.0
    w_f2: float = 0.5
    w_g: float = 0.3
    w_s: float = 2.0
    w_i: float = 1.0
    rule_compliance: bool = False
    rule_factor: float = 0.3
    sensing_range: float = 100.0
    particles: int = 1000
    horizon_s: float = 30.0
    tau_t: float = 30.0
    tau_d: float = 20.0
    tau_b: float = 30.0
    collision_factor: float = 2.0
    risky_factor: float = 2.0
    v_max: float = 2.5
    ego_length: float = 2.5

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        for name in ("w_f", "w_f2", "w_g", "w_s", "w_i"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not 0.0 <= self.rule_factor <= 1.0:
            raise ValueError(f"rule_factor must lie in [0, 1], got {self.rule_factor}")
        if self.particles < 1 or self.sensing_range <= 0 or self.horizon_s <= 0:
            raise ValueError("particles, sensing_range and horizon_s must be positive")
        if self.collision_factor <= 0 or self.risky_factor <= 1.0:
            raise ValueError("ship domain needs collision_factor > 0, risky_factor > 1")

    @classmethod
    def from_config(cls, **overrides):
        """Reads every field from the global config at its FIELD_PATHS key"""
        values = {}
        for field in fields(cls):
            value = cfg[FIELD_PATHS[field.name]]
            values[field.name] = field.type(value) if field.type in (int, float, bool) else value
        values.update(overrides)
        return cls(**values)

    def with_variant(self, variant):
        return replace(self, variant=Variant(variant))

    def scaled(self, factor):
        """All cost weights multiplied by a common positive factor"""
        if factor <= 0:
            raise ValueError(f"scale factor must be positive, got {factor}")
        return replace(
            self,
            w_f=self.w_f * factor,
            w_f2=self.w_f2 * factor,
            w_g=self.w_g * factor,
            w_s=self.w_s * factor,
            w_i=self.w_i * factor,
        )
