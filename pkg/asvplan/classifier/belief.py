#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import math
from dataclasses import dataclass


_SUM_TOL = 1e-9


@dataclass(frozen=True)
class PassingBelief:
    """Probability that an obstacle passes on the ego's left (p_l) or right (p_r)"""

    p_l: float
    p_r: float

    def __post_init__(self):
        for name in ("p_l", "p_r"):
            value = getattr(self, name)
            if not (math.isfinite(value) and 0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if abs(self.p_l + self.p_r - 1.0) > _SUM_TOL:
            raise ValueError(f"p_l + p_r must equal 1, got {self.p_l + self.p_r}")

    @classmethod
    def from_left(cls, p_l):
        p_l = min(max(float(p_l), 0.0), 1.0)
        return cls(p_l=p_l, p_r=1.0 - p_l)

    @classmethod
    def uniform(cls):
        return cls(p_l=0.5, p_r=0.5)

    def as_tuple(self):
        return (self.p_l, self.p_r)
