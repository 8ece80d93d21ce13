#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""
AIS-like sensor: 1 Hz broadcasts with per-vessel Gaussian noise, delivered
to the receiver after a fixed delay.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..classifier.features import WindowBuffer
from ..common import rng
from ..common.util import heading_mod
from ..config import cfg


_GRID_TOL = 1e-9


@dataclass(frozen=True)
class AisFix:
    t: float
    id: str
    state: object  # noisy VesselState stamped at t
    delay: float = 0.0

    @property
    def available_at(self):
        return self.t + self.delay


def on_broadcast_grid(t, rate=None):
    rate = float(cfg.simulator.ais_rate if rate is None else rate)
    k = t * rate
    return abs(k - round(k)) <= _GRID_TOL


def ais_observe(truth, nm, t, seed, delay=None, rate=None):
    """
    Noisy broadcast of `truth` at time t, or None off the broadcast grid.
    The noise stream is keyed by (seed, vessel id, broadcast index).
    """
    rate = float(cfg.simulator.ais_rate if rate is None else rate)
    delay = float(cfg.simulator.ais_delay if delay is None else delay)
    if not on_broadcast_grid(t, rate):
        return None
    index = int(round(t * rate))
    gen = rng.generator(seed, "ais", str(truth.id), index)
    noise = gen.standard_normal(4)
    pos = (
        truth.pos[0] + noise[0] * nm.sigma_x,
        truth.pos[1] + noise[1] * nm.sigma_y,
    )
    heading = heading_mod(truth.heading + math.degrees(noise[2] * nm.sigma_theta))
    speed = max(truth.speed + noise[3] * nm.sigma_v, 0.0)
    state = truth.moved(t=float(index) / rate, pos=pos, heading=heading, speed=speed)
    return AisFix(t=state.t, id=truth.id, state=state, delay=delay)


class AisReceiver:
    """
    Collects broadcasts and exposes only fixes whose emission time plus delay
    has elapsed. Keeps the latest fix and an observation window per vessel.
    """

    def __init__(self, window=None):
        self.window = window
        self._pending = []
        self._latest = {}
        self._buffers = {}
        self._ego_at = {}

    def broadcast(self, fix, ego):
        """Queues `fix`; `ego` is the own-ship state at emission time"""
        if fix is not None:
            self._pending.append(fix)
            self._ego_at[(fix.id, fix.t)] = ego

    def deliver(self, now):
        """Releases every fix available at `now`; returns the ids that updated"""
        ready = [fix for fix in self._pending if fix.available_at <= now + _GRID_TOL]
        self._pending = [fix for fix in self._pending if fix.available_at > now + _GRID_TOL]
        updated = []
        for fix in sorted(ready, key=lambda f: (f.t, str(f.id))):
            buffer = self._buffers.setdefault(fix.id, WindowBuffer(fix.id, self.window))
            buffer.push(self._ego_at.pop((fix.id, fix.t)), fix.state)
            self._latest[fix.id] = fix
            updated.append(fix.id)
        return updated

    def latest(self):
        return dict(self._latest)

    def observation_window(self, vessel_id):
        return self._buffers[vessel_id].window()

    def forget(self, vessel_id):
        self._latest.pop(vessel_id, None)
        self._buffers.pop(vessel_id, None)


def propagate_fix(fix, now):
    """Constant-velocity extrapolation of a fix to time `now`"""
    dt = now - fix.t
    if dt <= 0.0:
        return fix.state
    pos = fix.state.position + fix.state.velocity * dt
    return fix.state.moved(t=now, pos=tuple(np.asarray(pos, dtype=np.float64)))
