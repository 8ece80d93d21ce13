#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""
Particle-based prediction of how an ego action changes the passing belief of
an obstacle, Shannon entropies of beliefs, information gain and its weighted
aggregation over obstacles and clusters.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from .classifier.belief import PassingBelief
from .common import rng
from .common.util import cross2, dot2, heading_mod, heading_unit
from .config import cfg
from .errors import OutOfRange
from .topology import PassingSide, VesselState, side_from_angle


_GAIN_TOL = 1e-12
# actions evaluated per vectorized block
_ACTION_BLOCK = 256


@dataclass(frozen=True)
class NoiseModel:
    """Standard deviations of zero-mean Gaussian AIS noise of one obstacle"""

    sigma_x: float = 0.0
    sigma_y: float = 0.0
    sigma_theta: float = 0.0  # radians
    sigma_v: float = 0.0

    def __post_init__(self):
        for name in ("sigma_x", "sigma_y", "sigma_theta", "sigma_v"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be >= 0, got {value}")

    @property
    def trace(self):
        return self.sigma_x**2 + self.sigma_y**2 + self.sigma_theta**2 + self.sigma_v**2

    @classmethod
    def draw(cls, gen, sigma_pos=None, sigma_heading=None, sigma_speed=None):
        """Per-vehicle deviations from uniforms U(0, bound)"""
        sigma_pos = cfg.scenario.sigma_pos if sigma_pos is None else sigma_pos
        sigma_heading = cfg.scenario.sigma_heading if sigma_heading is None else sigma_heading
        sigma_speed = cfg.scenario.sigma_speed if sigma_speed is None else sigma_speed
        return cls(
            sigma_x=float(gen.uniform(0.0, sigma_pos)),
            sigma_y=float(gen.uniform(0.0, sigma_pos)),
            sigma_theta=float(gen.uniform(0.0, sigma_heading)),
            sigma_v=float(gen.uniform(0.0, sigma_speed)),
        )


@dataclass
class ParticleSet:
    """M perturbed copies of one obstacle state, stored column-wise"""

    obstacle_id: str
    t: float
    pos: np.ndarray  # (M, 2)
    heading: np.ndarray  # (M,) degrees
    speed: np.ndarray  # (M,)

    def __post_init__(self):
        if len(self.pos) < 1:
            raise ValueError("a particle set needs at least one particle")

    def __len__(self):
        return len(self.pos)

    @property
    def velocity(self):
        return self.speed[:, None] * heading_unit(self.heading)

    def states(self):
        return [
            VesselState(t=self.t, pos=p, heading=float(h), speed=float(v), id=self.obstacle_id)
            for p, h, v in zip(self.pos, self.heading, self.speed)
        ]


@dataclass
class GainField:
    """Information-gain cost over an action grid"""

    headings: np.ndarray
    speed_ratios: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if np.any(self.values < -_GAIN_TOL) or np.any(self.values > 1.0 + _GAIN_TOL):
            raise ValueError("gain field values must lie in [0, 1]")

    def at(self, heading, speed_ratio):
        mask = (self.headings == heading) & np.isclose(self.speed_ratios, speed_ratio)
        if not np.any(mask):
            raise KeyError((heading, speed_ratio))
        return float(self.values[mask][0])

    def argmin_heading(self, speed_ratio):
        """Heading of minimum value at a fixed speed ratio (ties: smallest heading)"""
        mask = np.isclose(self.speed_ratios, speed_ratio)
        headings, values = self.headings[mask], self.values[mask]
        order = np.lexsort((headings, values))
        return float(headings[order[0]])

    def to_frame(self):
        return pd.DataFrame(
            {
                "heading_deg": self.headings,
                "speed_ratio": self.speed_ratios,
                "I_tilde": self.values,
            }
        )


def sample_particles(obs, nm, M=None, seed=0, *keys):
    """
    Samples M i.i.d. Gaussian perturbations of the obstacle's position,
    heading and speed (speeds clipped at 0). The stream is keyed by
    (seed, *keys) so callers fix it per planning step and obstacle.
    """
    M = int(cfg.infogain.particles if M is None else M)
    if M < 1:
        raise ValueError(f"particle count must be >= 1, got {M}")
    gen = rng.generator(seed, "particles", *keys)
    noise = gen.standard_normal((M, 4))
    pos = obs.position + noise[:, :2] * np.array([nm.sigma_x, nm.sigma_y])
    heading = heading_mod(obs.heading + np.rad2deg(noise[:, 2] * nm.sigma_theta))
    speed = np.maximum(obs.speed + noise[:, 3] * nm.sigma_v, 0.0)
    return ParticleSet(obstacle_id=obs.id, t=obs.t, pos=pos, heading=heading, speed=speed)


def action_velocities(headings, speed_ratios, v_max=None):
    """Ego velocity per action; the ego adopts the commanded velocity at once"""
    v_max = cfg.ego.v_max if v_max is None else v_max
    speeds = np.clip(np.asarray(speed_ratios, dtype=np.float64), 0.0, 1.0) * v_max
    return speeds[..., None] * heading_unit(headings)


def _max_steps(horizon_s, rollout_dt):
    if horizon_s <= 0 or rollout_dt <= 0:
        raise ValueError("horizon_s and rollout_dt must be positive")
    return max(1, int(math.floor(horizon_s / rollout_dt + 1e-9)))


def rollout_winding(ego_pos, ego_velocity, particles, horizon_s=None, rollout_dt=None):
    """
    Winding angle of every particle under every ego velocity, shape (A, M).

    Ego and particles move at constant velocity sampled every `rollout_dt`
    up to each particle's clearance index (first step with TCPA <= 0), capped
    at `horizon_s` and never below one step. The relative path is a straight
    line, so the summed per-step LOS increments equal the angle between the
    first and last LOS vectors. Particles on an exact collision line keep a
    constant LOS bearing and get zero winding.
    """
    horizon_s = cfg.infogain.horizon_s if horizon_s is None else horizon_s
    rollout_dt = cfg.infogain.rollout_dt if rollout_dt is None else rollout_dt
    max_steps = _max_steps(horizon_s, rollout_dt)

    los0 = particles.pos - np.asarray(ego_pos, dtype=np.float64)  # (M, 2)
    ego_velocity = np.atleast_2d(np.asarray(ego_velocity, dtype=np.float64))
    w = particles.velocity[None, :, :] - ego_velocity[:, None, :]  # (A, M, 2)

    w_sq = dot2(w, w)
    moving = w_sq > 0.0
    tcpa = np.where(moving, -dot2(los0, w) / np.where(moving, w_sq, 1.0), 0.0)
    steps = np.ceil(np.maximum(tcpa, 0.0) / rollout_dt - 1e-9)
    steps = np.clip(steps, 1, max_steps)

    los_end = los0 + w * (steps * rollout_dt)[..., None]
    sweep = cross2(los0, w)
    angle = np.arctan2(cross2(los0, los_end), dot2(los0, los_end))
    scale = np.sqrt(dot2(los0, los0) * w_sq)
    collision_line = np.abs(sweep) <= 1e-12 * np.maximum(scale, 1e-300)
    return np.where(collision_line, 0.0, angle)


def left_probability(winding, deadband=None):
    """Fraction of LEFT particles along the last axis, UNDETERMINED split evenly"""
    sides = side_from_angle(np.asarray(winding), deadband)
    left = np.mean(sides == int(PassingSide.LEFT), axis=-1)
    undetermined = np.mean(sides == int(PassingSide.UNDETERMINED), axis=-1)
    return left + 0.5 * undetermined


def _one_step_counts(ego_pos, ego_velocity, particles, rollout_dt, deadband):
    """
    LEFT and RIGHT particle counts per ego velocity for a single rollout step,
    without forming angles. With c and d the cross and dot products of the
    first and last LOS vectors, the winding exceeds the dead-band delta
    exactly when c > max(tan(delta) * d, 0); RIGHT is c < -max(tan(delta) * d, 0).
    Both c and d are affine in the ego velocity, so a block of actions costs
    two matrix products against per-particle coefficients.
    """
    if not 0.0 <= deadband < math.pi / 2:
        raise ValueError(f"deadband must lie in [0, pi/2), got {deadband}")
    los = particles.pos - np.asarray(ego_pos, dtype=np.float64)  # (M, 2)
    v_obs = particles.velocity
    # coefficients of [dt * vx, dt * vy, 1] of the ego velocity
    k_cross = np.stack([los[:, 1], -los[:, 0], rollout_dt * cross2(los, v_obs)])
    k_dot = np.stack([-los[:, 0], -los[:, 1], dot2(los, los) + rollout_dt * dot2(los, v_obs)])
    k_dot *= math.tan(deadband)

    # zero-speed actions share one velocity whatever their heading
    unique, inverse = np.unique(ego_velocity + 0.0, axis=0, return_inverse=True)
    rows = np.column_stack([rollout_dt * unique, np.ones(len(unique))])
    reach = np.sqrt(dot2(los, los).max()) * (
        np.sqrt(dot2(v_obs, v_obs).max()) + np.sqrt(dot2(unique, unique).max())
    )
    # cross products below this are a collision line
    tol = 1e-12 * rollout_dt * reach

    n_left = np.empty(len(unique), dtype=np.int64)
    n_right = np.empty(len(unique), dtype=np.int64)
    for start in range(0, len(unique), _ACTION_BLOCK):
        block = rows[start : start + _ACTION_BLOCK]
        cross = block @ k_cross
        bound = np.maximum(block @ k_dot, tol)
        stop = start + len(block)
        n_left[start:stop] = np.count_nonzero(cross > bound, axis=1)
        np.negative(bound, out=bound)
        n_right[start:stop] = np.count_nonzero(cross < bound, axis=1)
    inverse = inverse.reshape(-1)
    return n_left[inverse], n_right[inverse]


def side_counts(ego_pos, ego_velocity, particles, horizon_s=None, rollout_dt=None, deadband=None):
    """
    (n_left, n_right) particle counts per ego velocity. A one-step rollout
    uses the closed form of `_one_step_counts`; longer ones go through
    `rollout_winding` in blocks of actions.
    """
    horizon_s = cfg.infogain.horizon_s if horizon_s is None else horizon_s
    rollout_dt = cfg.infogain.rollout_dt if rollout_dt is None else rollout_dt
    deadband = cfg.topology.deadband if deadband is None else deadband
    ego_velocity = np.atleast_2d(np.asarray(ego_velocity, dtype=np.float64))
    if len(ego_velocity) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    if _max_steps(horizon_s, rollout_dt) == 1:
        return _one_step_counts(ego_pos, ego_velocity, particles, rollout_dt, deadband)

    n_left, n_right = [], []
    for start in range(0, len(ego_velocity), _ACTION_BLOCK):
        block = ego_velocity[start : start + _ACTION_BLOCK]
        winding = rollout_winding(ego_pos, block, particles, horizon_s, rollout_dt)
        sides = side_from_angle(winding, deadband)
        n_left.append(np.count_nonzero(sides == int(PassingSide.LEFT), axis=1))
        n_right.append(np.count_nonzero(sides == int(PassingSide.RIGHT), axis=1))
    return np.concatenate(n_left), np.concatenate(n_right)


def expected_left_probability(ego_pos, ego_velocity, particles, horizon_s=None, rollout_dt=None):
    """p_l per ego velocity: LEFT share plus half the UNDETERMINED share"""
    n_left, n_right = side_counts(ego_pos, ego_velocity, particles, horizon_s, rollout_dt)
    m = len(particles)
    return (n_left + 0.5 * (m - n_left - n_right)) / m


def mean_winding(ego_pos, ego_velocity, particles, horizon_s=None, rollout_dt=None):
    """Particle-mean winding angle per ego velocity"""
    ego_velocity = np.atleast_2d(np.asarray(ego_velocity, dtype=np.float64))
    means = []
    for start in range(0, len(ego_velocity), _ACTION_BLOCK):
        block = ego_velocity[start : start + _ACTION_BLOCK]
        means.append(rollout_winding(ego_pos, block, particles, horizon_s, rollout_dt).mean(axis=-1))
    return np.concatenate(means) if means else np.zeros(0, dtype=np.float64)


def passing_probability(ego, a, particles, horizon_s=None, v_max=None):
    """Belief (p_l, p_r) of one obstacle's particles under ego action `a`"""
    velocity = action_velocities(a.heading, a.speed_ratio, v_max)
    return PassingBelief.from_left(expected_left_probability(ego.position, velocity, particles, horizon_s)[0])


def entropy_array(p_left):
    """Binary Shannon entropy in bits, with 0 log 0 = 0"""
    p = np.clip(np.asarray(p_left, dtype=np.float64), 0.0, 1.0)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log2(p), 0.0) - np.where(q > 0, q * np.log2(q), 0.0)
    return np.clip(h, 0.0, 1.0)


def entropy(b):
    return float(entropy_array(b.p_l))


def information_gain(current, expected):
    """I = H(current) - H(expected), in [-1, 1]"""
    return entropy(current) - entropy(expected)


def remap_gain(I):
    """Maps I in [-1, 1] to the minimizable cost (1 - I) / 2 in [0, 1]"""
    I_arr = np.asarray(I, dtype=np.float64)
    if np.any(I_arr < -1.0 - _GAIN_TOL) or np.any(I_arr > 1.0 + _GAIN_TOL):
        raise OutOfRange(f"information gain outside [-1, 1]: {I}")
    remapped = np.clip((1.0 - I_arr) / 2.0, 0.0, 1.0)
    return remapped if remapped.ndim else float(remapped)


def obstacle_weights(noises):
    """alpha_i = trace_i / max trace over the cluster; all ones if every trace is 0"""
    if len(noises) == 0:
        raise ValueError("cluster must hold at least one obstacle")
    traces = np.array([nm.trace for nm in noises], dtype=np.float64)
    top = traces.max()
    if top <= 0.0:
        return np.ones_like(traces)
    return traces / top


def obstacle_weight(noises, i):
    return float(obstacle_weights(noises)[i])


def cluster_gain(gains, alphas):
    """Weighted sum of member costs; broadcasts over a trailing action axis"""
    gains = np.asarray(gains, dtype=np.float64)
    alphas = np.asarray(alphas, dtype=np.float64)
    if len(alphas) == 0:
        raise ValueError("cluster must hold at least one obstacle")
    total = np.tensordot(alphas, gains, axes=(0, 0))
    return total if np.ndim(total) else float(total)


def total_gain(cluster_gains, cluster_alphas):
    """Sum over clusters of beta_k * cluster cost with beta_k the largest member
    weight; 0 without clusters."""
    if len(cluster_gains) == 0:
        return 0.0
    total = 0.0
    for gain, alphas in zip(cluster_gains, cluster_alphas):
        beta = float(np.max(alphas))
        assert abs(beta - 1.0) < 1e-12, "largest member weight of a cluster must be 1"
        total = total + beta * np.asarray(gain, dtype=np.float64)
    return total if np.ndim(total) else float(total)


@dataclass
class ObstacleGain:
    """Per-action information-gain terms of one obstacle"""

    obstacle_id: str
    current: PassingBelief
    p_left: np.ndarray  # expected p_l per action
    cost: np.ndarray  # remapped cost per action, after rule compliance
    # particle-mean winding angle per action, only computed for rule compliance
    mean_winding: Optional[np.ndarray] = None


def obstacle_gain(
    ego,
    obs,
    nm,
    current,
    headings,
    speed_ratios,
    seed=0,
    step=0,
    particles=None,
    rule_factor=None,
    v_max=None,
):
    """
    Ĩ of one obstacle over an action grid. Particles are drawn once (keyed by
    seed, step and obstacle id) and shared by every action. With `rule_factor`
    set, costs of actions whose particle-mean winding is positive (obstacle
    passing on the left) are scaled by it.
    """
    if particles is None:
        particles = sample_particles(obs, nm, None, seed, int(step), str(obs.id))
    velocities = action_velocities(headings, speed_ratios, v_max)
    p_left = expected_left_probability(ego.position, velocities, particles)
    cost = np.asarray(remap_gain(entropy(current) - entropy_array(p_left)), dtype=np.float64)
    winding = None
    if rule_factor is not None:
        winding = mean_winding(ego.position, velocities, particles)
        cost = np.where(winding > 0.0, cost * rule_factor, cost)
    return ObstacleGain(
        obstacle_id=obs.id,
        current=current,
        p_left=p_left,
        cost=cost,
        mean_winding=winding,
    )
