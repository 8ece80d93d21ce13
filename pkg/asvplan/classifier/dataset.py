#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from sklearn.model_selection import train_test_split

from ..common import rng
from ..common.util import heading_mod, heading_unit
from ..config import cfg
from ..errors import InfeasibleConfig, MalformedCsv, ZeroLosVector
from ..topology import PassingSide, cpa_arrays, label_from_arrays
from .features import FEATURE_NAMES, NUM_FEATURES, feature_arrays


DATASET_COLUMNS = ("encounter_id", "t") + FEATURE_NAMES + ("label",)


@dataclass
class LabeledEncounter:
    encounter_id: int
    features: np.ndarray
    label: PassingSide
    winding_angle: float = float("nan")

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[1] != NUM_FEATURES:
            raise ValueError(
                f"encounter {self.encounter_id} features must be (T, {NUM_FEATURES})"
            )
        if len(self.features) == 0:
            raise ValueError(f"encounter {self.encounter_id} holds no time steps")
        self.label = PassingSide(self.label)
        if self.label == PassingSide.UNDETERMINED:
            raise ValueError(f"encounter {self.encounter_id} is UNDETERMINED")

    def __len__(self):
        return len(self.features)

    @property
    def target(self):
        """1.0 for LEFT (positive class), 0.0 for RIGHT"""
        return 1.0 if self.label == PassingSide.LEFT else 0.0


def _simulate_tracks(gen, settings):
    """Draws one random ego/obstacle pair sampled at 1 Hz.

    Returns (ego_pos, obs_pos, obs_heading, ego_heading, ego_speed, obs_speed)
    or None when the draw fails the validity gates.
    """
    steps = int(settings.duration) + 1
    times = np.arange(steps, dtype=np.float64)

    ego_heading = gen.uniform(0.0, 360.0)
    ego_speed = gen.uniform(*settings.ego_speed)
    rel_range = gen.uniform(settings.range_min, settings.range_max)
    rel_bearing = gen.uniform(0.0, 360.0)
    obs_heading = gen.uniform(0.0, 360.0)
    if settings.static_only:
        obs_speed = 0.0
    else:
        obs_speed = gen.uniform(*settings.obstacle_speed)
    turning = (not settings.static_only) and gen.uniform() < settings.turning_fraction
    turn_rate = gen.uniform(-settings.turn_rate, settings.turn_rate) if turning else 0.0

    ego_velocity = ego_speed * heading_unit(ego_heading)
    obs_start = rel_range * heading_unit(ego_heading + rel_bearing)
    tcpa, dcpa = cpa_arrays(obs_start, obs_speed * heading_unit(obs_heading) - ego_velocity)
    if not (0.0 < tcpa <= settings.max_tcpa and dcpa <= settings.max_dcpa):
        return None

    ego_pos = times[:, None] * ego_velocity
    obs_heading_t = heading_mod(obs_heading + turn_rate * times)
    if turning and turn_rate != 0.0:
        # integrate the constant-rate turn exactly at each sample
        headings_rad = np.deg2rad(obs_heading + turn_rate * times)
        omega = np.deg2rad(turn_rate)
        start_rad = np.deg2rad(obs_heading)
        dx = obs_speed / omega * (np.cos(start_rad) - np.cos(headings_rad))
        dy = obs_speed / omega * (np.sin(headings_rad) - np.sin(start_rad))
        obs_pos = obs_start + np.stack([dx, dy], axis=-1)
    else:
        obs_pos = obs_start + times[:, None] * obs_speed * heading_unit(obs_heading)
    speeds = np.full(steps, obs_speed)
    return ego_pos, obs_pos, obs_heading_t, ego_heading, ego_speed, speeds


def generate_synthetic_dataset(n=None, seed=0, settings=None):
    """
    Generates `n` labeled encounters split evenly between LEFT and RIGHT
    (LEFT takes the extra one when `n` is odd).

    Encounters are drawn at random, simulated under constant velocity or a
    constant-rate turn at 1 Hz, gated on TCPA and DCPA, labeled by the winding
    angle of the noiseless tracks, and featurized from noisy AIS-like fixes
    up to the clearance index. Raises InfeasibleConfig when the class balance
    is not reached within `max_attempts_factor * n` draws.
    """
    settings = settings if settings is not None else cfg.classifier.synthetic
    n = int(settings.n if n is None else n)
    if n <= 0:
        raise ValueError(f"dataset size must be positive, got {n}")
    quota = {PassingSide.LEFT: n - n // 2, PassingSide.RIGHT: n // 2}
    max_attempts = int(settings.max_attempts_factor) * n
    deadband = cfg.topology.deadband

    encounters = []
    for attempt in range(max_attempts):
        if len(encounters) == n:
            break
        gen = rng.generator(seed, "synthetic", attempt)
        draw = _simulate_tracks(gen, settings)
        if draw is None:
            continue
        ego_pos, obs_pos, obs_heading, ego_heading, ego_speed, obs_speed = draw
        v_rel = obs_speed[:, None] * heading_unit(obs_heading) - ego_speed * heading_unit(
            ego_heading
        )
        try:
            label = label_from_arrays(
                obs_pos - ego_pos, v_rel, deadband, cfg.topology.sensing_range
            )
        except ZeroLosVector:
            continue
        if label.side == PassingSide.UNDETERMINED or quota[label.side] == 0:
            continue

        end = label.clearance_index + 1
        fix_pos, fix_heading = obs_pos[:end], obs_heading[:end]
        if settings.noise:
            sigma_pos = gen.uniform(0.0, cfg.scenario.sigma_pos)
            sigma_heading = np.rad2deg(gen.uniform(0.0, cfg.scenario.sigma_heading))
            fix_pos = fix_pos + gen.normal(0.0, 1.0, size=fix_pos.shape) * sigma_pos
            fix_heading = heading_mod(
                fix_heading + gen.normal(0.0, 1.0, size=end) * sigma_heading
            )
        features = feature_arrays(ego_pos[:end], fix_pos, fix_heading)
        features = features[features[:, 2] > 0.0]
        if len(features) == 0:
            continue

        quota[label.side] -= 1
        encounters.append(
            LabeledEncounter(
                encounter_id=len(encounters),
                features=features,
                label=label.side,
                winding_angle=label.winding_angle,
            )
        )
    if len(encounters) < n:
        raise InfeasibleConfig(
            f"generated {len(encounters)} of {n} balanced encounters "
            f"within {max_attempts} attempts"
        )
    logging.info(f"Generated {n} synthetic encounters (seed {seed})")
    return encounters


def split_dataset(encounters, validation_fraction, seed):
    """Stratified train / validation split; returns (train, validation)"""
    if validation_fraction <= 0.0 or len(encounters) < 4:
        return list(encounters), []
    labels = [int(e.label) for e in encounters]
    if min(labels.count(0), labels.count(1)) < 2:
        return list(encounters), []
    train, validation = train_test_split(
        list(encounters),
        test_size=validation_fraction,
        stratify=labels,
        random_state=rng.derive_seed(seed, "split") % 2**32,
    )
    return train, validation


def dataset_frame(encounters):
    """Long-format frame with one row per encounter step"""
    frames = []
    for encounter in encounters:
        frame = pd.DataFrame(encounter.features, columns=list(FEATURE_NAMES))
        frame.insert(0, "t", np.arange(len(encounter), dtype=np.int64))
        frame.insert(0, "encounter_id", encounter.encounter_id)
        frame["label"] = encounter.label.name
        frames.append(frame)
    if not frames:
        return pd.DataFrame(columns=list(DATASET_COLUMNS))
    return pd.concat(frames, ignore_index=True)


def save_dataset(encounters, path):
    dataset_frame(encounters).to_csv(
        path, index=False, float_format="%.17g", lineterminator="\n"
    )


def load_dataset(path):
    """Reads a dataset CSV; raises MalformedCsv on missing columns or bad values"""
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise MalformedCsv(f"cannot parse dataset {path}: {e}") from e
    missing = [c for c in DATASET_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedCsv(f"dataset {path} lacks columns {missing}")
    try:
        values = frame[list(FEATURE_NAMES)].astype(np.float64)
    except ValueError as e:
        raise MalformedCsv(f"dataset {path} holds non-numeric features") from e
    if not np.all(np.isfinite(values.to_numpy())):
        raise MalformedCsv(f"dataset {path} holds non-finite features")

    encounters = []
    for encounter_id, group in frame.groupby("encounter_id", sort=True):
        labels = group["label"].unique()
        if len(labels) != 1 or labels[0] not in ("LEFT", "RIGHT"):
            raise MalformedCsv(
                f"encounter {encounter_id} in {path} has labels {list(labels)}"
            )
        group = group.sort_values("t")
        encounters.append(
            LabeledEncounter(
                encounter_id=int(encounter_id),
                features=values.loc[group.index].to_numpy(),
                label=PassingSide[labels[0]],
            )
        )
    if not encounters:
        raise MalformedCsv(f"dataset {path} holds no encounters")
    return encounters
