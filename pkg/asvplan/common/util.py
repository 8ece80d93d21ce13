#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import functools
import os

import numpy as np


def wrap_deg(angle):
    """Wraps an angle in degrees to (-180, 180]"""
    wrapped = np.mod(np.asarray(angle, dtype=np.float64) + 180.0, 360.0) - 180.0
    wrapped = np.where(wrapped == -180.0, 180.0, wrapped)
    return wrapped if wrapped.ndim else float(wrapped)


def heading_mod(angle):
    """Maps a heading in degrees to [0, 360)"""
    heading = np.mod(np.asarray(angle, dtype=np.float64), 360.0)
    heading = np.where(heading >= 360.0, 0.0, heading)
    return heading if heading.ndim else float(heading)


def heading_unit(heading_deg):
    """Unit vector(s) (east, north) for maritime headings clockwise from north"""
    rad = np.deg2rad(np.asarray(heading_deg, dtype=np.float64))
    return np.stack([np.sin(rad), np.cos(rad)], axis=-1)


def bearing_deg(vector):
    """Maritime bearing (clockwise from north) of ENU vector(s), in [0, 360)"""
    vector = np.asarray(vector, dtype=np.float64)
    return heading_mod(np.rad2deg(np.arctan2(vector[..., 0], vector[..., 1])))


def cross2(a, b):
    """z-component of the cross product of 2-vectors, broadcasting"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def dot2(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]


def num_threads():
    """Worker count from ASVPLAN_THREADS (0 or unset = one per CPU)"""
    value = os.environ.get("ASVPLAN_THREADS", "0").strip() or "0"
    try:
        requested = int(value)
    except ValueError as e:
        raise ValueError(f"ASVPLAN_THREADS must be an integer, got {value!r}") from e
    if requested < 0:
        raise ValueError(f"ASVPLAN_THREADS must be >= 0, got {requested}")
    return requested or (os.cpu_count() or 1)


@functools.lru_cache(maxsize=4)
def action_headings(step=1):
    """Grid of headings [0, 360) in degrees"""
    return np.arange(0, 360, step, dtype=np.float64)
