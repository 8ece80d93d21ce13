#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import threading

import numpy as np
import torch

from .belief import PassingBelief
from .features import extract_features


def lstm_forward(model, seq):
    """Belief (p_l, p_r) of a (T, 7) feature sequence, any T >= 1"""
    features = torch.as_tensor(np.asarray(seq, dtype=np.float64))
    if features.dim() == 2:
        features = features.unsqueeze(0)
    if model.training:
        model.eval()
    probs = model(features)[0]
    return PassingBelief(p_l=float(probs[0]), p_r=float(1.0 - probs[0]))


class IntentionEstimator:
    """
    Thread-safe wrapper turning observation windows into beliefs with a
    shared, immutable classifier.
    """

    def __init__(self, model):
        self.model = model.eval()
        self._lock = threading.Lock()

    def belief(self, window):
        features = extract_features(window)
        # modules keep per-call contexts, so forward passes are serialized
        with self._lock:
            return lstm_forward(self.model, features)
