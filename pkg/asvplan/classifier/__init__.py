#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from .belief import PassingBelief
from .dataset import (
    LabeledEncounter,
    generate_synthetic_dataset,
    load_dataset,
    save_dataset,
    split_dataset,
)
from .features import ObservationWindow, WindowBuffer, extract_features
from .inference import IntentionEstimator, lstm_forward
from .training import REFERENCE_F1, TrainingReport, evaluate, lstm_train
from .weights import load_or_init, load_weights, save_weights, untrained_model


__all__ = [
    "IntentionEstimator",
    "LabeledEncounter",
    "ObservationWindow",
    "PassingBelief",
    "REFERENCE_F1",
    "TrainingReport",
    "WindowBuffer",
    "evaluate",
    "extract_features",
    "generate_synthetic_dataset",
    "load_dataset",
    "load_or_init",
    "load_weights",
    "lstm_forward",
    "lstm_train",
    "save_dataset",
    "save_weights",
    "split_dataset",
    "untrained_model",
]
