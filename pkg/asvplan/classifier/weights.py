#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""
Weight files are JSON objects:

    {"format": "asvplan.passing_lstm", "format_version": 1,
     "dims": {"input_size": 7, "hidden_size": 128, "num_layers": 2, "num_classes": 2},
     "tensors": {"lstm.weight_ih_l0": {"shape": [512, 7], "data": [...]}, ...}}

Floats are written with `repr` precision so a save / load round trip is
bit-identical.
"""

import json
import logging
import os

import numpy as np
import torch

from ..common import rng
from ..config import cfg
from ..errors import CorruptFile, MissingWeights, VersionMismatch
from ..nn import PassingClassifier


FORMAT = "asvplan.passing_lstm"
FORMAT_VERSION = 1


def save_weights(model, path):
    tensors = {
        name: {"shape": list(tensor.shape), "data": tensor.reshape(-1).tolist()}
        for name, tensor in model.state_dict().items()
    }
    payload = {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "dims": {
            "input_size": model.input_size,
            "hidden_size": model.hidden_size,
            "num_layers": model.num_layers,
            "num_classes": model.num_classes,
        },
        "tensors": tensors,
    }
    with open(path, "w", encoding="utf8", newline="\n") as stream:
        json.dump(payload, stream, allow_nan=False)
        stream.write("\n")


def load_weights(path):
    """Loads a PassingClassifier; raises VersionMismatch or CorruptFile"""
    try:
        with open(path, encoding="utf8") as stream:
            payload = json.load(stream)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CorruptFile(f"cannot parse weights file {path}: {e}") from e
    if not isinstance(payload, dict) or payload.get("format") != FORMAT:
        raise CorruptFile(f"{path} is not a passing-classifier weights file")
    if payload.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(
            f"{path} has format version {payload.get('format_version')}, "
            f"expected {FORMAT_VERSION}"
        )
    try:
        dims = payload["dims"]
        model = PassingClassifier(
            input_size=int(dims["input_size"]),
            hidden_size=int(dims["hidden_size"]),
            num_layers=int(dims["num_layers"]),
            num_classes=int(dims["num_classes"]),
        )
        state = {}
        for name, entry in payload["tensors"].items():
            values = np.asarray(entry["data"], dtype=np.float64)
            shape = tuple(int(d) for d in entry["shape"])
            if values.size != int(np.prod(shape)):
                raise CorruptFile(f"{path}: tensor {name} does not match shape {shape}")
            if not np.all(np.isfinite(values)):
                raise CorruptFile(f"{path}: tensor {name} holds non-finite values")
            state[name] = torch.from_numpy(values.reshape(shape))
        model.load_state_dict(state)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, CorruptFile):
            raise
        raise CorruptFile(f"{path}: malformed weights ({e})") from e
    model.eval()
    return model


def untrained_model(seed=None):
    """Deterministic randomly-initialized classifier with identity normalization"""
    seed = cfg.seed if seed is None else seed
    model = PassingClassifier(
        input_size=cfg.classifier.input_size,
        hidden_size=cfg.classifier.hidden_size,
        num_layers=cfg.classifier.num_layers,
        generator=rng.torch_generator(seed, "init"),
    )
    return model.eval()


def load_or_init(path=None, seed=None, allow_untrained=None):
    """
    Loads weights from `path`. A missing file raises MissingWeights unless
    `allow_untrained` (default `classifier.allow_untrained`) is set, in which
    case untrained weights are used with a warning.
    """
    path = path if path is not None else cfg.classifier.weights_path
    if allow_untrained is None:
        allow_untrained = bool(cfg.classifier.allow_untrained)
    if path is None or not os.path.exists(path):
        if not allow_untrained:
            raise MissingWeights(
                f"no classifier weights at {path}; run `asvplan train` and set "
                "classifier.weights_path to its weights.json"
            )
        logging.warning(f"No classifier weights at {path}; using untrained weights")
        return untrained_model(seed)
    return load_weights(path)
