#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from .init import *  # noqa: F403
from .loss import _Loss, BCELoss
from .module import LSTM, Linear, Module, PassingClassifier


__all__ = [
    "BCELoss",
    "Linear",
    "LSTM",
    "Module",
    "PassingClassifier",
    "_Loss",
    "init",
]
