#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from .config import AsvPlanConfig

cfg = AsvPlanConfig()

__all__ = ["AsvPlanConfig", "cfg"]
