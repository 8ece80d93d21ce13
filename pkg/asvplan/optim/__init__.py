#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from .adam import Adam
from .optimizer import Optimizer


__all__ = ["Adam", "Optimizer"]
