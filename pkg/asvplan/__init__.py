#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

__version__ = "0.1.0"

import logging

import asvplan.common  # noqa: F401
import asvplan.config  # noqa: F401

from .common import rng
from .config import cfg


# Process-wide generators, reseeded by init():
generators = {}


def init(config_file=None, seed=None):
    """
    Initialize asvplan: load a config file layered over the defaults and
    seed the process-wide generators. `seed` overrides `cfg.seed`.
    """
    if config_file is not None:
        cfg.load_config(config_file)
    if seed is not None:
        cfg.seed = int(seed)
    _setup_prng(cfg.seed)
    logging.debug(f"asvplan {__version__} initialized with seed {cfg.seed}")


def _setup_prng(seed):
    generators["numpy"] = rng.generator(seed, "global")
    generators["torch"] = rng.torch_generator(seed, "global")


_setup_prng(cfg.seed)


__all__ = ["__version__", "cfg", "generators", "init"]
