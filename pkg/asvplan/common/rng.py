#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import hashlib

import numpy as np
import torch


def _key_to_int(key):
    """Maps ints directly and strings through a stable hash"""
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"seed keys must be non-negative, got {key}")
        return int(key)
    digest = hashlib.sha256(str(key).encode("utf8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed(seed, *keys):
    """Derives an independent 63-bit seed from a master seed and substream keys.

    The derivation depends only on the values, never on call order, so work
    split across threads or processes draws identical numbers.
    """
    entropy = [_key_to_int(seed)] + [_key_to_int(k) for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def generator(seed, *keys):
    """Returns a numpy Generator for the substream (seed, *keys)"""
    return np.random.default_rng(derive_seed(seed, *keys))


def torch_generator(seed, *keys):
    """Returns a CPU torch.Generator for the substream (seed, *keys)"""
    gen = torch.Generator(device="cpu")
    gen.manual_seed(derive_seed(seed, *keys))
    return gen
