#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import math

import torch


def uniform_(tensor, bound, generator=None):
    """Fills `tensor` in place from U(-bound, bound) using `generator`"""
    with torch.no_grad():
        return tensor.uniform_(-bound, bound, generator=generator)


def recurrent_uniform_(tensor, hidden_size, generator=None):
    """PyTorch's default LSTM / Linear scheme: U(-1/sqrt(h), 1/sqrt(h))"""
    return uniform_(tensor, 1.0 / math.sqrt(hidden_size), generator=generator)


def zeros_(tensor):
    with torch.no_grad():
        return tensor.zero_()


__all__ = ["recurrent_uniform_", "uniform_", "zeros_"]
