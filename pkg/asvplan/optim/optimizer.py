#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import torch
from torch.optim.optimizer import required


class Optimizer(torch.optim.Optimizer):
    """
    Base class of the classifier optimizers. The backward passes in
    `asvplan.nn` write `param.grad` themselves, so parameters never require
    torch autograd and updates run under `torch.no_grad()`.

    Args:
        params: ordered iterable of tensors or of parameter-group dicts
        defaults: hyperparameters used when a group does not set them
    """

    def add_param_group(self, param_group):
        assert isinstance(param_group, dict), "param group must be a dict"

        params = param_group["params"]
        if isinstance(params, set):
            raise TypeError("optimizer parameters must come in an ordered collection, not a set")
        params = [params] if isinstance(params, torch.Tensor) else list(params)
        for param in params:
            if not isinstance(param, torch.Tensor):
                raise TypeError(f"optimizer can only optimize tensors, got {torch.typename(param)}")

        missing = [k for k, v in self.defaults.items() if v is required and k not in param_group]
        if missing:
            raise ValueError(f"parameter group is missing required options {missing}")
        for name, default in self.defaults.items():
            param_group.setdefault(name, default)
        param_group["params"] = params
        self.param_groups.append(param_group)

    def parameters(self):
        return [param for group in self.param_groups for param in group["params"]]

    def zero_grad(self, set_to_none=True):
        for param in self.parameters():
            if set_to_none:
                param.grad = None
            elif param.grad is not None:
                param.grad.zero_()

    def grad_norm(self):
        """Global L2 norm over every gradient currently set"""
        grads = [param.grad.reshape(-1) for param in self.parameters() if param.grad is not None]
        if not grads:
            return 0.0
        return float(torch.linalg.vector_norm(torch.cat(grads)))

    def clip_grad_norm(self, max_norm):
        """
        Rescales all gradients together so that their global norm is at most
        `max_norm`. Returns the norm before clipping.
        """
        if max_norm <= 0:
            raise ValueError(f"max_norm must be positive, got {max_norm}")
        norm = self.grad_norm()
        if norm > max_norm:
            scale = max_norm / norm
            with torch.no_grad():
                for param in self.parameters():
                    if param.grad is not None:
                        param.grad.mul_(scale)
        return norm
