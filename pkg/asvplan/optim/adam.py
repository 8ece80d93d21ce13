#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import math

import torch

from .optimizer import Optimizer


class Adam(Optimizer):
    r"""Implements the Adam algorithm with bias-corrected moment estimates.

    Args:
        params (iterable): iterable of parameters to optimize or dicts defining
            parameter groups
        lr (float): learning rate (default: 1e-3)
        betas (Tuple[float, float]): coefficients for the running averages of the
            gradient and its square (default: (0.9, 0.999))
        eps (float): term added to the denominator (default: 1e-8)
        weight_decay (float, optional): weight decay (L2 penalty) (default: 0)

    The update matches `torch.optim.Adam` with default flags:

    .. math::
        \begin{aligned}
            m_t &= \beta_1 m_{t-1} + (1 - \beta_1) g_t \\
            v_t &= \beta_2 v_{t-1} + (1 - \beta_2) g_t^2 \\
            p_t &= p_{t-1} - \text{lr} \cdot \frac{m_t / (1 - \beta_1^t)}
                   {\sqrt{v_t / (1 - \beta_2^t)} + \epsilon}
        \end{aligned}
    """  # noqa: W605

    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=0):
        if not isinstance(lr, (int, float)) or lr < 0.0:
            raise ValueError("Invalid learning rate: {}".format(lr))
        if not 0.0 <= betas[0] < 1.0 or not 0.0 <= betas[1] < 1.0:
            raise ValueError("Invalid beta parameters: {}".format(betas))
        if eps < 0.0:
            raise ValueError("Invalid epsilon value: {}".format(eps))
        if not isinstance(weight_decay, (int, float)) or weight_decay < 0.0:
            raise ValueError("Invalid weight_decay value: {}".format(weight_decay))

        defaults = {
            "lr": lr,
            "betas": tuple(betas),
            "eps": eps,
            "weight_decay": weight_decay,
        }
        super(Adam, self).__init__(params, defaults)

    def step(self, closure=None):
        """Performs a single optimization step.
        Arguments:
            closure (callable, optional): A closure that reevaluates the model
                and returns the loss.
        """
        loss = None
        if closure is not None:
            loss = closure()

        with torch.no_grad():
            for group in self.param_groups:
                beta1, beta2 = group["betas"]
                weight_decay = group["weight_decay"]

                for p in group["params"]:
                    if p.grad is None:
                        continue

                    d_p = p.grad
                    if weight_decay != 0:
                        d_p = d_p.add(p.mul(weight_decay))

                    param_state = self.state[id(p)]
                    if "step" not in param_state:
                        param_state["step"] = 0
                        param_state["exp_avg"] = torch.zeros_like(p)
                        param_state["exp_avg_sq"] = torch.zeros_like(p)
                    param_state["step"] += 1
                    step = param_state["step"]
                    exp_avg = param_state["exp_avg"]
                    exp_avg_sq = param_state["exp_avg_sq"]

                    exp_avg.mul_(beta1).add_(d_p, alpha=1 - beta1)
                    exp_avg_sq.mul_(beta2).addcmul_(d_p, d_p, value=1 - beta2)

                    bias_correction1 = 1 - beta1**step
                    bias_correction2 = 1 - beta2**step
                    denom = (exp_avg_sq.sqrt() / math.sqrt(bias_correction2)).add_(
                        group["eps"]
                    )
                    p.addcdiv_(exp_avg, denom, value=-group["lr"] / bias_correction1)

        return loss
