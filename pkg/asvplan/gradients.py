#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""
Hand-written forward / backward pairs used by the passing classifier.

Every function works on plain float64 torch tensors with autograd disabled;
modules in `asvplan.nn` call `forward` while training, keep the context, and
replay `backward` in reverse order to back-propagate through time.
"""

import torch


# name -> AutogradFunction subclass
FUNCTION_REGISTRY = {}

_LOG_EPS = 1e-12


def register_function(name):
    """Class decorator adding an AutogradFunction to the registry under `name`"""

    def register(cls):
        if name in FUNCTION_REGISTRY:
            raise ValueError(f"function {name!r} is already registered")
        if not (isinstance(cls, type) and issubclass(cls, AutogradFunction)):
            raise ValueError(f"{name!r} must be an AutogradFunction subclass, got {cls!r}")
        cls.name = name
        FUNCTION_REGISTRY[name] = cls
        return cls

    return register


def get_grad_fn(name):
    """Registered AutogradFunction called `name`, or None"""
    return FUNCTION_REGISTRY.get(name)


class AutogradContext:
    """Values a forward call keeps for its backward call, in saving order"""

    def __init__(self):
        self.saved_tensors = []

    def save_for_backward(self, value):
        self.saved_tensors.append(value)

    def save_multiple_for_backward(self, values):
        self.saved_tensors.extend(values)


class AutogradFunction:
    """Stateless forward / backward pair; state lives in the AutogradContext"""

    name = None

    @staticmethod
    def forward(ctx, *inputs):
        raise NotImplementedError("forward is not implemented")

    @staticmethod
    def backward(ctx, grad_output):
        raise NotImplementedError("backward is not implemented")


@register_function("linear")
class AutogradLinear(AutogradFunction):
    @staticmethod
    def forward(ctx, input, weight, bias):
        ctx.save_multiple_for_backward([input, weight])
        return input.matmul(weight.t()).add(bias)

    @staticmethod
    def backward(ctx, grad_output):
        input, weight = ctx.saved_tensors
        return (
            grad_output.matmul(weight),
            grad_output.t().matmul(input),
            grad_output.sum(0),
        )


@register_function("sigmoid")
class AutogradSigmoid(AutogradFunction):
    @staticmethod
    def forward(ctx, input):
        probs = input.sigmoid()
        ctx.save_for_backward(probs)
        return probs

    @staticmethod
    def backward(ctx, grad_output):
        (probs,) = ctx.saved_tensors
        return grad_output.mul(probs).mul_(probs.neg().add_(1.0))


@register_function("tanh")
class AutogradTanh(AutogradFunction):
    @staticmethod
    def forward(ctx, input):
        activations = input.tanh()
        ctx.save_for_backward(activations)
        return activations

    @staticmethod
    def backward(ctx, grad_output):
        (activations,) = ctx.saved_tensors
        return grad_output.mul(activations.square().neg().add(1.0))


@register_function("lstm_cell")
class AutogradLSTMCell(AutogradFunction):
    """
    One step of a long short-term memory cell with gates ordered (i, f, g, o)
    as in `torch.nn.LSTM`:

        gates = x W_ih^T + b_ih + h W_hh^T + b_hh
        c' = sigmoid(f) * c + sigmoid(i) * tanh(g)
        h' = sigmoid(o) * tanh(c')

    `backward` takes the pair (grad_h', grad_c') and returns gradients for
    (x, h, c, W_ih, W_hh, b_ih, b_hh).
    """

    @staticmethod
    def forward(ctx, input, hx, cx, weight_ih, weight_hh, bias_ih, bias_hh):
        gates = input.matmul(weight_ih.t()) + bias_ih + hx.matmul(weight_hh.t()) + bias_hh
        i, f, g, o = gates.chunk(4, dim=-1)
        i, f, g, o = i.sigmoid(), f.sigmoid(), g.tanh(), o.sigmoid()
        cy = f * cx + i * g
        tanh_cy = cy.tanh()
        hy = o * tanh_cy
        ctx.save_multiple_for_backward(
            [input, hx, cx, weight_ih, weight_hh, i, f, g, o, tanh_cy]
        )
        return hy, cy

    @staticmethod
    def backward(ctx, grad_output):
        grad_hy, grad_cy = grad_output
        input, hx, cx, weight_ih, weight_hh, i, f, g, o, tanh_cy = ctx.saved_tensors

        grad_o = grad_hy * tanh_cy
        grad_c = grad_cy + grad_hy * o * (1.0 - tanh_cy.square())
        grad_gates = torch.cat(
            [
                grad_c * g * i * (1.0 - i),
                grad_c * cx * f * (1.0 - f),
                grad_c * i * (1.0 - g.square()),
                grad_o * o * (1.0 - o),
            ],
            dim=-1,
        )
        grad_bias = grad_gates.sum(0)
        return (
            grad_gates.matmul(weight_ih),
            grad_gates.matmul(weight_hh),
            grad_c * f,
            grad_gates.t().matmul(input),
            grad_gates.t().matmul(hx),
            grad_bias,
            grad_bias.clone(),
        )


@register_function("softmax")
class AutogradSoftmax(AutogradFunction):
    @staticmethod
    def forward(ctx, input, dim):
        probs = input.softmax(dim)
        ctx.save_multiple_for_backward([probs, dim])
        return probs

    @staticmethod
    def backward(ctx, grad_output):
        probs, dim = ctx.saved_tensors
        if grad_output.dim() == 0 or grad_output.size(dim) == 1:
            return torch.zeros_like(grad_output)
        return grad_output.add(-probs.mul(grad_output).sum(dim, keepdim=True)).mul_(
            probs
        )


@register_function("binary_cross_entropy")
class AutogradBinaryCrossEntropy(AutogradFunction):
    @staticmethod
    def forward(ctx, pred, target):
        pred = pred.clamp(_LOG_EPS, 1.0 - _LOG_EPS)
        ctx.save_multiple_for_backward([pred, target])
        loss_values = target * pred.log() + (1.0 - target) * (1.0 - pred).log()
        return -(loss_values.mean())

    @staticmethod
    def backward(ctx, grad_output):
        pred, target = ctx.saved_tensors
        grad = (1.0 - target) / (1.0 - pred) - target / pred
        return grad.div_(target.nelement()).mul_(grad_output)
