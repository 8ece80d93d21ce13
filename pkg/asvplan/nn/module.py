#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from collections import OrderedDict

import torch

from ..errors import DimensionMismatch
from ..gradients import AutogradContext, get_grad_fn
from . import init


def _accumulate(param, grad):
    """Adds `grad` to `param.grad`, allocating it on first use."""
    if param.grad is None:
        param.grad = grad.detach().clone()
    else:
        param.grad.add_(grad)


class Module:
    """
    Minimal counterpart of `torch.nn.Module` for hand-differentiated layers.

    Parameters are plain float64 tensors with torch autograd disabled;
    subclasses implement `forward` and a matching `backward` that consumes
    the contexts saved during the last training-mode forward pass and
    accumulates into each parameter's `.grad`.
    """

    def __init__(self):
        self._parameters = OrderedDict()
        self._buffers = OrderedDict()
        self._modules = OrderedDict()
        self.training = True

    def __repr__(self):
        children = ", ".join(self._modules)
        return f"{type(self).__name__}({children})"

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError(f"{type(self).__name__} has no forward")

    def backward(self, grad_output):
        """Back-propagates `grad_output` through the last forward pass."""
        raise NotImplementedError(f"{type(self).__name__} has no backward")

    def train(self, mode=True):
        self.training = bool(mode)
        for child in self._modules.values():
            child.train(mode)
        return self

    def eval(self):
        return self.train(False)

    def _register(self, store, name, value):
        if name in store or hasattr(self, name):
            raise ValueError(f"{type(self).__name__} already has an attribute {name!r}")
        store[name] = value
        setattr(self, name, value)

    def register_module(self, name, module):
        self._register(self._modules, name, module)

    def register_parameter(self, name, param):
        """Adds a trainable tensor owned directly by this module."""
        self._register(self._parameters, name, param)

    def register_buffer(self, name, buffer):
        """Adds a non-trainable tensor that is saved with the weights."""
        self._register(self._buffers, name, buffer)

    def _walk(self, attr, prefix=""):
        for name, tensor in getattr(self, attr).items():
            yield prefix + name, tensor
        for child_name, child in self._modules.items():
            yield from child._walk(attr, f"{prefix}{child_name}.")

    def named_parameters(self):
        """(dotted name, tensor) pairs, own parameters before those of children"""
        return self._walk("_parameters")

    def named_buffers(self):
        return self._walk("_buffers")

    def parameters(self):
        return (param for _, param in self.named_parameters())

    def state_dict(self):
        """Parameters then buffers, keyed by dotted name and detached."""
        state = OrderedDict((name, p.detach()) for name, p in self.named_parameters())
        state.update((name, b.detach()) for name, b in self.named_buffers())
        return state

    def load_state_dict(self, state_dict, strict=True):
        """Copies tensors from `state_dict` into this module in place."""
        own = OrderedDict(self.named_parameters())
        own.update(self.named_buffers())
        if strict:
            missing = [key for key in own if key not in state_dict]
            unexpected = [key for key in state_dict if key not in own]
            if missing or unexpected:
                raise ValueError(
                    f"state dict mismatch: missing {missing}, unexpected {unexpected}"
                )
        for name, tensor in own.items():
            if name not in state_dict:
                continue
            value = torch.as_tensor(state_dict[name], dtype=tensor.dtype)
            if value.shape != tensor.shape:
                raise DimensionMismatch(
                    f"size mismatch for {name}: expected {tuple(tensor.shape)}, "
                    f"got {tuple(value.shape)}"
                )
            with torch.no_grad():
                tensor.copy_(value)

    def zero_grad(self):
        for param in self.parameters():
            param.grad = None


class Linear(Module):
    """
    Module that performs linear transformation :math:`y = xA^T + b` on inputs
    of shape (N, in_features).
    """

    def __init__(self, in_features, out_features, generator=None):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features

        weight = torch.empty(out_features, in_features, dtype=torch.float64)
        bias = torch.empty(out_features, dtype=torch.float64)
        init.recurrent_uniform_(weight, in_features, generator=generator)
        init.recurrent_uniform_(bias, in_features, generator=generator)
        self.register_parameter("weight", weight)
        self.register_parameter("bias", bias)
        self._ctx = None

    def forward(self, x):
        if x.size(-1) != self.in_features:
            raise DimensionMismatch(
                f"Linear expects {self.in_features} input features, got {x.size(-1)}"
            )
        ctx = AutogradContext()
        output = get_grad_fn("linear").forward(ctx, x, self.weight, self.bias)
        self._ctx = ctx if self.training else None
        return output

    def backward(self, grad_output):
        assert self._ctx is not None, "backward requires a training-mode forward"
        grad_input, grad_weight, grad_bias = get_grad_fn("linear").backward(
            self._ctx, grad_output
        )
        _accumulate(self.weight, grad_weight)
        _accumulate(self.bias, grad_bias)
        self._ctx = None
        return grad_input


class LSTM(Module):
    """
    Stacked long short-term memory network over batch-first sequences of
    shape (N, T, input_size), with zero initial hidden and cell states.

    Parameter names and gate layout follow `torch.nn.LSTM`, so a state dict
    taken from a PyTorch module loads directly.
    """

    def __init__(self, input_size, hidden_size, num_layers=1, generator=None):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.num_layers = num_layers
        for layer in range(num_layers):
            layer_input = input_size if layer == 0 else hidden_size
            shapes = {
                f"weight_ih_l{layer}": (4 * hidden_size, layer_input),
                f"weight_hh_l{layer}": (4 * hidden_size, hidden_size),
                f"bias_ih_l{layer}": (4 * hidden_size,),
                f"bias_hh_l{layer}": (4 * hidden_size,),
            }
            for name, shape in shapes.items():
                param = torch.empty(*shape, dtype=torch.float64)
                init.recurrent_uniform_(param, hidden_size, generator=generator)
                self.register_parameter(name, param)
        self._contexts = []

    def _layer_parameters(self, layer):
        return [
            self._parameters[f"{kind}_l{layer}"]
            for kind in ("weight_ih", "weight_hh", "bias_ih", "bias_hh")
        ]

    def forward(self, input):
        """Returns the top layer's hidden state at every step, shape (N, T, H)"""
        if input.dim() != 3 or input.size(-1) != self.input_size:
            raise DimensionMismatch(
                f"LSTM expects (N, T, {self.input_size}) input, got {tuple(input.size())}"
            )
        if input.size(1) == 0:
            raise DimensionMismatch("LSTM input holds no time steps")
        batch, steps, _ = input.size()
        cell = get_grad_fn("lstm_cell")

        self._contexts = []
        layer_input = input
        for layer in range(self.num_layers):
            params = self._layer_parameters(layer)
            hx = input.new_zeros(batch, self.hidden_size)
            cx = input.new_zeros(batch, self.hidden_size)
            outputs, contexts = [], []
            for t in range(steps):
                ctx = AutogradContext()
                hx, cx = cell.forward(ctx, layer_input[:, t], hx, cx, *params)
                outputs.append(hx)
                contexts.append(ctx)
            layer_input = torch.stack(outputs, dim=1)
            if self.training:
                self._contexts.append(contexts)
        return layer_input

    def backward(self, grad_output):
        """Back-propagation through time; returns the gradient w.r.t. the input"""
        assert len(self._contexts) == self.num_layers, "no saved forward pass"
        cell = get_grad_fn("lstm_cell")
        batch, steps, _ = grad_output.size()

        for layer in reversed(range(self.num_layers)):
            contexts = self._contexts[layer]
            params = self._layer_parameters(layer)
            grads = [torch.zeros_like(p) for p in params]
            grad_h = grad_output.new_zeros(batch, self.hidden_size)
            grad_c = grad_output.new_zeros(batch, self.hidden_size)
            grad_inputs = [None] * steps
            for t in reversed(range(steps)):
                grad_x, grad_h, grad_c, *grad_params = cell.backward(
                    contexts[t], (grad_output[:, t] + grad_h, grad_c)
                )
                grad_inputs[t] = grad_x
                for total, grad in zip(grads, grad_params):
                    total.add_(grad)
            for param, grad in zip(params, grads):
                _accumulate(param, grad)
            grad_output = torch.stack(grad_inputs, dim=1)

        self._contexts = []
        return grad_output


class PassingClassifier(Module):
    """
    Passing-intention network: per-feature normalization, stacked LSTM, an
    affine head on the final hidden state and a two-way softmax returning
    (p_left, p_right) per sequence.
    """

    def __init__(
        self, input_size=7, hidden_size=128, num_layers=2, num_classes=2, generator=None
    ):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.num_layers = num_layers
        self.num_classes = num_classes
        self.register_buffer(
            "feature_mean", torch.zeros(input_size, dtype=torch.float64)
        )
        self.register_buffer("feature_std", torch.ones(input_size, dtype=torch.float64))
        self.register_module(
            "lstm", LSTM(input_size, hidden_size, num_layers, generator=generator)
        )
        self.register_module(
            "head", Linear(hidden_size, num_classes, generator=generator)
        )
        self._softmax_ctx = None
        self._sequence_size = None

    def set_normalization(self, mean, std, min_std=1e-6):
        mean = torch.as_tensor(mean, dtype=torch.float64)
        std = torch.as_tensor(std, dtype=torch.float64).clamp(min=min_std)
        if mean.numel() != self.input_size or std.numel() != self.input_size:
            raise DimensionMismatch("normalization statistics must match input size")
        self.feature_mean.copy_(mean.reshape(-1))
        self.feature_std.copy_(std.reshape(-1))

    def forward(self, features):
        """features: (N, T, input_size) or (T, input_size); returns (N, 2) probabilities"""
        features = torch.as_tensor(features, dtype=torch.float64)
        if features.dim() == 2:
            features = features.unsqueeze(0)
        if features.dim() != 3 or features.size(-1) != self.input_size:
            raise DimensionMismatch(
                f"expected (N, T, {self.input_size}) features, got {tuple(features.size())}"
            )
        normalized = (features - self.feature_mean) / self.feature_std
        sequence = self.lstm(normalized)
        logits = self.head(sequence[:, -1])
        ctx = AutogradContext()
        probs = get_grad_fn("softmax").forward(ctx, logits, -1)
        self._softmax_ctx = ctx if self.training else None
        self._sequence_size = sequence.size()
        return probs

    def backward(self, grad_output):
        assert self._softmax_ctx is not None, "backward requires a training-mode forward"
        grad_logits = get_grad_fn("softmax").backward(self._softmax_ctx, grad_output)
        grad_last = self.head.backward(grad_logits)
        grad_sequence = grad_last.new_zeros(self._sequence_size)
        grad_sequence[:, -1] = grad_last
        self._softmax_ctx = None
        return self.lstm.backward(grad_sequence)
