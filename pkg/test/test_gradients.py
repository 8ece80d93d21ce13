#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import unittest

import torch
from asvplan.gradients import (
    AutogradContext,
    AutogradFunction,
    get_grad_fn,
    register_function,
)
from asvplan.nn import BCELoss, PassingClassifier
from test.asvplan_test_case import AsvPlanTestCase, get_random_test_tensor


class TestGradients(AsvPlanTestCase):
    """
    Compares the hand-written backward passes against PyTorch autograd and
    finite differences.
    """

    default_tolerance = 1e-8

    def _reference_grads(self, fn, inputs, grad_output):
        """Gradients of fn(*inputs) w.r.t. every input using torch autograd"""
        leaves = [x.clone().requires_grad_(True) for x in inputs]
        outputs = fn(*leaves)
        if not isinstance(outputs, tuple):
            outputs, grad_output = (outputs,), (grad_output,)
        return torch.autograd.grad(outputs, leaves, grad_outputs=grad_output)

    def _random(self, *size, max_value=2.0):
        return get_random_test_tensor(max_value=max_value, size=size, generator=self.generator)

    def test_registry(self) -> None:
        for name in ("linear", "sigmoid", "tanh", "lstm_cell", "softmax", "binary_cross_entropy"):
            self.assertTrue(issubclass(get_grad_fn(name), AutogradFunction), name)
        self.assertIsNone(get_grad_fn("no_such_function"))

        with self.assertRaises(ValueError):

            @register_function("linear")
            class Duplicate(AutogradFunction):
                pass

        with self.assertRaises(ValueError):

            @register_function("not_a_function")
            class NotAutograd:
                pass

    def test_linear(self) -> None:
        x, weight, bias = self._random(4, 3), self._random(5, 3), self._random(5)
        grad_output = self._random(4, 5)
        fn = get_grad_fn("linear")
        ctx = AutogradContext()
        output = fn.forward(ctx, x, weight, bias)
        self._check(output, torch.nn.functional.linear(x, weight, bias), "linear forward")
        grads = fn.backward(ctx, grad_output)
        reference = self._reference_grads(torch.nn.functional.linear, [x, weight, bias], grad_output)
        for name, grad, ref in zip(("input", "weight", "bias"), grads, reference):
            self._check(grad, ref, f"linear backward w.r.t. {name}")

    def test_unary(self) -> None:
        x = self._random(3, 6, max_value=4.0)
        grad_output = self._random(3, 6)
        for name, reference_fn in (("sigmoid", torch.sigmoid), ("tanh", torch.tanh)):
            fn = get_grad_fn(name)
            ctx = AutogradContext()
            self._check(fn.forward(ctx, x), reference_fn(x), f"{name} forward")
            (reference,) = self._reference_grads(reference_fn, [x], grad_output)
            self._check(fn.backward(ctx, grad_output), reference, f"{name} backward")

    def test_softmax(self) -> None:
        x = self._random(4, 2, max_value=5.0)
        grad_output = self._random(4, 2)
        fn = get_grad_fn("softmax")
        ctx = AutogradContext()
        self._check(fn.forward(ctx, x, -1), x.softmax(-1), "softmax forward")
        (reference,) = self._reference_grads(lambda t: t.softmax(-1), [x], grad_output)
        self._check(fn.backward(ctx, grad_output), reference, "softmax backward")

    def test_binary_cross_entropy(self) -> None:
        pred = torch.rand(6, 2, dtype=torch.float64, generator=self.generator) * 0.9 + 0.05
        target = torch.tensor([[1.0, 0.0]] * 3 + [[0.0, 1.0]] * 3, dtype=torch.float64)
        fn = get_grad_fn("binary_cross_entropy")
        ctx = AutogradContext()
        loss = fn.forward(ctx, pred, target)
        self._check(loss, torch.nn.functional.binary_cross_entropy(pred, target), "BCE forward")
        (reference,) = self._reference_grads(
            lambda p: torch.nn.functional.binary_cross_entropy(p, target),
            [pred],
            torch.tensor(1.0, dtype=torch.float64),
        )
        self._check(fn.backward(ctx, 1.0), reference, "BCE backward")

        criterion = BCELoss()
        self._check(criterion(pred, target), loss, "BCELoss module")
        self._check(criterion.backward(), reference, "BCELoss module backward")

    def test_lstm_cell(self) -> None:
        batch, input_size, hidden = 3, 7, 4
        inputs = [
            self._random(batch, input_size),
            self._random(batch, hidden),
            self._random(batch, hidden),
            self._random(4 * hidden, input_size, max_value=0.5),
            self._random(4 * hidden, hidden, max_value=0.5),
            self._random(4 * hidden, max_value=0.5),
            self._random(4 * hidden, max_value=0.5),
        ]
        grad_h, grad_c = self._random(batch, hidden), self._random(batch, hidden)

        def reference_cell(x, h, c, w_ih, w_hh, b_ih, b_hh):
            return torch._VF.lstm_cell(x, (h, c), w_ih, w_hh, b_ih, b_hh)

        fn = get_grad_fn("lstm_cell")
        ctx = AutogradContext()
        hy, cy = fn.forward(ctx, *inputs)
        ref_h, ref_c = reference_cell(*inputs)
        self._check(hy, ref_h, "lstm_cell hidden state")
        self._check(cy, ref_c, "lstm_cell cell state")

        grads = fn.backward(ctx, (grad_h, grad_c))
        reference = self._reference_grads(reference_cell, inputs, (grad_h, grad_c))
        names = ("x", "h", "c", "weight_ih", "weight_hh", "bias_ih", "bias_hh")
        for name, grad, ref in zip(names, grads, reference):
            self._check(grad, ref, f"lstm_cell backward w.r.t. {name}")

    def test_classifier_finite_differences(self) -> None:
        """Analytic gradients of the full classifier match central differences"""
        eps = 1e-6
        gen = torch.Generator().manual_seed(7)
        for trial in range(100):
            model = PassingClassifier(input_size=7, hidden_size=3, num_layers=2, generator=gen)
            features = torch.randn(2, 4, 7, dtype=torch.float64, generator=gen)
            target = torch.tensor([[1.0, 0.0], [0.0, 1.0]], dtype=torch.float64)
            criterion = BCELoss()

            model.zero_grad()
            loss = criterion(model(features), target)
            model.backward(criterion.backward())
            self.assertTrue(torch.isfinite(loss))

            params = dict(model.named_parameters())
            names = sorted(params)
            for k in range(8):
                name = names[int(torch.randint(len(names), (1,), generator=gen))]
                param = params[name]
                index = int(torch.randint(param.numel(), (1,), generator=gen))
                flat = param.view(-1)
                original = float(flat[index])
                flat[index] = original + eps
                plus = float(criterion(model(features), target))
                flat[index] = original - eps
                minus = float(criterion(model(features), target))
                flat[index] = original
                numeric = (plus - minus) / (2 * eps)
                analytic = float(param.grad.view(-1)[index])
                self.assertLessEqual(
                    abs(analytic - numeric),
                    1e-3 * max(abs(analytic), abs(numeric)) + 1e-7,
                    f"trial {trial}: gradient of {name}[{index}]",
                )


if __name__ == "__main__":
    unittest.main()
