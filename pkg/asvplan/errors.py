#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Exceptions raised by asvplan. Each derives from a builtin so callers may
catch either the specific or the generic type."""


class ZeroLosVector(ValueError):
    """Line-of-sight vector has zero norm (ego and obstacle coincide)."""


class EmptyWindow(ValueError):
    """Observation window holds no usable fixes."""


class DimensionMismatch(ValueError):
    """Tensor shapes do not match the model dimensions."""


class DivergedLoss(RuntimeError):
    """Training loss became non-finite."""

    def __init__(self, epoch, loss):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


class InfeasibleConfig(RuntimeError):
    """Generator could not satisfy its configuration within the attempt budget."""


class VersionMismatch(ValueError):
    """Persisted file carries an unsupported format version."""


class CorruptFile(ValueError):
    """Persisted file is truncated or structurally invalid."""


class OutOfRange(ValueError):
    """Scalar argument lies outside its admissible interval."""


class NoFeasibleAction(RuntimeError):
    """Every action of the grid lies in the no-go zone."""


class MalformedCsv(ValueError):
    """CSV input is missing columns or holds unparsable values."""


class AlreadyInsideC(RuntimeError):
    """Ego already sits inside an obstacle's collision boundary."""

    def __init__(self, obstacle_ids):
        super().__init__(f"ego inside collision boundary of {list(obstacle_ids)}")
        self.obstacle_ids = list(obstacle_ids)


class MissingWeights(FileNotFoundError):
    """No passing-classifier weights where MOA_LSTM needs them."""
