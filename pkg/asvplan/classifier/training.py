#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import collections
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import torch
from sklearn.metrics import accuracy_score, precision_recall_fscore_support
from torch.optim.lr_scheduler import StepLR

from ..common import rng
from ..config import cfg
from ..errors import DivergedLoss
from ..nn import BCELoss, PassingClassifier
from ..optim import Adam
from .dataset import split_dataset


# F1 of the reference classifier trained on recorded AIS data
REFERENCE_F1 = 0.9256


@dataclass
class TrainingReport:
    epochs: list = field(default_factory=list)

    def append(self, **row):
        self.epochs.append(row)

    def to_frame(self):
        return pd.DataFrame(
            self.epochs,
            columns=["epoch", "lr", "train_loss", "train_f1", "val_loss", "val_f1"],
        )

    @property
    def final(self):
        return self.epochs[-1] if self.epochs else {}


def _one_hot(targets):
    """LEFT -> (1, 0), RIGHT -> (0, 1) matching the (p_l, p_r) output order"""
    targets = torch.as_tensor(targets, dtype=torch.float64)
    return torch.stack([targets, 1.0 - targets], dim=-1)


def _length_buckets(lengths, order, batch_size):
    """Minibatches of equal sequence length, in the given shuffled order"""
    buckets = collections.OrderedDict()
    for index in order:
        buckets.setdefault(int(lengths[index]), []).append(int(index))
    batches = []
    for length in sorted(buckets):
        members = buckets[length]
        batches.extend(
            members[start : start + batch_size]
            for start in range(0, len(members), batch_size)
        )
    return batches


def _training_windows(encounters, window, gen):
    """Crops each encounter to a random window of at most `window` steps"""
    cropped = []
    for encounter in encounters:
        end = int(gen.integers(1, len(encounter) + 1))
        cropped.append(encounter.features[max(0, end - window) : end])
    return cropped


def final_windows(encounters, window):
    """The last `window` steps of every encounter, as seen just before clearance"""
    return [encounter.features[-window:] for encounter in encounters]


def predict_left(model, sequences, batch_size=256):
    """Returns p_l for each (T, 7) sequence, batching sequences of equal length"""
    sequences = list(sequences)
    p_left = np.empty(len(sequences), dtype=np.float64)
    lengths = [len(s) for s in sequences]
    training = getattr(model, "training", False)
    if hasattr(model, "eval"):
        model.eval()
    try:
        for batch in _length_buckets(lengths, range(len(sequences)), batch_size):
            features = torch.as_tensor(
                np.stack([sequences[i] for i in batch]), dtype=torch.float64
            )
            probs = model(features)
            p_left[batch] = np.asarray(probs)[:, 0]
    finally:
        if training:
            model.train()
    return p_left


def binary_metrics(y_true, p_left):
    """Accuracy, precision, recall and F1 with LEFT (1) as the positive class;
    p_l exactly 0.5 counts as LEFT."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = (np.asarray(p_left) >= 0.5).astype(np.int64)
    precision, recall, f1, _ = precision_recall_fscore_support(
        y_true, y_pred, average="binary", pos_label=1, zero_division=0
    )
    return {
        "accuracy": float(accuracy_score(y_true, y_pred)),
        "precision": float(precision),
        "recall": float(recall),
        "f1": float(f1),
    }


def _bce(p_left, targets):
    p_left = np.clip(p_left, 1e-12, 1.0 - 1e-12)
    targets = np.asarray(targets, dtype=np.float64)
    return float(-np.mean(targets * np.log(p_left) + (1 - targets) * np.log(1 - p_left)))


def evaluate(model, test, window=None):
    """
    Scores `model` on the final `window` steps of each encounter. `model` is
    a PassingClassifier or any callable mapping (N, T, 7) features to (N, 2)
    probabilities.
    """
    if len(test) == 0:
        raise ValueError("cannot evaluate on an empty set")
    window = int(cfg.classifier.window if window is None else window)
    targets = [encounter.target for encounter in test]
    p_left = predict_left(model, final_windows(test, window))
    metrics = binary_metrics(targets, p_left)
    metrics["loss"] = _bce(p_left, targets)
    metrics["n"] = len(test)
    return metrics


def lstm_train(data, hp=None, seed=0, model=None, validation=None):
    """
    Trains a PassingClassifier with binary cross-entropy, Adam and a step
    learning-rate schedule, back-propagating through time over each sequence.

    Args:
        data: list of LabeledEncounter
        hp: training hyperparameters (defaults to `cfg.classifier.training`)
        seed: master seed fixing the initialization, split and batch order
        model: optional PassingClassifier to resume from
        validation: optional held-out encounters; split from `data` if None

    Returns:
        (model, TrainingReport)

    Raises DivergedLoss when an epoch loss becomes non-finite.
    """
    hp = hp if hp is not None else cfg.classifier.training
    data = list(data)
    if not data:
        raise ValueError("cannot train on an empty dataset")
    if len({encounter.label for encounter in data}) < 2:
        logging.warning("Training data holds a single class")

    if validation is None:
        train, validation = split_dataset(data, hp.validation_fraction, seed)
    else:
        train = data
    window = int(cfg.classifier.window)

    if model is None:
        model = PassingClassifier(
            input_size=cfg.classifier.input_size,
            hidden_size=cfg.classifier.hidden_size,
            num_layers=cfg.classifier.num_layers,
            generator=rng.torch_generator(seed, "init"),
        )
        stacked = np.concatenate([encounter.features for encounter in train])
        model.set_normalization(stacked.mean(axis=0), stacked.std(axis=0))

    optimizer = Adam(
        model.parameters(), lr=float(hp.lr), betas=tuple(hp.betas), eps=float(hp.eps)
    )
    scheduler = StepLR(optimizer, step_size=int(hp.step_size), gamma=float(hp.gamma))
    criterion = BCELoss()
    clip_norm = hp.get("clip_norm")
    targets = np.array([encounter.target for encounter in train])
    report = TrainingReport()

    for epoch in range(int(hp.epochs)):
        gen = rng.generator(seed, "epoch", epoch)
        if hp.sliding_window:
            sequences = _training_windows(train, window, gen)
        else:
            sequences = [encounter.features for encounter in train]
        lengths = [len(s) for s in sequences]
        batches = _length_buckets(lengths, gen.permutation(len(train)), int(hp.batch_size))
        batches = [batches[i] for i in gen.permutation(len(batches))]

        model.train()
        total_loss = 0.0
        for batch in batches:
            features = torch.as_tensor(
                np.stack([sequences[i] for i in batch]), dtype=torch.float64
            )
            optimizer.zero_grad()
            probs = model(features)
            loss = criterion(probs, _one_hot(targets[batch]))
            model.backward(criterion.backward())
            if clip_norm:
                optimizer.clip_grad_norm(float(clip_norm))
            optimizer.step()
            total_loss += float(loss) * len(batch)
        train_loss = total_loss / len(train)
        if not math.isfinite(train_loss):
            logging.error(f"Training diverged at epoch {epoch}")
            raise DivergedLoss(epoch, train_loss)

        lr = optimizer.param_groups[0]["lr"]
        scheduler.step()
        train_f1 = evaluate(model, train, window)["f1"]
        if validation:
            val_metrics = evaluate(model, validation, window)
            val_loss, val_f1 = val_metrics["loss"], val_metrics["f1"]
        else:
            val_loss, val_f1 = float("nan"), float("nan")
        report.append(
            epoch=epoch,
            lr=lr,
            train_loss=train_loss,
            train_f1=train_f1,
            val_loss=val_loss,
            val_f1=val_f1,
        )
        logging.info(
            f"epoch {epoch}: lr {lr:.2e} train loss {train_loss:.4f} "
            f"F1 {train_f1:.3f} | val loss {val_loss:.4f} F1 {val_f1:.3f}"
        )

    model.eval()
    return model, report
