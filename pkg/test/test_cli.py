#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import logging
import os
import unittest
import xml.etree.ElementTree as ElementTree
from unittest import mock

import pandas as pd
import torch
import yaml
from asvplan.cli import launcher
from test.asvplan_test_case import AsvPlanTestCase, config_path


SMALL_CLASSIFIER = """\
classifier:
  hidden_size: 8
  num_layers: 1
  synthetic:
    n: 20
cli:
  log_level: WARNING
"""


class _NanLoss:
    def __call__(self, x, y):
        self._x = x
        return torch.tensor(float("nan"), dtype=torch.float64)

    def backward(self):
        return torch.zeros_like(self._x)


class TestLauncher(AsvPlanTestCase):
    def write(self, directory, name, text):
        path = os.path.join(directory, name)
        with open(path, "w") as stream:
            stream.write(text)
        return path

    def manifest(self, out):
        with open(os.path.join(out, "manifest.yaml")) as stream:
            return yaml.safe_load(stream)

    def test_usage_errors(self):
        out = self.tmpdir()
        for argv in (
            [],
            ["bogus"],
            ["simulate"],
            ["simulate", "x.yaml", "--variant", "NOPE"],
            ["eval", "--out", out],
        ):
            with self.assertRaises(SystemExit, msg=str(argv)) as context:
                launcher.main(argv)
            self.assertEqual(context.exception.code, launcher.EXIT_USAGE)

    def test_config_log_level(self):
        """The log level comes from the layered config, not the defaults"""
        root = logging.getLogger()
        self.addCleanup(root.setLevel, root.level)
        out = self.tmpdir()
        quiet = self.write(out, "quiet.yaml", "cli:\n  log_level: ERROR\n")
        scenario = config_path("scenarios", "empty.yaml")
        argv = ["simulate", scenario, "--variant", "MOA", "--config", quiet, "--no-plots", "--out", out]
        self.assertEqual(launcher.main(argv), launcher.EXIT_OK)
        self.assertEqual(root.level, logging.ERROR)

        smoke = config_path("batch_smoke.yaml")
        argv = ["simulate", scenario, "--variant", "MOA", "--config", smoke, "--no-plots", "--out", out]
        self.assertEqual(launcher.main(argv), launcher.EXIT_OK)
        self.assertEqual(root.level, logging.WARNING)

    def test_simulate(self):
        out = self.tmpdir()
        scenario = config_path("scenarios", "empty.yaml")
        code = launcher.main(["simulate", scenario, "--variant", "MOA", "--out", out])
        self.assertEqual(code, launcher.EXIT_OK)
        for name in ("steps.csv", "beliefs.csv", "metrics.csv", "timing.csv", "trajectory.svg"):
            self.assertTrue(os.path.exists(os.path.join(out, name)), name)
        ElementTree.parse(os.path.join(out, "trajectory.svg"))

        manifest = self.manifest(out)
        self.assertEqual(manifest["exit_code"], 0)
        self.assertEqual(manifest["outcome"], "SUCCESS")
        self.assertEqual(manifest["seed"], 7)
        self.assertIn("steps.csv", manifest["outputs"])

        metrics = pd.read_csv(os.path.join(out, "metrics.csv"))
        self.assertEqual(len(metrics), 1)
        self.assertNotIn("planner_ms_mean", metrics.columns)
        self.assertTrue(bool(metrics.success.iloc[0]))

        again = self.tmpdir()
        launcher.main(["simulate", scenario, "--variant", "MOA", "--out", again, "--no-plots"])
        for name in ("steps.csv", "metrics.csv"):
            with open(os.path.join(out, name), "rb") as a, open(os.path.join(again, name), "rb") as b:
                self.assertEqual(a.read(), b.read(), f"{name} differs between runs")
        self.assertFalse(os.path.exists(os.path.join(again, "trajectory.svg")))

    def test_simulate_outcomes(self):
        out = self.tmpdir()
        scenario = config_path("scenarios", "collision_forced.yaml")
        self.assertEqual(
            launcher.main(["simulate", scenario, "--variant", "VO", "--out", out, "--no-plots"]),
            launcher.EXIT_OUTCOME,
        )
        self.assertEqual(self.manifest(out)["outcome"], "COLLISION")

        broken = self.write(out, "broken.yaml", "obstacles: [unclosed\n")
        self.assertEqual(launcher.main(["simulate", broken, "--out", out]), launcher.EXIT_INPUT)
        missing = os.path.join(out, "missing.yaml")
        self.assertEqual(launcher.main(["simulate", missing, "--out", out]), launcher.EXIT_INPUT)
        self.assertEqual(self.manifest(out)["exit_code"], launcher.EXIT_INPUT)

        overrides = self.write(out, "overrides.txt", "no_such_key = 1\n")
        code = launcher.main(
            ["simulate", config_path("scenarios", "empty.yaml"), "--overrides", overrides, "--out", out]
        )
        self.assertEqual(code, launcher.EXIT_INPUT)

    def test_batch(self):
        out = self.tmpdir()
        config = self.write(
            out,
            "tiny_batch.yaml",
            "batch:\n"
            "  obstacles: [0]\n"
            "  mixes: [NON_COOP_ONLY]\n"
            "  noise: [false]\n"
            "  scenarios_per_bin: 2\n"
            "cli:\n"
            "  log_level: WARNING\n",
        )
        argv = ["batch", "--config", config, "--variant", "MOA", "--seed", "5", "--workers", "1"]
        self.assertEqual(launcher.main(argv + ["--out", out]), launcher.EXIT_OK)
        for name in ("metrics.csv", "timing.csv", "summary.csv", "timing_summary.csv", "summary.svg"):
            self.assertTrue(os.path.exists(os.path.join(out, name)), name)
        self.assertEqual(len(pd.read_csv(os.path.join(out, "metrics.csv"))), 2)
        summary = pd.read_csv(os.path.join(out, "summary.csv"))
        self.assertEqual(list(summary.variant), ["MOA"])
        self.assertEqual(float(summary.success_rate.iloc[0]), 1.0)
        manifest = self.manifest(out)
        self.assertEqual(manifest["seed"], 5)
        self.assertEqual(manifest["outcome"], "2 episodes")

    def test_batch_thread_count(self):
        """Batch outputs do not depend on ASVPLAN_THREADS"""
        root = self.tmpdir()
        config = self.write(
            root,
            "threads.yaml",
            "batch:\n"
            "  obstacles: [3]\n"
            "  mixes: [NON_COOP_ONLY]\n"
            "  noise: [true]\n"
            "  scenarios_per_bin: 1\n"
            "infogain:\n"
            "  particles: 100\n"
            "cli:\n"
            "  log_level: WARNING\n",
        )
        outputs = []
        for threads in ("1", "8"):
            out = os.path.join(root, f"threads_{threads}")
            argv = ["batch", "--config", config, "--variant", "MOA_PLUS", "--workers", "1", "--no-plots"]
            with mock.patch.dict(os.environ, {"ASVPLAN_THREADS": threads}):
                self.assertEqual(launcher.main(argv + ["--out", out]), launcher.EXIT_OK)
            outputs.append(out)
        for name in ("metrics.csv", "summary.csv"):
            with open(os.path.join(outputs[0], name), "rb") as a, open(os.path.join(outputs[1], name), "rb") as b:
                self.assertEqual(a.read(), b.read(), f"{name} differs between thread counts")

    def test_replay(self):
        out = self.tmpdir()
        self.assertEqual(
            launcher.main(["replay", "--ego-id", "Z", "--out", out]), launcher.EXIT_INPUT
        )
        code = launcher.main(["replay", "--historical", "--out", out])
        self.assertEqual(code, launcher.EXIT_OUTCOME)
        for name in ("steps.csv", "separation.csv", "metrics.csv", "separation.svg"):
            self.assertTrue(os.path.exists(os.path.join(out, name)), name)
        self.assertEqual(self.manifest(out)["outcome"], "COLLISION")

    def test_gainfield(self):
        out = self.tmpdir()
        snapshot = config_path("scenarios", "empty_snapshot.yaml")
        code = launcher.main(["gainfield", snapshot, "--variant", "MOA_PLUS", "--out", out])
        self.assertEqual(code, launcher.EXIT_OK)
        frame = pd.read_csv(os.path.join(out, "gain_field.csv"))
        self.assertEqual(list(frame.columns), ["heading_deg", "speed_ratio", "I_tilde", "in_no_go"])
        self.assertEqual(len(frame), 360 * 5)
        self.assertTrue((frame.I_tilde == 0.0).all())
        self.assertTrue((frame.in_no_go == 0).all())
        self.assertEqual(self.manifest(out)["outcome"], "argmin_heading=0")
        ElementTree.parse(os.path.join(out, "gain_field.svg"))

        broken = self.write(out, "bad_snapshot.yaml", "obstacles: []\n")
        argv = ["gainfield", broken, "--variant", "MOA_PLUS", "--out", out]
        self.assertEqual(launcher.main(argv), launcher.EXIT_INPUT)

    def test_moa_lstm_needs_weights(self):
        """MOA_LSTM without trained weights stops with an input error"""
        out = self.tmpdir()
        snapshot = config_path("scenarios", "empty_snapshot.yaml")
        code = launcher.main(["gainfield", snapshot, "--variant", "MOA_LSTM", "--out", out])
        self.assertEqual(code, launcher.EXIT_INPUT)
        self.assertEqual(self.manifest(out)["exit_code"], launcher.EXIT_INPUT)

        scenario = config_path("scenarios", "empty.yaml")
        code = launcher.main(["simulate", scenario, "--variant", "MOA_LSTM", "--out", out])
        self.assertEqual(code, launcher.EXIT_INPUT)

        with mock.patch.object(launcher, "monte_carlo") as monte_carlo:
            code = launcher.main(["batch", "--variant", "MOA_LSTM", "--out", out])
        self.assertEqual(code, launcher.EXIT_INPUT)
        monte_carlo.assert_not_called()

        untrained = self.write(out, "untrained.yaml", "classifier:\n  allow_untrained: true\n")
        code = launcher.main(
            ["gainfield", snapshot, "--config", untrained, "--variant", "MOA_LSTM", "--out", out]
        )
        self.assertEqual(code, launcher.EXIT_OK)

    def test_train_and_eval(self):
        out = self.tmpdir()
        config = self.write(out, "small.yaml", SMALL_CLASSIFIER)
        code = launcher.main(["train", "--config", config, "--epochs", "0", "--out", out, "--no-plots"])
        self.assertEqual(code, launcher.EXIT_OK)
        weights = os.path.join(out, "weights.json")
        for name in ("weights.json", "dataset.csv", "training.csv", "report.csv"):
            self.assertTrue(os.path.exists(os.path.join(out, name)), name)
        report = pd.read_csv(os.path.join(out, "report.csv"))
        self.assertEqual(int(report.n.iloc[0]), 4)

        scored = os.path.join(out, "eval")
        code = launcher.main(
            ["eval", "--config", config, "--weights", weights, "--n", "10", "--out", scored]
        )
        self.assertEqual(code, launcher.EXIT_OK)
        self.assertEqual(int(pd.read_csv(os.path.join(scored, "report.csv")).n.iloc[0]), 10)

        corrupt = self.write(out, "corrupt.json", "{not json")
        code = launcher.main(["eval", "--weights", corrupt, "--n", "4", "--out", scored])
        self.assertEqual(code, launcher.EXIT_INPUT)
        code = launcher.main(["train", "--config", config, "--epochs", "-1", "--out", out])
        self.assertEqual(code, launcher.EXIT_INPUT)

    def test_diverged_training(self):
        out = self.tmpdir()
        config = self.write(out, "small.yaml", SMALL_CLASSIFIER)
        with mock.patch("asvplan.classifier.training.BCELoss", _NanLoss):
            code = launcher.main(["train", "--config", config, "--epochs", "1", "--out", out])
        self.assertEqual(code, launcher.EXIT_DIVERGED)
        self.assertEqual(self.manifest(out)["exit_code"], launcher.EXIT_DIVERGED)
        self.assertFalse(os.path.exists(os.path.join(out, "weights.json")))


if __name__ == "__main__":
    unittest.main()
