#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import unittest

import asvplan


try:
    from ..benchmarks import benchmark
except (ImportError, ValueError):
    # ValueError is raised for relative import
    # when calling $python -m unittest test/test_benchmark.py
    from benchmarks import benchmark


class TestBenchmark(unittest.TestCase):
    def setUp(self) -> None:
        asvplan.init()

    def test_random_snapshot(self) -> None:
        """Benchmark snapshots keep every obstacle within sensing range"""
        snapshot, goal, config = benchmark.random_snapshot(5, seed=3)
        self.assertEqual(len(snapshot.obstacles), 5)
        self.assertGreater(config.sensing_range, 1000.0)
        self.assertTrue(0.0 <= goal.theta_wp < 360.0)

    def test_planner_latency_budget(self) -> None:
        """MOA_PLUS plans among 30 obstacles with 1000 particles within 150 ms"""
        planner_benchmarks = benchmark.PlannerBenchmarks(
            obstacle_counts=(30,), n_loops=5, variants=("MOA_PLUS",)
        )
        planner_benchmarks.run()
        row = planner_benchmarks.df.iloc[0]
        self.assertEqual(row.variant, "MOA_PLUS")
        self.assertEqual(int(row.particles), 1000)
        self.assertLessEqual(float(row["runtime ms mean"]), 150.0, str(planner_benchmarks))

    def test_planner_benchmarks_run(self) -> None:
        """Every variant gets one row per obstacle count"""
        planner_benchmarks = benchmark.PlannerBenchmarks(obstacle_counts=(2,), n_loops=1)
        planner_benchmarks.run()
        self.assertEqual(
            list(planner_benchmarks.df.variant), ["MOA_LSTM", "MOA_PLUS", "MOA", "VO_PLUS", "VO"]
        )
        self.assertTrue((planner_benchmarks.df["runtime ms"] > 0.0).all())

    def test_classifier_benchmarks_data(self) -> None:
        """Classifier benchmarks populate one row per window length"""
        classifier_benchmarks = benchmark.ClassifierBenchmarks(n_loops=1)
        self.assertEqual(repr(classifier_benchmarks), "No classifier benchmarks")
        classifier_benchmarks.run()
        self.assertEqual(list(classifier_benchmarks.df.window), [1, 5, 10])
        self.assertTrue(((classifier_benchmarks.df.p_l >= 0) & (classifier_benchmarks.df.p_l <= 1)).all())


if __name__ == "__main__":
    unittest.main()
