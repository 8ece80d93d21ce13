#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import logging
import math
import os
import unittest
from dataclasses import asdict

import numpy as np
import pandas as pd
from asvplan.config import cfg
from asvplan.errors import CorruptFile, MalformedCsv, VersionMismatch
from asvplan.infogain import NoiseModel
from asvplan.simulator import (
    AisReceiver,
    Command,
    EgoSpec,
    Mix,
    ObstacleSpec,
    Outcome,
    Policy,
    Scenario,
    ais_observe,
    batch_jobs,
    behavior_policy,
    load_ais_csv,
    load_scenario,
    monte_carlo,
    randomize_scenario,
    reconstructed_tracks,
    replay_accident,
    run_scenario,
    save_scenario,
    step_kinematics,
    summarize,
)
from asvplan.simulator.replay import obstacle_beam
from asvplan.simulator.sensor import propagate_fix
from asvplan.topology import VesselState
from omegaconf import OmegaConf
from test.asvplan_test_case import AsvPlanTestCase, config_path


def obstacle(x, y, heading=0.0, speed=0.0, id="o00", length=2.5):
    state = VesselState(t=0.0, pos=(x, y), heading=heading, speed=speed, id=id, length=length)
    return ObstacleSpec(state=state)


class TestKinematics(AsvPlanTestCase):
    def test_turn_rate_limit(self):
        s = VesselState(t=0.0, pos=(0.0, 0.0), heading=0.0, speed=0.0)
        moved = step_kinematics(s, Command(90.0, 1.0), EgoSpec(), 0.5)
        self.assertAlmostEqual(moved.heading, 22.5)
        self.assertAlmostEqual(moved.speed, 0.5)
        self.assertAlmostEqual(moved.t, 0.5)
        expected = 0.25 * np.array([math.sin(math.radians(22.5)), math.cos(math.radians(22.5))])
        self._check(moved.position, expected, "position does not integrate the new velocity")

    def test_half_turn_goes_clockwise(self):
        s = VesselState(t=0.0, pos=(0.0, 0.0), heading=0.0, speed=1.0)
        moved = step_kinematics(s, Command(180.0, 0.4), EgoSpec(), 0.5)
        self.assertAlmostEqual(moved.heading, 22.5)
        self.assertAlmostEqual(moved.speed, 1.0)

    def test_deceleration_limit(self):
        s = VesselState(t=0.0, pos=(0.0, 0.0), heading=45.0, speed=2.5)
        moved = step_kinematics(s, Command(45.0, 0.0), EgoSpec(), 1.0)
        self.assertAlmostEqual(moved.speed, 1.5)
        self.assertAlmostEqual(moved.heading, 45.0)

    def test_invalid_inputs(self):
        s = VesselState(t=0.0, pos=(0.0, 0.0), heading=0.0, speed=0.0)
        with self.assertRaises(ValueError):
            step_kinematics(s, Command(0.0, 1.0), EgoSpec(), 0.0)
        for bad in ({"length": 0.0}, {"v_max": -1.0}, {"turn_rate_max": 0.0}, {"accel_max": -1.0}):
            with self.assertRaises(ValueError):
                EgoSpec(**bad)
        self.assertEqual(EgoSpec.for_agent(4.0, 2.0, 0.0).v_max, 0.0)


class TestSensor(AsvPlanTestCase):
    def setUp(self):
        super().setUp()
        self.truth = VesselState(t=1.0, pos=(10.0, -5.0), heading=90.0, speed=2.0, id="o01")

    def test_broadcast_grid(self):
        self.assertIsNone(ais_observe(self.truth, NoiseModel(), 0.5, seed=0))
        fix = ais_observe(self.truth, NoiseModel(), 1.0, seed=0)
        self.assertEqual(fix.state, self.truth)
        self.assertAlmostEqual(fix.available_at, 1.5)

    def test_noise_is_keyed(self):
        nm = NoiseModel(0.3, 0.3, 0.3, 0.5)
        first = ais_observe(self.truth, nm, 1.0, seed=4)
        self.assertEqual(first, ais_observe(self.truth, nm, 1.0, seed=4))
        self.assertNotEqual(first.state.pos, ais_observe(self.truth, nm, 1.0, seed=5).state.pos)
        self.assertNotEqual(first.state.pos, self.truth.pos)

    def test_receiver_delay(self):
        ego = VesselState(t=1.0, pos=(0.0, 0.0), heading=0.0, speed=1.0)
        receiver = AisReceiver()
        receiver.broadcast(ais_observe(self.truth, NoiseModel(), 1.0, seed=0), ego)
        receiver.broadcast(None, ego)
        self.assertEqual(receiver.deliver(1.2), [])
        self.assertEqual(receiver.latest(), {})
        self.assertEqual(receiver.deliver(1.5), ["o01"])
        self.assertEqual(receiver.latest()["o01"].state, self.truth)
        self.assertEqual(receiver.deliver(2.0), [])
        receiver.forget("o01")
        self.assertEqual(receiver.latest(), {})

    def test_propagate_fix(self):
        fix = ais_observe(self.truth, NoiseModel(), 1.0, seed=0)
        self.assertEqual(propagate_fix(fix, 0.5), self.truth)
        moved = propagate_fix(fix, 3.0)
        self._check(moved.position, [14.0, -5.0], "constant velocity extrapolation is wrong")
        self.assertEqual(moved.t, 3.0)


class TestPolicies(AsvPlanTestCase):
    def setUp(self):
        super().setUp()
        self.spec = EgoSpec.from_config()
        self.state = VesselState(t=0.0, pos=(0.0, 0.0), heading=30.0, speed=1.25, id="o00")

    def test_constant_velocity(self):
        command = behavior_policy(Policy.CV, self.state, [], (100.0, 0.0), self.spec)
        self.assertEqual((command.heading, command.speed_ratio), (30.0, 0.5))
        # cooperative kinds without a goal hold course too
        command = behavior_policy("APF", self.state, [], None, self.spec)
        self.assertEqual((command.heading, command.speed_ratio), (30.0, 0.5))
        with self.assertRaises(ValueError):
            behavior_policy("DRIFT", self.state, [], None, self.spec)

    def test_cooperative_kinds_head_for_goal(self):
        """Without neighbors every steering policy points at the goal at full speed"""
        state = VesselState(t=0.0, pos=(0.0, 0.0), heading=90.0, speed=2.5, id="o00")
        for kind in (Policy.APF, Policy.DWA, Policy.MOA):
            command = behavior_policy(kind, state, [state], (100.0, 0.0), self.spec)
            self.assertAlmostEqual(command.heading, 90.0, msg=kind.value)
            self.assertEqual(command.speed_ratio, 1.0, kind.value)


class TestScenario(AsvPlanTestCase):
    def test_validation(self):
        with self.assertRaises(ValueError):
            Scenario(seed=0, start=(0.0, 0.0), goal=(0.0, 0.0))
        with self.assertRaises(ValueError):
            Scenario(seed=0, obstacles=(obstacle(150.0, 0.0),))
        with self.assertRaises(ValueError):
            Scenario(seed=0, obstacles=(obstacle(1.0, 0.0), obstacle(2.0, 0.0)))
        with self.assertRaises(ValueError):
            Scenario(seed=0, obstacles=(obstacle(1.0, 0.0, id="ego"),))

    def test_route(self):
        sc = Scenario(seed=0, waypoints=[(50, 0)], goal=(0, 90))
        self.assertEqual(sc.route, ((50.0, 0.0), (0.0, 90.0)))
        self.assertEqual(Scenario(seed=0).route, ((0.0, 100.0),))

    def test_save_load(self):
        sc = randomize_scenario(6, Mix.MIXED_80_20, seed=5)
        path = os.path.join(self.tmpdir(), "scenario.yaml")
        save_scenario(sc, path)
        self.assertEqual(load_scenario(path), sc)

    def test_load_errors(self):
        directory = self.tmpdir()
        documents = {
            "yaml.yaml": ("obstacles: [unclosed\n", CorruptFile),
            "format.yaml": ("format: something.else\n", CorruptFile),
            "version.yaml": ("format: asvplan.scenario\nformat_version: 2\n", VersionMismatch),
            "obstacle.yaml": ("seed: 1\nobstacles:\n  - {id: a, y: 0, heading: 0}\n", CorruptFile),
            "list.yaml": ("- 1\n- 2\n", CorruptFile),
        }
        for name, (text, error) in documents.items():
            path = os.path.join(directory, name)
            with open(path, "w") as stream:
                stream.write(text)
            with self.assertRaises(error, msg=name):
                load_scenario(path)

    def test_bundled_scenarios(self):
        sc = load_scenario(config_path("scenarios", "waypoint_loop.yaml"))
        self.assertEqual(len(sc.route), 5)
        self.assertEqual(load_scenario(config_path("scenarios", "empty.yaml")).obstacles, ())

    def test_randomize(self):
        sc = randomize_scenario(10, Mix.MIXED_80_20, seed=9)
        self.assertEqual([o.id for o in sc.obstacles], [f"o{i:02d}" for i in range(10)])
        self.assertEqual(sc.n_cooperative, 2)
        self.assertEqual(sc, randomize_scenario(10, Mix.MIXED_80_20, seed=9))
        self.assertNotEqual(sc, randomize_scenario(10, Mix.MIXED_80_20, seed=10))
        for obs in sc.obstacles:
            pos = np.asarray(obs.state.pos)
            self.assertGreater(np.hypot(*(pos - np.asarray(sc.start))), 10.0)
            self.assertGreater(np.hypot(*(pos - np.asarray(sc.goal))), 10.0)
            self.assertTrue(1.0 <= obs.state.length <= 4.0)
            if obs.policy.cooperative:
                self.assertIsNotNone(obs.goal)

        quiet = randomize_scenario(5, Mix.NON_COOP_ONLY, seed=9, noise=False)
        self.assertEqual(quiet.n_cooperative, 0)
        self.assertTrue(all(o.policy is Policy.CV for o in quiet.obstacles))
        self.assertTrue(all(o.noise == NoiseModel() for o in quiet.obstacles))
        self.assertEqual(randomize_scenario(0, seed=1).obstacles, ())
        with self.assertRaises(ValueError):
            randomize_scenario(-1)


class TestEpisode(AsvPlanTestCase):
    def test_empty_scenario(self):
        sc = load_scenario(config_path("scenarios", "empty.yaml"))
        log = run_scenario(sc, "MOA")
        self.assertEqual(log.outcome, Outcome.SUCCESS)
        self.assertTrue(log.reached_goal)
        self.assertEqual(log.min_cpa, math.inf)
        frame = log.to_frame()
        ego = frame[frame.vessel_id == "ego"]
        self.assertTrue((ego.x == 0.0).all())
        self.assertTrue((ego.heading_deg == 0.0).all())
        self.assertGreaterEqual(float(ego.y.iloc[-1]), 90.0)
        row = log.metrics_row(0, sc.mix.value, sc.noise, False)
        self.assertTrue(row.success)
        self.assertEqual(row.total_encounters, 0)
        self.assertAlmostEqual(row.traveled_distance, float(ego.y.iloc[-1]) + 100.0 + 2.5 * 0.5, delta=2.0)

    def test_collision_at_start(self):
        sc = load_scenario(config_path("scenarios", "collision_forced.yaml"))
        log = run_scenario(sc, "MOA")
        self.assertEqual(log.outcome, Outcome.COLLISION)
        self.assertEqual(log.duration_s, 0.0)
        self.assertAlmostEqual(log.min_cpa, 1.0)
        row = log.metrics_row(1, sc.mix.value, sc.noise, False)
        self.assertTrue(row.collision)
        self.assertFalse(row.success_relaxed)

    def test_nearmiss(self):
        # stationary vessel inside R but outside C of the ego at t=0
        sc = Scenario(seed=2, obstacles=(obstacle(8.0, -100.0),), noise=False)
        log = run_scenario(sc, "MOA")
        self.assertEqual(log.outcome, Outcome.NEARMISS)
        self.assertEqual(log.nearmiss_count, 1)
        row = log.metrics_row(1, sc.mix.value, sc.noise, False)
        self.assertFalse(row.success)
        self.assertTrue(row.success_relaxed)
        self.assertFalse(row.collision)
        self.assertEqual(row.total_encounters, 1)

    def test_timeout(self):
        sc = load_scenario(config_path("scenarios", "empty.yaml"))
        with cfg.temp_override({"simulator.timeout": 10.0}):
            log = run_scenario(sc, "VO")
        self.assertEqual(log.outcome, Outcome.TIMEOUT)
        self.assertFalse(log.reached_goal)
        self.assertEqual(log.duration_s, 10.0)
        self.assertEqual(len(log.to_frame()), 20)

    def test_determinism(self):
        sc = load_scenario(config_path("scenarios", "centerline.yaml"))
        with cfg.temp_override({"infogain.particles": 100}):
            first = run_scenario(sc, "MOA_PLUS")
            second = run_scenario(sc, "MOA_PLUS")
        pd.testing.assert_frame_equal(first.to_frame(), second.to_frame())
        pd.testing.assert_frame_equal(first.beliefs_frame(), second.beliefs_frame())
        self.assertEqual(first.outcome, second.outcome)
        self.assertNotEqual(first.outcome, Outcome.COLLISION)
        self.assertGreater(len(first.beliefs_frame()), 0)

    def test_head_on_avoided(self):
        sc = load_scenario(config_path("scenarios", "centerline.yaml"))
        with cfg.temp_override({"infogain.particles": 100}):
            log = run_scenario(sc, "MOA")
        self.assertNotEqual(log.outcome, Outcome.COLLISION)
        self.assertGreaterEqual(log.min_separation["o00"], 5.0)
        separation = log.separation_frame()
        self.assertEqual(list(separation.columns), ["t", "vessel_id", "separation"])
        self.assertAlmostEqual(separation.separation.min(), log.min_cpa)


class TestBatch(AsvPlanTestCase):
    def settings(self, **changes):
        values = {
            "obstacles": [2],
            "mixes": ["MIXED_80_20"],
            "noise": [True],
            "variants": ["VO", "MOA"],
            "rule_compliance": [False],
            "scenarios_per_bin": 1,
            "seed": 2024,
        }
        values.update(changes)
        return OmegaConf.create(values)

    def test_jobs(self):
        jobs = batch_jobs(
            self.settings(obstacles=[1, 2], mixes=["MIXED_80_20", "NON_COOP_ONLY"], noise=[True, False], scenarios_per_bin=3)
        )
        self.assertEqual(len(jobs), 48)
        self.assertEqual([job.index for job in jobs], list(range(48)))
        # variants of one scenario share its seed
        self.assertEqual(jobs[0].seed, jobs[1].seed)
        self.assertNotEqual(jobs[0].seed, jobs[2].seed)
        self.assertEqual(len(batch_jobs()), 3 * 2 * 2 * 5 * 100)

    def test_workers_do_not_change_results(self):
        settings = self.settings()
        with cfg.temp_override({"infogain.particles": 50}):
            serial, timing = monte_carlo(settings, workers=1)
            parallel, _ = monte_carlo(settings, workers=2)
        pd.testing.assert_frame_equal(serial, parallel)
        self.assertEqual(len(serial), 2)
        self.assertNotIn("planner_ms_mean", serial.columns)
        self.assertIn("planner_ms_mean", timing.columns)

        summary = summarize(serial, variant_order=["MOA", "VO"])
        self.assertEqual(list(summary.variant), ["MOA", "VO"])
        for column in ("success_rate", "success_std", "nearmiss_total", "min_cpa_mean", "TE", "AET"):
            self.assertIn(column, summary.columns)
        self.assertTrue((summary.episodes == 1).all())

    def test_variant_ordering(self):
        """Variants with a safety term keep clear of a vessel the VO baseline grazes"""
        # stationary vessel 6 m off the straight route: outside C, inside R
        sc = Scenario(seed=4, obstacles=(obstacle(6.0, 0.0),), noise=False)
        variants = ["MOA_PLUS", "MOA", "VO"]
        with cfg.temp_override({"infogain.particles": 100}):
            logs = [run_scenario(sc, variant) for variant in variants]
        rows = [asdict(log.metrics_row(1, sc.mix.value, sc.noise, False)) for log in logs]
        summary = summarize(pd.DataFrame(rows), variant_order=variants).set_index("variant")
        self.assertEqual(list(summary.index), variants)
        self.assertFalse(summary.collision_rate.any())

        self.assertEqual(summary.loc["VO", "success_rate"], 0.0)
        self.assertEqual(summary.loc["VO", "nearmiss_total"], 1)
        self.assertAlmostEqual(summary.loc["VO", "min_cpa_mean"], 6.0, delta=0.1)
        for variant in ("MOA_PLUS", "MOA"):
            self.assertGreaterEqual(summary.loc[variant, "success_rate"], summary.loc["VO", "success_rate"])
            self.assertLessEqual(summary.loc[variant, "nearmiss_total"], summary.loc["VO", "nearmiss_total"])
            self.assertGreater(summary.loc[variant, "min_cpa_mean"], summary.loc["VO", "min_cpa_mean"] + 1.0)


class TestReplay(AsvPlanTestCase):
    def test_reconstructed_tracks(self):
        frame = reconstructed_tracks()
        meeting = frame[frame.t_s == 480.0]
        self.assertEqual(sorted(meeting.id), ["A", "B"])
        self._check(meeting[["x_m", "y_m"]].to_numpy(), np.zeros((2, 2)), "vessels do not meet")
        self.assertEqual(frame.t_s.max(), 1100.0)

    def test_obstacle_beam(self):
        self.assertAlmostEqual(obstacle_beam(225.0), 36.0)
        with cfg.temp_override({"replay.beam_ratio": 0.25}):
            self.assertAlmostEqual(obstacle_beam(12.0), 3.0)

    def test_malformed_csv(self):
        frame = reconstructed_tracks(duration=20.0)
        directory = self.tmpdir()
        path = os.path.join(directory, "good.csv")
        frame.to_csv(path, index=False)
        self.assertEqual(len(load_ais_csv(path)), len(frame))

        bad = {
            "missing": frame.drop(columns="speed_mps"),
            "negative": frame.assign(speed_mps=-1.0),
            "duplicate": pd.concat([frame, frame.iloc[:1]]),
            "text": frame.assign(x_m="east"),
        }
        for name, table in bad.items():
            path = os.path.join(directory, f"{name}.csv")
            table.to_csv(path, index=False)
            with self.assertRaises(MalformedCsv, msg=name):
                load_ais_csv(path)
        with self.assertRaises(MalformedCsv):
            replay_accident(frame, "C", historical=True)

    def test_historical_collision(self):
        log = replay_accident(reconstructed_tracks(), "A", historical=True)
        self.assertEqual(log.outcome, Outcome.COLLISION)
        self.assertEqual(log.variant, "HISTORICAL")
        self.assertLess(log.duration_s, 480.0)
        self.assertLess(log.min_cpa, 450.0)

    def test_replanned_avoids_collision(self):
        with cfg.temp_override({"infogain.particles": 100}):
            log = replay_accident(reconstructed_tracks(), "A", variant="MOA_PLUS", duration=700.0)
        logging.info(f"Replanned replay: {log.outcome.value}, {log.min_cpa:.1f} m")
        self.assertNotEqual(log.outcome, Outcome.COLLISION)
        self.assertGreaterEqual(log.min_cpa, 450.0)
        beliefs = log.beliefs_frame()
        self.assertEqual(set(beliefs.vessel_id), {"B"})


# This code only runs when executing the file outside the test runner
if __name__ == "__main__":
    unittest.main()
