#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import unittest

import numpy as np
from asvplan.classifier import PassingBelief
from asvplan.errors import OutOfRange
from asvplan.infogain import (
    GainField,
    NoiseModel,
    action_velocities,
    cluster_gain,
    entropy,
    entropy_array,
    expected_left_probability,
    information_gain,
    left_probability,
    obstacle_gain,
    obstacle_weight,
    obstacle_weights,
    passing_probability,
    remap_gain,
    rollout_winding,
    sample_particles,
    side_counts,
    total_gain,
)
from asvplan.planner import Action, action_grid
from asvplan.topology import VesselState
from test.asvplan_test_case import AsvPlanTestCase


EGO = VesselState(t=0.0, pos=(-30.0, 0.0), heading=90.0, speed=2.5)
OBSTACLE = VesselState(t=0.0, pos=(0.0, 20.0), heading=225.0, speed=3.0, id="o00", length=4.0)
NOISE = NoiseModel(sigma_x=0.3, sigma_y=0.3, sigma_theta=0.3, sigma_v=0.5)


class TestInfoGain(AsvPlanTestCase):
    """
    Tests entropy, particle rollouts and the information-gain cost.
    """

    def test_entropy(self) -> None:
        p = np.linspace(0.0, 1.0, 101)
        h = entropy_array(p)
        self.assertTrue(np.all((h >= 0.0) & (h <= 1.0)))
        self.assertEqual(float(h[0]), 0.0)
        self.assertEqual(float(h[-1]), 0.0)
        self.assertAlmostEqual(float(h[50]), 1.0)
        self._check(h, h[::-1], "entropy symmetric in p_l")
        self.assertAlmostEqual(entropy(PassingBelief.uniform()), 1.0)

    def test_information_gain_bounds(self) -> None:
        grid = np.linspace(0.0, 1.0, 21)
        for current in grid:
            for expected in grid:
                gain = information_gain(
                    PassingBelief.from_left(current), PassingBelief.from_left(expected)
                )
                self.assertTrue(-1.0 <= gain <= 1.0)
                self.assertTrue(0.0 <= remap_gain(gain) <= 1.0)

    def test_remap(self) -> None:
        self.assertEqual(remap_gain(1.0), 0.0)
        self.assertEqual(remap_gain(-1.0), 1.0)
        self.assertEqual(remap_gain(0.0), 0.5)
        with self.assertRaises(OutOfRange):
            remap_gain(1.5)
        with self.assertRaises(OutOfRange):
            remap_gain(np.array([0.0, -1.2]))

    def test_noise_model(self) -> None:
        self.assertAlmostEqual(NOISE.trace, 0.09 + 0.09 + 0.09 + 0.25)
        with self.assertRaises(ValueError):
            NoiseModel(sigma_x=-0.1)
        drawn = NoiseModel.draw(np.random.default_rng(0), 0.3, 0.3, 0.5)
        self.assertTrue(0.0 <= drawn.sigma_v <= 0.5)

    def test_sample_particles(self) -> None:
        particles = sample_particles(OBSTACLE, NOISE, 500, 3, 0, "o00")
        self.assertEqual(len(particles), 500)
        self.assertTrue(np.all(particles.speed >= 0.0))
        self.assertTrue(np.all((particles.heading >= 0.0) & (particles.heading < 360.0)))
        self.assertAlmostEqual(float(particles.pos[:, 0].mean()), 0.0, delta=0.1)

        again = sample_particles(OBSTACLE, NOISE, 500, 3, 0, "o00")
        np.testing.assert_array_equal(particles.pos, again.pos)
        other = sample_particles(OBSTACLE, NOISE, 500, 3, 1, "o00")
        self.assertFalse(np.array_equal(particles.pos, other.pos))

        exact = sample_particles(OBSTACLE, NoiseModel(), 4, 0)
        self._check(exact.pos, np.tile(OBSTACLE.position, (4, 1)), "noiseless particles")
        self._check(exact.speed, np.full(4, 3.0), "noiseless speeds")
        with self.assertRaises(ValueError):
            sample_particles(OBSTACLE, NOISE, 0)

    def test_rollout_collision_line(self) -> None:
        """Particles closing straight on the ego keep a constant LOS bearing"""
        head_on = VesselState(t=0.0, pos=(0.0, 50.0), heading=180.0, speed=2.0, id="o01")
        particles = sample_particles(head_on, NoiseModel(), 3, 0)
        winding = rollout_winding(np.zeros(2), np.array([[0.0, 1.0]]), particles, 10.0)
        self.assertEqual(winding.shape, (1, 3))
        self.assertTrue(np.all(winding == 0.0))
        self.assertEqual(float(left_probability(winding[0])), 0.5)

    def test_rollout_matches_stepwise_sum(self) -> None:
        particles = sample_particles(OBSTACLE, NOISE, 50, 0)
        velocity = action_velocities(90.0, 1.0, 2.5)
        winding = rollout_winding(EGO.position, velocity, particles, 1.0)[0]
        los0 = particles.pos - EGO.position
        los1 = los0 + particles.velocity - velocity
        cross = los0[:, 0] * los1[:, 1] - los0[:, 1] * los1[:, 0]
        dot = (los0 * los1).sum(axis=1)
        self._check(winding, np.arctan2(cross, dot), "one-step winding")

    def test_one_step_counts_match_rollout(self) -> None:
        """The closed-form side test agrees with explicit winding angles"""
        particles = sample_particles(OBSTACLE, NOISE, 200, 5, 0, "o00")
        headings, ratios = action_grid()
        velocities = action_velocities(headings, ratios, 2.5)
        fast = expected_left_probability(EGO.position, velocities, particles, 1.0, 1.0)
        winding = rollout_winding(EGO.position, velocities, particles, 1.0, 1.0)
        # particles on the dead-band edge may round either way
        np.testing.assert_allclose(fast, left_probability(winding), atol=1.0 / len(particles))

        n_left, n_right = side_counts(EGO.position, velocities, particles, 1.0, 1.0)
        self.assertTrue(np.all(n_left + n_right <= len(particles)))
        self._check(
            fast, (n_left + 0.5 * (200 - n_left - n_right)) / 200.0, "p_l from side counts"
        )
        # zero-speed actions all share the ego-at-rest prediction
        still = fast[ratios == 0.0]
        self.assertTrue(np.all(still == still[0]))

        longer = expected_left_probability(EGO.position, velocities[:10], particles, 5.0, 1.0)
        winding = rollout_winding(EGO.position, velocities[:10], particles, 5.0, 1.0)
        self._check(longer, left_probability(winding), "multi-step rollout")

        with self.assertRaises(ValueError):
            side_counts(EGO.position, velocities[:1], particles, 1.0, 1.0, deadband=2.0)
        with self.assertRaises(ValueError):
            side_counts(EGO.position, velocities[:1], particles, 0.0, 1.0)

    def test_head_on_is_undetermined(self) -> None:
        head_on = VesselState(t=0.0, pos=(0.0, 50.0), heading=180.0, speed=2.0, id="o01")
        particles = sample_particles(head_on, NoiseModel(), 3, 0)
        ahead = action_velocities(0.0, 1.0, 2.5)
        ego = VesselState(t=0.0, pos=(0.0, 0.0), heading=0.0, speed=2.5)
        belief = passing_probability(ego, Action(0, 1.0), particles, 1.0, 2.5)
        self.assertEqual(belief.as_tuple(), (0.5, 0.5))
        n_left, n_right = side_counts(np.zeros(2), ahead, particles, 1.0, 1.0)
        self.assertEqual((int(n_left[0]), int(n_right[0])), (0, 0))

    def test_turning_raises_left_probability(self) -> None:
        """Turning the ego to 135 deg makes the crossing obstacle pass left more surely"""
        particles = sample_particles(OBSTACLE, NOISE, 1000, 0, 0, "o00")
        straight = passing_probability(EGO, Action(90, 1.0), particles, 1.0, 2.5)
        turned = passing_probability(EGO, Action(135, 1.0), particles, 1.0, 2.5)
        self.assertGreater(straight.p_l, 0.5)
        self.assertGreater(turned.p_l, straight.p_l)

    def test_obstacle_gain_field(self) -> None:
        headings, ratios = action_grid()
        gain = obstacle_gain(
            EGO, OBSTACLE, NOISE, PassingBelief.uniform(), headings, ratios, seed=0, v_max=2.5
        )
        self.assertEqual(gain.cost.shape, (1800,))
        self.assertTrue(np.all((gain.cost >= 0.0) & (gain.cost <= 1.0)))
        field = GainField(headings=headings, speed_ratios=ratios, values=gain.cost)
        self.assertLess(field.at(135, 1.0), field.at(90, 1.0))
        # the LOS sweep is fastest a little north of north-west
        best = field.argmin_heading(1.0)
        self.assertTrue(300.0 <= best <= 330.0, best)
        self.assertIsNone(gain.mean_winding)
        self.assertEqual(list(field.to_frame().columns), ["heading_deg", "speed_ratio", "I_tilde"])
        with self.assertRaises(KeyError):
            field.at(90, 0.3)

        compliant = obstacle_gain(
            EGO, OBSTACLE, NOISE, PassingBelief.uniform(), headings, ratios,
            seed=0, rule_factor=0.3, v_max=2.5,
        )
        left = compliant.mean_winding > 0.0
        self.assertEqual(compliant.mean_winding.shape, (1800,))
        self._check(compliant.cost[left], 0.3 * gain.cost[left], "rule compliance scaling")
        self._check(compliant.cost[~left], gain.cost[~left], "unscaled right passes")

    def test_gain_field_validation(self) -> None:
        with self.assertRaises(ValueError):
            GainField(headings=np.zeros(2), speed_ratios=np.ones(2), values=np.array([0.5, 1.5]))

    def test_weights(self) -> None:
        noises = [NOISE, NoiseModel(sigma_v=0.1), NoiseModel()]
        alphas = obstacle_weights(noises)
        self.assertEqual(float(alphas.max()), 1.0)
        self.assertAlmostEqual(obstacle_weight(noises, 1), 0.01 / NOISE.trace)
        self.assertEqual(obstacle_weight(noises, 2), 0.0)
        self._check(obstacle_weights([NoiseModel(), NoiseModel()]), np.ones(2), "zero-noise weights")
        with self.assertRaises(ValueError):
            obstacle_weights([])

    def test_cluster_and_total_gain(self) -> None:
        gains = np.array([[0.2, 0.4], [0.6, 0.8]])
        alphas = np.array([1.0, 0.5])
        self._check(cluster_gain(gains, alphas), [0.5, 0.8], "weighted member sum")
        self.assertAlmostEqual(cluster_gain([0.2, 0.6], alphas), 0.5)
        self.assertEqual(total_gain([], []), 0.0)
        total = total_gain([np.array([0.5, 0.8]), np.array([0.1, 0.1])], [alphas, np.ones(1)])
        self._check(total, [0.6, 0.9], "sum over clusters")


if __name__ == "__main__":
    unittest.main()
