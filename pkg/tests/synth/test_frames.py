import math

import numpy as np
import pytest

from nlos_ssl.geometry.vector import angle_between
from nlos_ssl.synth.frames import FrameSynthesizer, emit_frames, perturb_direction
from nlos_ssl.synth.models import Scenario


def make_scenario(**overrides):
    fields = {
        "scene": {"builder": "nlos"},
        "listener": {"position": (1.5, 1.5, 1.0)},
        "trajectory": [{"time": 0.0, "position": (5.5, 4.0, 1.0)}],
        "duration": 1.0,
        "seed": 4,
    }
    fields.update(overrides)
    return Scenario.model_validate(fields)


def test_perturbation_angle_is_half_normal(rng):
    sigma = math.radians(3.0)
    direction = np.array([0.0, 0.6, 0.8])

    angles = [angle_between(direction, perturb_direction(direction, sigma, rng)) for _ in range(4000)]

    assert np.mean(angles) == pytest.approx(sigma * math.sqrt(2.0 / math.pi), rel=0.05)


def test_perturbation_keeps_unit_length_and_zero_noise_is_exact(rng):
    direction = np.array([1.0, 0.0, 0.0])

    assert np.linalg.norm(perturb_direction(direction, 0.1, rng)) == pytest.approx(1.0)
    np.testing.assert_array_equal(perturb_direction(direction, 0.0, rng), direction)


def test_noiseless_frame_reports_exact_arrival_directions():
    synthesizer = FrameSynthesizer(make_scenario(noise=0.0))

    frame = synthesizer.frame(0)

    assert len(frame.observations) == len(frame.paths) > 0
    for observation, path in zip(frame.observations, frame.paths):
        np.testing.assert_allclose(observation.direction, path.arrival_direction)
        np.testing.assert_allclose(observation.position, [1.5, 1.5, 1.0])
        assert observation.frame == 0
    assert [o.index for o in frame.observations] == list(range(len(frame.observations)))


def test_hidden_source_frames_are_not_line_of_sight():
    frame = FrameSynthesizer(make_scenario()).frame(0)

    assert not frame.line_of_sight
    np.testing.assert_allclose(frame.source, [5.5, 4.0, 1.0])


def test_visible_source_frames_are_line_of_sight():
    scenario = make_scenario(scene={"builder": "shoebox"})

    assert FrameSynthesizer(scenario).frame(0).line_of_sight


def test_frames_are_reproducible_per_seed():
    a = FrameSynthesizer(make_scenario()).frame(2)
    b = FrameSynthesizer(make_scenario()).frame(2)
    c = FrameSynthesizer(make_scenario(seed=5)).frame(2)

    for x, y in zip(a.observations, b.observations):
        np.testing.assert_array_equal(x.direction, y.direction)
    assert any(not np.array_equal(x.direction, z.direction) for x, z in zip(a.observations, c.observations))


def test_silent_frames_carry_truth_but_no_observations():
    scenario = make_scenario(silent=[(0.3, 0.5)])

    frames = FrameSynthesizer(scenario).frames()

    assert [frame.silent for frame in frames] == [False, False, True, False, False]
    assert frames[2].observations == ()
    assert frames[2].paths


def test_emit_frames_matches_frame_count():
    streams = emit_frames(make_scenario(duration=0.6))

    assert len(streams) == 3
    assert all(observation.frame == i for i, stream in enumerate(streams) for observation in stream)
