import math

import numpy as np
import pytest

from mmgesture.exceptions import RangeGateError, SequenceTooShortError
from mmgesture.models.gesture import GestureKind, GestureScript, NegativeMotion, Scatterer
from mmgesture.services.radar_front import (
    expected_bins, gesture_trajectory, motion_span, synthesize_frame, synthesize_scene, synthesize_script,
)


def _range_spectrum(cube):
    return np.abs(np.fft.fft(cube.samples, axis=1))


def _doppler_spectrum(cube, range_bin):
    ranged = np.fft.fft(cube.samples, axis=1)[:, range_bin, 0]
    return np.abs(np.fft.fftshift(np.fft.fft(ranged)))


def _angle_spectrum(cube, range_bin, size=32):
    ranged = np.fft.fft(cube.samples, axis=1)[0, range_bin, :]
    return np.abs(np.fft.fftshift(np.fft.fft(ranged, n=size)))


def test_empty_scene_is_silent(radar):
    cube = synthesize_frame(radar, [])
    assert cube.shape == (128, 128, 8)
    assert not np.any(cube.samples)


def test_range_tone_lands_on_its_bin(radar):
    cube = synthesize_frame(radar, [Scatterer(0.47, 0.0)])
    spectrum = _range_spectrum(cube)
    for channel in range(radar.rx_channels):
        assert int(np.argmax(spectrum[0, :, channel])) == 10


def test_doppler_tone_lands_on_its_bin(radar):
    cube = synthesize_frame(radar, [Scatterer(0.47, 0.0, 0.39)])
    assert int(np.argmax(_doppler_spectrum(cube, 10))) == 64 + 10
    cube = synthesize_frame(radar, [Scatterer(0.47, 0.0, -0.39)])
    assert int(np.argmax(_doppler_spectrum(cube, 10))) == 64 - 10


@pytest.mark.parametrize("degrees,expected", [(0.0, 16), (30.0, 24), (-30.0, 8)])
def test_angle_tone_lands_on_its_bin(radar, degrees, expected):
    cube = synthesize_frame(radar, [Scatterer(0.47, math.radians(degrees))])
    assert int(np.argmax(_angle_spectrum(cube, 10))) == expected


def test_superposition_is_linear(radar):
    a = [Scatterer(0.5, 0.2, 0.3, 1.0)]
    b = [Scatterer(0.9, -0.4, -0.8, 0.6), Scatterer(1.2, 0.0, 0.0, 2.0)]
    both = synthesize_frame(radar, a + b).samples
    separate = synthesize_frame(radar, a).samples + synthesize_frame(radar, b).samples
    np.testing.assert_allclose(both, separate, atol=1e-9)


def test_same_seed_same_cube(radar):
    scene = [Scatterer(0.6, 0.1, 0.5)]
    first = synthesize_frame(radar, scene, noise_snr=10, seed=[3, 4])
    second = synthesize_frame(radar, scene, noise_snr=10, seed=[3, 4])
    third = synthesize_frame(radar, scene, noise_snr=10, seed=[3, 5])
    assert np.array_equal(first.samples, second.samples)
    assert not np.array_equal(first.samples, third.samples)


def test_noise_power_follows_snr(radar):
    cube = synthesize_frame(radar, [], noise_snr=0.0, seed=0)
    assert np.mean(np.abs(cube.samples) ** 2) == pytest.approx(1.0, rel=0.05)


@pytest.mark.slow
def test_bin_mapping_oracle(radar, rng):
    hits = 0
    trials = 1000
    for _ in range(trials):
        scatterer = Scatterer(
            range=float(rng.uniform(0.2, 1.4)),
            azimuth=float(rng.uniform(-1.0, 1.0)),
            radial_velocity=float(rng.uniform(-2.0, 2.0)),
        )
        bins = expected_bins(scatterer, radar)
        cube = synthesize_frame(radar, [scatterer])
        range_bin = int(np.argmax(_range_spectrum(cube)[0, :32, 0]))
        doppler_bin = int(np.argmax(_doppler_spectrum(cube, range_bin)))
        angle_bin = int(np.argmax(_angle_spectrum(cube, range_bin)))
        hits += (
            abs(range_bin - bins["range"]) <= 1
            and abs(doppler_bin - bins["doppler"]) <= 1
            and abs(angle_bin - bins["angle"]) <= 1
        )
    assert hits >= 0.99 * trials


def test_push_moves_monotonically_towards_the_radar(radar):
    frames = gesture_trajectory(GestureScript(GestureKind.PH, anchor_distance=0.8), radar)
    palm = np.array([scene[0].range for scene in frames])
    assert len(frames) == 20
    assert palm[0] == pytest.approx(0.8)
    assert palm[-1] == pytest.approx(0.55)
    assert np.all(np.diff(palm) < 0)
    assert all(abs(scene[0].azimuth) < 1e-12 for scene in frames)


def test_pull_moves_away(radar):
    frames = gesture_trajectory(GestureScript(GestureKind.PL, anchor_distance=0.8), radar)
    palm = np.array([scene[0].range for scene in frames])
    assert np.all(np.diff(palm) > 0)
    assert all(scene[0].radial_velocity > 0 for scene in frames)


def test_swipes_are_time_reversed(radar):
    left = gesture_trajectory(GestureScript(GestureKind.LS), radar)
    right = gesture_trajectory(GestureScript(GestureKind.RS), radar)
    left_track = np.array([scene[0].azimuth for scene in left])
    right_track = np.array([scene[0].azimuth for scene in right])
    np.testing.assert_allclose(left_track, right_track[::-1], atol=1e-12)
    assert left_track[0] > left_track[-1]
    ranges = [scene[0].range for scene in left]
    assert max(ranges) - min(ranges) < 1e-9


def test_circles_stay_near_the_anchor(radar):
    for kind in (GestureKind.CT, GestureKind.AT):
        frames = gesture_trajectory(GestureScript(kind, anchor_distance=0.8), radar)
        palm = np.array([scene[0].range for scene in frames])
        assert palm.min() >= 0.7 - 1e-9
        assert palm.max() <= 0.9 + 1e-9


def test_speed_scale_halves_the_motion_frames(radar):
    assert motion_span(GestureScript(GestureKind.PH), radar) == (20, 20)
    assert motion_span(GestureScript(GestureKind.PH, speed_scale=2.0), radar) == (20, 10)
    fast = gesture_trajectory(GestureScript(GestureKind.PH, speed_scale=2.0), radar)
    assert fast[12][0].radial_velocity == 0.0
    assert fast[12][0].range == pytest.approx(0.55)


@pytest.mark.parametrize("motion", list(NegativeMotion))
def test_negative_motions_render(radar, motion):
    script = GestureScript(GestureKind.NG, negative_motion=motion)
    frames = gesture_trajectory(script, radar)
    assert len(frames) == 20
    assert any(s.radial_velocity != 0 for scene in frames for s in scene)


def test_body_and_ghosts(radar):
    frames = gesture_trajectory(GestureScript(GestureKind.PH, multipath=True), radar)
    body = [s for s in frames[0] if s.reflectivity == 2.0]
    assert len(body) == 1 and body[0].radial_velocity == 0.0
    plain = gesture_trajectory(GestureScript(GestureKind.PH), radar)
    assert len(frames[0]) > len(plain[0])


def test_range_gate_is_enforced(radar):
    with pytest.raises(RangeGateError):
        gesture_trajectory(GestureScript(GestureKind.PL, anchor_distance=1.6), radar)


def test_short_script_is_rejected(radar):
    with pytest.raises(SequenceTooShortError):
        gesture_trajectory(GestureScript(GestureKind.PH, duration=0.1), radar)


def test_scene_seeds_per_frame(radar):
    scenes = [[Scatterer(0.5, 0.0, 0.3)]] * 3
    cubes = synthesize_scene(radar, scenes, noise_snr=20, seed=7)
    assert [c.frame_index for c in cubes] == [0, 1, 2]
    again = synthesize_frame(radar, scenes[1], noise_snr=20, seed=[7, 1])
    assert np.array_equal(cubes[1].samples, again.samples)
    script_cubes = synthesize_script(GestureScript(GestureKind.PH, noise_snr=20, seed=7), radar)
    assert len(script_cubes) == 20
