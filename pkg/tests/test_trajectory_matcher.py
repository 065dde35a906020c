import numpy as np
import pytest

from mmgesture.exceptions import EmptyInputError
from mmgesture.models.gesture import DRAISequence, GestureKind, GestureScript, TrajectoryProfile
from mmgesture.services.drai_pipeline import process_sequence
from mmgesture.services.radar_front import synthesize_script
from mmgesture.services.trajectory_matcher import (
    TrajectoryMatcher, dtw_distance, dtw_nearest_neighbor, synthetic_templates,
)


def _profile(points):
    return TrajectoryProfile(points=np.asarray(points, dtype=np.float64))


def test_distance_to_itself_is_zero(rng):
    profile = _profile(rng.uniform(1, 32, size=(12, 2)))
    assert dtw_distance(profile, profile) == 0.0


def test_distance_is_symmetric(rng):
    a = _profile(rng.uniform(1, 32, size=(9, 2)))
    b = _profile(rng.uniform(1, 32, size=(14, 2)))
    assert dtw_distance(a, b) == pytest.approx(dtw_distance(b, a))


def test_known_alignment():
    assert dtw_distance(_profile([[0, 0], [1, 0], [2, 0]]), _profile([[0, 0], [2, 0]])) == pytest.approx(1.0)
    assert dtw_distance(_profile([[0, 0]]), _profile([[3, 4], [0, 0], [6, 8]])) == pytest.approx(15.0)


def test_time_stretch_costs_nothing():
    slow = _profile([[1, 1], [1, 1], [2, 2], [2, 2], [3, 3]])
    fast = _profile([[1, 1], [2, 2], [3, 3]])
    assert dtw_distance(slow, fast) == 0.0


def test_empty_profiles_are_rejected():
    with pytest.raises(EmptyInputError):
        dtw_distance(_profile(np.zeros((0, 2))), _profile([[0, 0]]))
    with pytest.raises(EmptyInputError):
        dtw_nearest_neighbor(_profile([[0, 0]]), [])


def test_nearest_template_wins():
    templates = [
        (_profile([[1, 20], [1, 15], [1, 10]]), GestureKind.PH),
        (_profile([[1, 10], [1, 15], [1, 20]]), GestureKind.PL),
    ]
    assert dtw_nearest_neighbor(_profile([[1, 19], [1, 12]]), templates) is GestureKind.PH
    assert dtw_nearest_neighbor(_profile([[1, 11], [1, 16], [1, 21]]), templates) is GestureKind.PL


def test_first_template_wins_a_tie():
    same = _profile([[1, 2], [3, 4]])
    templates = [(same, GestureKind.LS), (same, GestureKind.RS)]
    assert dtw_nearest_neighbor(same, templates) is GestureKind.LS


def test_empty_segment_is_a_non_gesture(track_sequence):
    matcher = TrajectoryMatcher.from_sequences([track_sequence([(5, 5), (6, 6)], label=GestureKind.CT)])
    prediction = matcher.predict(DRAISequence.from_array(np.zeros((4, 32, 32))))
    assert prediction.label is GestureKind.NG


def test_silent_frames_are_skipped(track_sequence):
    matcher = TrajectoryMatcher.from_sequences(
        [
            track_sequence([(20, 16), (18, 16), (16, 16)], label=GestureKind.PH),
            track_sequence([(16, 16), (18, 16), (20, 16)], label=GestureKind.PL),
        ]
    )
    query = track_sequence([(20, 16), (17, 16), (15, 16), (15, 16)])
    stack = query.stack()
    stack[-1] = 0.0
    prediction = matcher.predict(DRAISequence.from_array(stack))
    assert prediction.label is GestureKind.PH
    assert len(matcher.templates) == 2


def test_synthetic_templates_recognise_faster_gestures(settings):
    matcher = synthetic_templates(settings)
    assert len(matcher.templates) == 6
    for kind in GestureKind:
        if not kind.is_gesture:
            continue
        script = GestureScript(kind=kind, speed_scale=1.15)
        seq, _ = process_sequence(synthesize_script(script, settings.radar), settings.radar, settings.pipeline)
        assert matcher.predict(seq).label is kind, kind
