"""
Nearest-neighbour gesture matching on trajectory profiles with dynamic
time warping. Serves as an independent reference classifier.
"""

from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from ..exceptions import EmptyInputError
from ..models.config import Settings
from ..models.gesture import DRAISequence, GestureKind, GestureScript, Prediction, SegmentWindow, TrajectoryProfile
from .augmentation import extract_trajectory_profile
from .drai_pipeline import process_sequence
from .radar_front import synthesize_script

# Frames whose peak is below this share of the segment peak count as empty.
EMPTY_FRAME_FRACTION = 1e-6


def dtw_distance(first: TrajectoryProfile, second: TrajectoryProfile) -> float:
    """Cumulative Euclidean cost of the best monotonic alignment of two profiles."""
    if len(first) == 0 or len(second) == 0:
        raise EmptyInputError("cannot align an empty profile")
    cost = cdist(first.points, second.points, metric="euclidean")
    n, m = cost.shape
    accumulated = np.full((n + 1, m + 1), np.inf)
    accumulated[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            accumulated[i, j] = cost[i - 1, j - 1] + min(
                accumulated[i - 1, j], accumulated[i, j - 1], accumulated[i - 1, j - 1]
            )
    return float(accumulated[n, m])


def dtw_nearest_neighbor(
    query: TrajectoryProfile, templates: Sequence[Tuple[TrajectoryProfile, GestureKind]]
) -> GestureKind:
    """Label of the closest template; the first one wins a tie."""
    if not templates:
        raise EmptyInputError("no templates to match against")
    best_label, best_distance = templates[0][1], np.inf
    for profile, label in templates:
        distance = dtw_distance(query, profile)
        if distance < best_distance:
            best_label, best_distance = label, distance
    return best_label


def _positioned(seq: DRAISequence) -> DRAISequence:
    """Frames with a hand return; frames the ROI mask emptied carry no position."""
    peak = float(seq.stack().max()) if len(seq) else 0.0
    kept = [frame for frame in seq.frames if peak > 0 and frame.values.max() > EMPTY_FRAME_FRACTION * peak]
    return seq.with_frames(kept)


class TrajectoryMatcher:
    """Template store classifying whole DRAI sequences by their profiles."""

    def __init__(self, templates: Sequence[Tuple[TrajectoryProfile, GestureKind]] = ()):
        self.templates: List[Tuple[TrajectoryProfile, GestureKind]] = list(templates)

    @classmethod
    def from_sequences(cls, sequences: Sequence[DRAISequence]) -> "TrajectoryMatcher":
        return cls([(extract_trajectory_profile(_positioned(seq)), seq.label) for seq in sequences])

    def add(self, seq: DRAISequence) -> None:
        self.templates.append((extract_trajectory_profile(_positioned(seq)), seq.label))

    def predict(self, segment: Union[SegmentWindow, DRAISequence]) -> Prediction:
        seq = segment.frames if isinstance(segment, SegmentWindow) else segment
        kept = _positioned(seq)
        if len(kept) == 0:
            return Prediction(label=GestureKind.NG, confidence=1.0)
        label = dtw_nearest_neighbor(extract_trajectory_profile(kept), self.templates)
        return Prediction(label=label, confidence=1.0)


def synthetic_templates(settings: Settings, anchor_distance: float = 0.8, anchor_angle: float = 0.0) -> TrajectoryMatcher:
    """One clean, noiseless template per predefined gesture at the given anchor."""
    matcher = TrajectoryMatcher()
    for kind in GestureKind:
        if not kind.is_gesture:
            continue
        script = GestureScript(kind=kind, anchor_distance=anchor_distance, anchor_angle=anchor_angle)
        seq, _ = process_sequence(
            synthesize_script(script, settings.radar), settings.radar, settings.pipeline, kind, anchor_angle
        )
        matcher.add(seq)
    return matcher
