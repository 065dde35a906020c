"""
Data models for radar scenes, DRAI frames and sequences, and segmentation
results.
"""

from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Deque, List, Optional, Sequence, Tuple

import numpy as np


class GestureKind(Enum):
    """Gesture vocabulary; values are the class ids used on disk and by the classifier."""
    PH = 0  # push
    PL = 1  # pull
    LS = 2  # left swipe
    RS = 3  # right swipe
    CT = 4  # clockwise turning
    AT = 5  # anticlockwise turning
    NG = 6  # negative sample (non-gesture motion)

    @property
    def is_gesture(self) -> bool:
        return self is not GestureKind.NG


# Pair-wise gestures have time-reversed trajectories.
GESTURE_PAIRS = {
    GestureKind.PH: GestureKind.PL,
    GestureKind.PL: GestureKind.PH,
    GestureKind.LS: GestureKind.RS,
    GestureKind.RS: GestureKind.LS,
    GestureKind.CT: GestureKind.AT,
    GestureKind.AT: GestureKind.CT,
}

UNLABELED = 255


class NegativeMotion(Enum):
    """Non-gesture motions recorded as negative samples."""
    LIFT_ARM = "lift_arm"
    WAVE = "wave"
    WALK = "walk"
    SIT_STAND = "sit_stand"
    TURN_AROUND = "turn_around"


@dataclass(frozen=True)
class Scatterer:
    """Point reflector seen by the radar during one frame."""
    range: float  # meters
    azimuth: float  # radians, positive to the right of boresight
    radial_velocity: float = 0.0  # m/s, positive moving away
    reflectivity: float = 1.0  # linear amplitude


@dataclass
class GestureScript:
    """Parametric description of one performed gesture."""
    kind: GestureKind
    anchor_distance: float = 0.8
    anchor_angle: float = 0.0
    speed_scale: float = 1.0
    duration: float = 1.0
    clutter: List[Scatterer] = field(default_factory=list)
    noise_snr: Optional[float] = None  # dB; None disables noise
    negative_motion: Optional[NegativeMotion] = None
    body_offset: Optional[float] = 0.2  # static torso this far behind the anchor, None for no body
    multipath: bool = False
    seed: int = 0


@dataclass
class AdcCube:
    """One frame of complex baseband samples, shape [chirps, samples, channels]."""
    samples: np.ndarray
    frame_index: int = 0

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.samples.shape


@dataclass
class RangeDopplerImage:
    """Range-Doppler image of one receive channel, shape [K, L], zero Doppler at L/2."""
    values: np.ndarray
    channel_index: int


@dataclass
class RangeDopplerAngleTensor:
    """Range-Doppler-angle matrix, shape [K, L, I]."""
    values: np.ndarray


@dataclass
class DraiFrame:
    """Dynamic range-angle image, shape [K, I], non-negative."""
    values: np.ndarray
    frame_index: int = 0
    timestamp: float = 0.0

    def with_values(self, values: np.ndarray) -> "DraiFrame":
        return replace(self, values=values)


@dataclass
class DRAISequence:
    """Ordered DRAI frames of one gesture sample."""
    frames: List[DraiFrame]
    label: Optional[GestureKind] = None
    angle_tag: float = 0.0  # anchor angle in radians

    def __len__(self) -> int:
        return len(self.frames)

    def stack(self) -> np.ndarray:
        """Frames as an array of shape [T, K, I]."""
        return np.stack([frame.values for frame in self.frames])

    def with_frames(self, frames: List[DraiFrame], label: Optional[GestureKind] = None) -> "DRAISequence":
        """New sequence with renumbered frames, keeping the label unless overridden."""
        renumbered = [
            DraiFrame(values=frame.values, frame_index=i, timestamp=frame.timestamp)
            for i, frame in enumerate(frames)
        ]
        return DRAISequence(
            frames=renumbered,
            label=self.label if label is None else label,
            angle_tag=self.angle_tag,
        )

    @classmethod
    def from_array(
        cls,
        array: np.ndarray,
        label: Optional[GestureKind] = None,
        frame_period: float = 0.05,
        angle_tag: float = 0.0,
    ) -> "DRAISequence":
        frames = [
            DraiFrame(values=np.asarray(array[t], dtype=np.float64), frame_index=t, timestamp=t * frame_period)
            for t in range(array.shape[0])
        ]
        return cls(frames=frames, label=label, angle_tag=angle_tag)


@dataclass
class TrajectoryProfile:
    """
    Per-frame hand position of a DRAI sequence.

    Points are (x, y) = (angle coordinate, range coordinate), 1-based pixel
    coordinates as in the trajectory-profile definition.
    """
    points: np.ndarray  # shape [T, 2], float

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class MotionIndicatorTrace:
    """Motion indicator and motion/static decision of the last ``history`` frames."""
    history: Optional[int] = None
    eta: Deque[float] = field(init=False)
    motion: Deque[bool] = field(init=False)

    def __post_init__(self) -> None:
        self.eta = deque(maxlen=self.history)
        self.motion = deque(maxlen=self.history)

    def append(self, eta: float, is_motion: bool) -> None:
        self.eta.append(eta)
        self.motion.append(is_motion)


@dataclass
class SegmentWindow:
    """Detected gesture boundaries (inclusive) and the frames in between."""
    start_frame: int
    end_frame: int
    frames: DRAISequence

    def __len__(self) -> int:
        return self.end_frame - self.start_frame + 1

    @property
    def midpoint(self) -> float:
        return (self.start_frame + self.end_frame) / 2


@dataclass(frozen=True)
class TargetDetection:
    """Static target found on the static range-angle image."""
    range_bin: int
    angle_bin: int
    power: float


@dataclass(frozen=True)
class RegionOfInterest:
    """Inclusive range and angle gates, 0-based bin indices."""
    range_gate: Tuple[int, int]
    angle_gate: Tuple[int, int]

    @classmethod
    def full(cls, shape: Sequence[int]) -> "RegionOfInterest":
        return cls(range_gate=(0, shape[0] - 1), angle_gate=(0, shape[1] - 1))

    def contains(self, range_bin: int, angle_bin: int) -> bool:
        return (
            self.range_gate[0] <= range_bin <= self.range_gate[1]
            and self.angle_gate[0] <= angle_bin <= self.angle_gate[1]
        )


@dataclass(frozen=True)
class Prediction:
    """Classifier output for one segment."""
    label: GestureKind
    confidence: float
    probabilities: Tuple[float, ...] = ()
