"""
Temporal and spatial segmentation.

Temporal: a motion indicator per DRAI frame feeds a dynamic window that
opens after a run of motion frames and closes after a run of static ones.
Spatial: static targets are found on the SRAI by iterative detection and
cancellation, the nearest one is taken as the user, and DRAI frames are
masked to a region of interest around them.
"""

import logging
import math
from collections import deque
from typing import Deque, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import EmptyInputError
from ..models.config import CleanParams, RoiParams, SegmenterParams
from ..models.gesture import (
    DRAISequence, DraiFrame, MotionIndicatorTrace, RegionOfInterest, SegmentWindow, TargetDetection
)

logger = logging.getLogger(__name__)


def background_mask(shape: Tuple[int, int], peak: Tuple[int, int], range_guard: int, angle_guard: int) -> np.ndarray:
    """Cells outside the guard band in range AND outside it in angle."""
    rows = np.abs(np.arange(shape[0]) - peak[0]) > range_guard
    cols = np.abs(np.arange(shape[1]) - peak[1]) > angle_guard
    return rows[:, None] & cols[None, :]


def motion_indicator(frame: Union[DraiFrame, np.ndarray], params: SegmenterParams) -> float:
    """
    Peak-to-background contrast of one frame.

    Returns:
        log((E_peak + E_noise) / E_noise); 0.0 for an all-zero frame and
        math.inf when the background is empty or silent
    """
    energy = frame.values if isinstance(frame, DraiFrame) else np.asarray(frame)
    peak_energy = float(energy.max())
    if peak_energy <= 0:
        return 0.0
    peak = np.unravel_index(np.argmax(energy), energy.shape)
    background = energy[background_mask(energy.shape, peak, params.range_guard, params.angle_guard)]
    noise_energy = float(background.mean()) if background.size else 0.0
    if noise_energy <= 0:
        return math.inf
    ratio = (peak_energy + noise_energy) / noise_energy
    return math.log10(ratio) if params.log_base == "base10" else math.log(ratio)


class DynamicWindowSegmenter:
    """
    Stateful gesture boundary detector for one stream.

    Feed frames in order with ``push``; a SegmentWindow is returned when a
    window closes. Positions are counted from the first pushed frame.
    """

    def __init__(self, params: Optional[SegmenterParams] = None):
        self.params = params or SegmenterParams()
        self.trace = MotionIndicatorTrace(self.params.trace_history)
        self._recent: Deque[bool] = deque(maxlen=self.params.detection_window)
        self._pending: Deque[DraiFrame] = deque(maxlen=self.params.detection_window)
        self._frames: List[DraiFrame] = []
        self._position = -1
        self._start: Optional[int] = None
        self._last_motion = -1

    @property
    def is_open(self) -> bool:
        return self._start is not None

    def push(self, frame: DraiFrame) -> Optional[SegmentWindow]:
        self._position += 1
        eta = motion_indicator(frame, self.params)
        moving = eta > self.params.motion_threshold
        self.trace.append(eta, moving)
        self._recent.append(moving)
        window = self.params.detection_window
        full = len(self._recent) == window

        if self._start is None:
            self._pending.append(frame)
            if full and all(self._recent):
                self._start = self._position - window + 1
                self._frames = list(self._pending)
                self._last_motion = self._position
                logger.debug("Window opened at frame %d", self._start)
            return None

        self._frames.append(frame)
        if moving:
            self._last_motion = self._position
        if full and not any(self._recent):
            return self._close(self._last_motion)
        if self._position - self._start + 1 >= self.params.max_segment:
            segment = self._close(self._position)
            self._recent.clear()
            return segment
        return None

    def flush(self) -> Optional[SegmentWindow]:
        """Close an open window at stream end."""
        if self._start is None:
            return None
        return self._close(self._last_motion)

    def _close(self, end: int) -> Optional[SegmentWindow]:
        start = self._start
        frames = self._frames[: end - start + 1]
        self._start = None
        self._frames = []
        self._pending.clear()
        if end - start + 1 < self.params.min_segment:
            logger.debug("Dropped short window [%d, %d]", start, end)
            return None
        return SegmentWindow(start_frame=start, end_frame=end, frames=DRAISequence(frames=frames))


def segment_stream(stream: Iterable[DraiFrame], params: Optional[SegmenterParams] = None) -> Iterator[SegmentWindow]:
    """Yield gesture windows from an ordered frame stream."""
    segmenter = DynamicWindowSegmenter(params)
    for frame in stream:
        segment = segmenter.push(frame)
        if segment is not None:
            yield segment
    tail = segmenter.flush()
    if tail is not None:
        yield tail


def detect_static_targets(
    srai: Union[DraiFrame, np.ndarray], params: Optional[CleanParams] = None
) -> List[TargetDetection]:
    """Repeatedly take the strongest cell and cancel its neighbourhood."""
    params = params or CleanParams()
    image = np.array(srai.values if isinstance(srai, DraiFrame) else srai, dtype=np.float64)
    targets: List[TargetDetection] = []
    first_power = None
    while len(targets) < params.max_targets:
        power = float(image.max())
        if power <= 0 or power < params.noise_floor:
            break
        if first_power is None:
            first_power = power
        elif power < params.stop_fraction * first_power:
            break
        range_bin, angle_bin = np.unravel_index(np.argmax(image), image.shape)
        targets.append(TargetDetection(int(range_bin), int(angle_bin), power))
        image[
            max(0, range_bin - params.range_guard): range_bin + params.range_guard + 1,
            max(0, angle_bin - params.angle_guard): angle_bin + params.angle_guard + 1,
        ] = 0
    return targets


def select_user_roi(
    targets: Sequence[TargetDetection], params: Optional[RoiParams] = None, shape: Tuple[int, int] = (32, 32)
) -> RegionOfInterest:
    """Region of interest centered on the closest target, clipped to the image."""
    if not targets:
        raise EmptyInputError("no static targets to choose the user from")
    params = params or RoiParams()
    user = min(targets, key=lambda target: (target.range_bin, -target.power))
    return RegionOfInterest(
        range_gate=(
            max(0, user.range_bin - params.range_half_width),
            min(shape[0] - 1, user.range_bin + params.range_half_width),
        ),
        angle_gate=(
            max(0, user.angle_bin - params.angle_half_width),
            min(shape[1] - 1, user.angle_bin + params.angle_half_width),
        ),
    )


def mask_to_roi(frame: DraiFrame, roi: RegionOfInterest) -> DraiFrame:
    """Zero every pixel outside the region of interest."""
    masked = np.zeros_like(frame.values)
    r0, r1 = roi.range_gate
    a0, a1 = roi.angle_gate
    masked[r0: r1 + 1, a0: a1 + 1] = frame.values[r0: r1 + 1, a0: a1 + 1]
    return frame.with_values(masked)


def locate_user(
    srai: Union[DraiFrame, np.ndarray],
    clean: Optional[CleanParams] = None,
    roi: Optional[RoiParams] = None,
) -> Optional[RegionOfInterest]:
    """ROI of the nearest static target, or None when the SRAI shows nobody."""
    image = srai.values if isinstance(srai, DraiFrame) else np.asarray(srai)
    targets = detect_static_targets(image, clean)
    if not targets:
        return None
    return select_user_roi(targets, roi, image.shape)
