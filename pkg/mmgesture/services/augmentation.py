"""
Augmentation of DRAI sequences.

Seven methods produce synthetic training variants: whole-sequence translation
in range and angle, speed resampling, reversal into the paired gesture,
antenna reduction, power scaling for extreme angles, and per-frame shifts
driven by a rotated and scaled trajectory profile.
"""

import logging
import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError
from scipy import ndimage
from scipy.signal import find_peaks

from ..exceptions import (
    ChannelsUnavailableError, ConfigError, EmptyInputError, LabelError, SequenceTooShortError,
    ShapeMismatchError,
)
from ..models.config import AugmentPolicy, PipelineParams, RadarConfig
from ..models.gesture import GESTURE_PAIRS, DRAISequence, DraiFrame, TrajectoryProfile
from .drai_pipeline import archive_to_rdis, noise_eliminate

logger = logging.getLogger(__name__)

# Below this |angle_tag| a sample counts as collected at boresight.
BORESIGHT_TOLERANCE = math.radians(1.0)


def _shift_frame(values: np.ndarray, delta_range: int, delta_angle: int) -> np.ndarray:
    if delta_range == 0 and delta_angle == 0:
        return values.copy()
    return ndimage.shift(values, (delta_range, delta_angle), order=0, mode="grid-constant", cval=0.0)


def translate(seq: DRAISequence, delta_range: int, delta_angle: int) -> DRAISequence:
    """
    Shift every frame by the same number of range and angle bins.

    Vacated pixels are zero and pixels pushed past the edge are dropped.
    """
    dr, da = int(round(delta_range)), int(round(delta_angle))
    frames = [frame.with_values(_shift_frame(frame.values, dr, da)) for frame in seq.frames]
    return DRAISequence(frames=frames, label=seq.label, angle_tag=seq.angle_tag)


def _mean_frame(first: DraiFrame, second: DraiFrame) -> DraiFrame:
    return DraiFrame(
        values=(first.values + second.values) / 2,
        frame_index=first.frame_index,
        timestamp=(first.timestamp + second.timestamp) / 2,
    )


def resample_speed(
    seq: DRAISequence,
    delta_k: int,
    mode: str,
    rng: Optional[np.random.Generator] = None,
) -> DRAISequence:
    """
    Simulate a slower or faster gesture.

    Args:
        seq: Input sequence of T frames
        delta_k: Frame interval, at least 2 and smaller than T
        mode: "insert" puts the mean of frames k and k+1 after every
            delta_k-th frame k; "remove" deletes every delta_k-th frame
        rng: When given, the same number of positions is drawn at random

    Returns:
        Sequence of T + floor((T-1)/delta_k) frames for insert,
        T - floor(T/delta_k) for remove
    """
    if delta_k < 2:
        raise ValueError("delta_k must be at least 2")
    length = len(seq)
    if length <= delta_k:
        raise SequenceTooShortError(f"sequence of {length} frames is too short for delta_k={delta_k}")
    if mode not in ("insert", "remove"):
        raise ValueError(f"unknown resampling mode: {mode}")

    frames = seq.frames
    if mode == "insert":
        # 1-based frame numbers k after which a frame is inserted, k <= T-1
        positions = np.arange(delta_k, length, delta_k)
        if rng is not None:
            positions = np.sort(rng.choice(np.arange(1, length), size=positions.size, replace=False))
        after = set(int(k) for k in positions)
        out: List[DraiFrame] = []
        for k, frame in enumerate(frames, start=1):
            out.append(frame)
            if k in after:
                out.append(_mean_frame(frame, frames[k]))
    else:
        positions = np.arange(delta_k, length + 1, delta_k)
        if rng is not None:
            positions = rng.choice(np.arange(1, length + 1), size=positions.size, replace=False)
        dropped = set(int(k) for k in positions)
        out = [frame for k, frame in enumerate(frames, start=1) if k not in dropped]
    return seq.with_frames(out)


def reverse_sequence(seq: DRAISequence) -> DRAISequence:
    """Play a gesture backwards and relabel it as its pair (PH/PL, LS/RS, CT/AT)."""
    if seq.label not in GESTURE_PAIRS:
        raise LabelError(f"only paired gestures can be reversed, got {seq.label}")
    return seq.with_frames(list(reversed(seq.frames)), label=GESTURE_PAIRS[seq.label])


def reduce_antennas(
    archive: Optional[np.ndarray],
    channels: int,
    config: RadarConfig,
    params: PipelineParams,
    label=None,
    angle_tag: float = 0.0,
) -> DRAISequence:
    """
    Rebuild the DRAI sequence from the first ``channels`` receivers only.

    Args:
        archive: Retained channel images [T, N, K, L], or None when the
            sequence was ingested without them
        channels: Receivers to keep, 2 <= channels <= N
        config: Configuration the archive was produced with
        params: Noise elimination constants

    Returns:
        DRAI sequence with the coarser angular resolution of a smaller array
    """
    if archive is None:
        raise ChannelsUnavailableError("no per-channel range-Doppler archive for this sequence")
    if archive.ndim != 4 or archive.shape[1] != config.rx_channels:
        raise ShapeMismatchError(f"archive shape {archive.shape} does not match {config.rx_channels} channels")
    if not 2 <= channels <= config.rx_channels:
        raise ValueError(f"channels must lie in [2, {config.rx_channels}]")

    reduced = config.with_channels(channels)
    frames = [
        noise_eliminate(archive_to_rdis(archive[t, :channels]), params, reduced, t, t * config.frame_period)
        for t in range(archive.shape[0])
    ]
    return DRAISequence(frames=frames, label=label, angle_tag=angle_tag)


def scale_power(seq: DRAISequence, alpha: float) -> DRAISequence:
    """Multiply every pixel by ``alpha`` to mimic the weaker response at large angles."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    frames = [frame.with_values(frame.values * alpha) for frame in seq.frames]
    return DRAISequence(frames=frames, label=seq.label, angle_tag=seq.angle_tag)


def extract_trajectory_profile(seq: DRAISequence) -> TrajectoryProfile:
    """
    Hand position of every frame as its strongest pixel.

    Returns:
        Profile with 1-based (angle, range) coordinates; ties go to the
        smallest range bin, then the smallest angle bin
    """
    if len(seq) == 0:
        raise EmptyInputError("cannot extract a profile from an empty sequence")
    points = np.empty((len(seq), 2))
    for t, frame in enumerate(seq.frames):
        magnitude = np.abs(frame.values)
        if not magnitude.any():
            raise EmptyInputError(f"frame {t} has no nonzero pixel")
        range_bin, angle_bin = np.unravel_index(np.argmax(magnitude), magnitude.shape)
        points[t] = (angle_bin + 1, range_bin + 1)
    return TrajectoryProfile(points=points)


def rotation_matrix(beta: float, center: Tuple[float, float]) -> np.ndarray:
    """Homogeneous rotation by ``beta`` radians about ``center``."""
    cx, cy = center
    cos_b, sin_b = math.cos(beta), math.sin(beta)
    return np.array([
        [cos_b, -sin_b, cx - cx * cos_b + cy * sin_b],
        [sin_b, cos_b, cy - cx * sin_b - cy * cos_b],
        [0.0, 0.0, 1.0],
    ])


def scaling_matrix(gamma_x: float, gamma_y: float, center: Tuple[float, float]) -> np.ndarray:
    """Homogeneous scaling by (gamma_x, gamma_y) about ``center``."""
    cx, cy = center
    return np.array([
        [gamma_x, 0.0, cx * (1 - gamma_x)],
        [0.0, gamma_y, cy * (1 - gamma_y)],
        [0.0, 0.0, 1.0],
    ])


def rotation_center(profile: TrajectoryProfile) -> Tuple[float, float]:
    """Point farthest from the origin; the earliest one wins a tie."""
    index = int(np.argmax((profile.points ** 2).sum(axis=1)))
    return float(profile.points[index, 0]), float(profile.points[index, 1])


def scaling_center(profile: TrajectoryProfile) -> Tuple[float, float]:
    """Centroid of the profile."""
    cx, cy = profile.points.mean(axis=0)
    return float(cx), float(cy)


def transform_profile(profile: TrajectoryProfile, beta: float, gamma_x: float, gamma_y: float) -> TrajectoryProfile:
    """Rotate the profile about its farthest point, then scale it about its centroid."""
    if len(profile) == 0:
        raise EmptyInputError("cannot transform an empty profile")
    matrix = scaling_matrix(gamma_x, gamma_y, scaling_center(profile)) @ rotation_matrix(
        beta, rotation_center(profile)
    )
    homogeneous = np.column_stack([profile.points, np.ones(len(profile))])
    return TrajectoryProfile(points=(homogeneous @ matrix.T)[:, :2])


def apply_profile_offsets(
    seq: DRAISequence, original: TrajectoryProfile, transformed: TrajectoryProfile
) -> DRAISequence:
    """Translate every frame by its own rounded offset between the two profiles."""
    if not len(original) == len(transformed) == len(seq):
        raise ShapeMismatchError(
            f"profile lengths {len(original)} and {len(transformed)} do not match {len(seq)} frames"
        )
    offsets = np.rint(transformed.points - original.points).astype(int)
    frames = [
        frame.with_values(_shift_frame(frame.values, int(dy), int(dx)))
        for frame, (dx, dy) in zip(seq.frames, offsets)
    ]
    return DRAISequence(frames=frames, label=seq.label, angle_tag=seq.angle_tag)


def count_angle_peaks(values: np.ndarray, prominence_fraction: float = 0.25) -> int:
    """
    Number of separated targets along the angle axis of the strongest range row.

    End samples never count as peaks.
    """
    peak = values.max()
    if peak <= 0:
        return 0
    row = np.unravel_index(np.argmax(values), values.shape)[0]
    peaks, _ = find_peaks(values[row], prominence=prominence_fraction * peak)
    return len(peaks)


def load_policy(path: Union[str, Path]) -> AugmentPolicy:
    """Read an augmentation policy from a YAML or JSON file."""
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
        return AugmentPolicy.model_validate(data)
    except (OSError, yaml.YAMLError, ValidationError) as e:
        raise ConfigError(f"Invalid augmentation policy {path}: {e}") from e


def _uniform(rng: np.random.Generator, bounds: Tuple[float, float]) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def _has_empty_frame(seq: DRAISequence) -> bool:
    return any(not np.any(frame.values) for frame in seq.frames)


def _augment_one(
    seq: DRAISequence,
    policy: AugmentPolicy,
    rng: np.random.Generator,
    archive: Optional[np.ndarray],
    config: Optional[RadarConfig],
    params: Optional[PipelineParams],
) -> DRAISequence:
    applied = False

    def chosen() -> bool:
        return rng.random() < policy.method_probability

    out = seq
    if archive is not None and config is not None and config.rx_channels > 2 and chosen():
        channels = int(rng.integers(max(2, config.rx_channels // 2), config.rx_channels))
        out = reduce_antennas(archive, channels, config, params or PipelineParams(), seq.label, seq.angle_tag)
        applied = True

    if abs(out.angle_tag) < BORESIGHT_TOLERANCE and policy.alpha_by_angle and chosen():
        angles = sorted(policy.alpha_by_angle)
        target = angles[int(rng.integers(len(angles)))]
        out = scale_power(out, _uniform(rng, policy.alpha_by_angle[target]))
        applied = True

    if out.label in GESTURE_PAIRS and chosen():
        out = reverse_sequence(out)
        applied = True

    if chosen():
        delta_k = int(rng.integers(policy.delta_k[0], policy.delta_k[1] + 1))
        if len(out) > delta_k:
            mode = "insert" if rng.random() < 0.5 else "remove"
            placement = rng if policy.random_placement else None
            out = resample_speed(out, delta_k, mode, placement)
            applied = True

    if chosen() and not _has_empty_frame(out):
        profile = extract_trajectory_profile(out)
        moved = transform_profile(
            profile, _uniform(rng, policy.beta), _uniform(rng, policy.gamma), _uniform(rng, policy.gamma)
        )
        out = apply_profile_offsets(out, profile, moved)
        applied = True

    if not applied or chosen():
        dx = int(np.rint(_uniform(rng, policy.delta_x)))
        dy = int(np.rint(_uniform(rng, policy.delta_y)))
        if policy.translation_axes == "range_angle":
            out = translate(out, dx, dy)
        else:
            out = translate(out, dy, dx)
    return out


def augment_batch(
    dataset: Sequence[DRAISequence],
    policy: AugmentPolicy,
    seed: int,
    archives: Optional[Sequence[Optional[np.ndarray]]] = None,
    config: Optional[RadarConfig] = None,
    params: Optional[PipelineParams] = None,
) -> List[DRAISequence]:
    """
    Generate ``policy.variants_per_input`` variants of every input sequence.

    Each sample draws from its own generator seeded with (seed, index), so
    the output does not depend on processing order. Antenna reduction is
    only available for samples whose archive is given.
    """
    variants: List[DRAISequence] = []
    for index, seq in enumerate(dataset):
        rng = np.random.default_rng([seed, index])
        archive = archives[index] if archives is not None else None
        for _ in range(policy.variants_per_input):
            variants.append(_augment_one(seq, policy, rng, archive, config, params))
    logger.info("Augmented %d sequences into %d variants", len(dataset), len(variants))
    return variants
