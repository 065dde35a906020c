"""
DRAI pipeline: range and Doppler transforms, angle transform, noise
elimination and the static range-angle image.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sp_fft
from scipy.signal import windows

from ..exceptions import ShapeMismatchError
from ..models.config import PipelineParams, RadarConfig
from ..models.gesture import (
    AdcCube, DRAISequence, DraiFrame, GestureKind, RangeDopplerAngleTensor, RangeDopplerImage
)

logger = logging.getLogger(__name__)


@dataclass
class FrameProducts:
    """Everything the pipeline derives from one cube."""
    drai: DraiFrame
    srai: DraiFrame
    rdi_stack: np.ndarray  # [N, K, L] complex, before static removal


def _window(length: int, kind: str) -> np.ndarray:
    if kind == "hann":
        return windows.hann(length, sym=False)
    return np.ones(length)


def _stack(rdis: Sequence[RangeDopplerImage], config: RadarConfig) -> np.ndarray:
    """Channel images as one array [N, K, L], ordered by channel index."""
    if len(rdis) != config.rx_channels:
        raise ShapeMismatchError(f"expected {config.rx_channels} channel images, got {len(rdis)}")
    ordered = sorted(rdis, key=lambda rdi: rdi.channel_index)
    return np.stack([rdi.values for rdi in ordered])


def _unstack(stack: np.ndarray) -> List[RangeDopplerImage]:
    return [RangeDopplerImage(values=stack[n], channel_index=n) for n in range(stack.shape[0])]


def range_doppler_stack(samples: np.ndarray, config: RadarConfig, window: str = "rectangular") -> np.ndarray:
    """
    Range and Doppler transforms of a raw cube.

    Args:
        samples: Complex array [L, samples_per_chirp, N]
        config: Radar configuration
        window: "rectangular" or "hann", applied on fast and slow time

    Returns:
        Complex array [N, K, L] with zero Doppler at index L/2
    """
    expected = (config.chirps_per_frame, config.samples_per_chirp, config.rx_channels)
    if samples.shape != expected:
        raise ShapeMismatchError(f"cube shape {samples.shape} does not match configuration {expected}")

    fast = samples * _window(config.samples_per_chirp, window)[None, :, None]
    ranged = sp_fft.fft(fast, axis=1)[:, : config.kept_range_bins, :]
    slow = ranged * _window(config.chirps_per_frame, window)[:, None, None]
    doppler = sp_fft.fftshift(sp_fft.fft(slow, axis=0), axes=0)
    return np.transpose(doppler, (2, 1, 0))


def range_doppler(
    cube: AdcCube, config: RadarConfig, params: Optional[PipelineParams] = None
) -> List[RangeDopplerImage]:
    """Per-channel range-Doppler images of one frame, first K range bins kept."""
    window = params.window_function if params else "rectangular"
    return _unstack(range_doppler_stack(cube.samples, config, window))


def angle_transform(stack: np.ndarray, config: RadarConfig) -> np.ndarray:
    """Zero-padded, centered transform across channels: [N, K, L] -> [K, L, I]."""
    spectrum = sp_fft.fftshift(sp_fft.fft(stack, n=config.angle_fft_size, axis=0), axes=0)
    return np.transpose(spectrum, (1, 2, 0))


def angle_fft(rdis: Sequence[RangeDopplerImage], config: RadarConfig) -> RangeDopplerAngleTensor:
    """
    Range-Doppler-angle matrix from a full channel set.

    Angle index k maps to sin(theta) = (k - I/2) / (I * l / lambda).
    """
    return RangeDopplerAngleTensor(values=angle_transform(_stack(rdis, config), config))


def suppress_static(stack: np.ndarray, tau: int, config: RadarConfig) -> np.ndarray:
    """Copy of the channel images with Doppler bins L/2-tau .. L/2+tau set to zero."""
    half = config.chirps_per_frame // 2
    if not 0 <= tau < half:
        raise ValueError(f"doppler_bin_threshold must lie in [0, {half})")
    cleaned = stack.copy()
    cleaned[:, :, half - tau: half + tau + 1] = 0
    return cleaned


def doppler_power(stack: np.ndarray) -> np.ndarray:
    """Sum over range of the channel-averaged magnitude, one value per Doppler bin."""
    return np.abs(stack).mean(axis=0).sum(axis=0)


def accumulate_drai(stack: np.ndarray, rda: np.ndarray, alpha: float) -> np.ndarray:
    """Sum of |RDA(:, j, :)| over the Doppler bins whose power exceeds alpha * max power."""
    power = doppler_power(stack)
    threshold = alpha * power.max()
    keep = np.flatnonzero(power > threshold)
    if keep.size == 0:
        return np.zeros((rda.shape[0], rda.shape[2]))
    return np.abs(rda[:, keep, :]).sum(axis=1)


def noise_eliminate(
    rdis: Sequence[RangeDopplerImage],
    params: PipelineParams,
    config: RadarConfig,
    frame_index: int = 0,
    timestamp: float = 0.0,
) -> DraiFrame:
    """
    Dynamic range-angle image of one frame.

    Static bins around zero Doppler are removed on every channel, Doppler bins
    whose power does not exceed the threshold are discarded as multipath and
    noise, and the magnitudes of the remaining range-angle slices are summed.
    """
    stack = suppress_static(_stack(rdis, config), params.doppler_bin_threshold, config)
    rda = angle_transform(stack, config)
    values = accumulate_drai(stack, rda, params.power_threshold_factor)
    return DraiFrame(values=values, frame_index=frame_index, timestamp=timestamp)


def static_rai(
    rdis: Sequence[RangeDopplerImage], config: RadarConfig, frame_index: int = 0, timestamp: float = 0.0
) -> DraiFrame:
    """Static range-angle image: angle transform of the zero-Doppler column only."""
    stack = _stack(rdis, config)
    zero_doppler = stack[:, :, config.chirps_per_frame // 2]
    spectrum = sp_fft.fftshift(sp_fft.fft(zero_doppler, n=config.angle_fft_size, axis=0), axes=0)
    return DraiFrame(values=np.abs(spectrum).T, frame_index=frame_index, timestamp=timestamp)


def range_angle_image(rdis: Sequence[RangeDopplerImage], config: RadarConfig) -> np.ndarray:
    """Unfiltered range-angle image: |RDA| summed over every Doppler bin."""
    return np.abs(angle_transform(_stack(rdis, config), config)).sum(axis=1)


def process_cube(cube: AdcCube, config: RadarConfig, params: PipelineParams) -> FrameProducts:
    """DRAI, SRAI and retained channel images of one cube."""
    stack = range_doppler_stack(cube.samples, config, params.window_function)
    rdis = _unstack(stack)
    timestamp = cube.frame_index * config.frame_period
    return FrameProducts(
        drai=noise_eliminate(rdis, params, config, cube.frame_index, timestamp),
        srai=static_rai(rdis, config, cube.frame_index, timestamp),
        rdi_stack=stack,
    )


def process_sequence(
    cubes: Sequence[AdcCube],
    config: RadarConfig,
    params: PipelineParams,
    label: Optional[GestureKind] = None,
    angle_tag: float = 0.0,
) -> Tuple[DRAISequence, np.ndarray]:
    """
    DRAI sequence of a cube list plus the per-channel archive.

    Returns:
        (sequence, archive) where archive has shape [T, N, K, L]
    """
    products = [process_cube(cube, config, params) for cube in cubes]
    sequence = DRAISequence(frames=[p.drai for p in products], label=label, angle_tag=angle_tag)
    archive = np.stack([p.rdi_stack for p in products]) if products else np.zeros((0,))
    logger.debug("Processed %d cubes into a DRAI sequence", len(products))
    return sequence, archive


def archive_to_rdis(archive_frame: np.ndarray) -> List[RangeDopplerImage]:
    """Channel images of one archived frame [N, K, L]."""
    return _unstack(archive_frame)
