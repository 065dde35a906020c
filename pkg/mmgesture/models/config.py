"""
Configuration models for the radar, the DSP chain, segmentation, the
classifier, training and augmentation.

Every section rejects unknown keys so that a typo in ``config.yaml`` is an
error instead of a silently ignored setting.
"""

import math
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


SPEED_OF_LIGHT = 3.0e8
DEFAULT_WAVELENGTH = 3.9e-3  # 77 GHz class
DEFAULT_SAMPLE_RATE = 4.0e6
DEFAULT_SAMPLES = 128
DEFAULT_CHIRPS = 128
DEFAULT_RANGE_RESOLUTION = 0.047
DEFAULT_VELOCITY_RESOLUTION = 0.039


class _Section(BaseModel):
    """Base for all configuration sections."""

    model_config = ConfigDict(extra="forbid", frozen=True)


class RadarConfig(_Section):
    """Waveform and array constants of the FMCW front end."""

    carrier_wavelength: float = Field(DEFAULT_WAVELENGTH, gt=0)
    # Back-solved from the 0.047 m range resolution; the sensor profile never states it.
    chirp_slope: float = Field(
        SPEED_OF_LIGHT * DEFAULT_SAMPLE_RATE / (2 * DEFAULT_RANGE_RESOLUTION * DEFAULT_SAMPLES),
        gt=0,
    )
    chirp_interval: float = Field(
        DEFAULT_WAVELENGTH / (2 * DEFAULT_CHIRPS * DEFAULT_VELOCITY_RESOLUTION), gt=0
    )
    chirps_per_frame: int = Field(DEFAULT_CHIRPS, ge=2)
    samples_per_chirp: int = Field(DEFAULT_SAMPLES, ge=2)
    sample_rate: float = Field(DEFAULT_SAMPLE_RATE, gt=0)
    rx_channels: int = Field(8, ge=1)
    element_spacing: float = Field(DEFAULT_WAVELENGTH / 2, gt=0)
    frame_period: float = Field(0.05, gt=0)
    kept_range_bins: int = Field(32, ge=1)
    angle_fft_size: int = Field(32, ge=1)
    signal_speed: float = Field(SPEED_OF_LIGHT, gt=0)

    @model_validator(mode="after")
    def _check_geometry(self) -> "RadarConfig":
        if self.element_spacing > self.carrier_wavelength / 2 * (1 + 1e-9):
            raise ValueError("element_spacing must not exceed half a wavelength")
        if self.kept_range_bins > self.samples_per_chirp:
            raise ValueError("kept_range_bins cannot exceed samples_per_chirp")
        if self.angle_fft_size < self.rx_channels:
            raise ValueError("angle_fft_size must be at least rx_channels")
        if self.chirps_per_frame % 2:
            raise ValueError("chirps_per_frame must be even so zero Doppler sits at L/2")
        return self

    def range_resolution(self) -> float:
        """Range bin width in meters."""
        bandwidth = self.chirp_slope * self.samples_per_chirp / self.sample_rate
        return self.signal_speed / (2 * bandwidth)

    def velocity_resolution(self) -> float:
        """Doppler bin width in m/s."""
        return self.carrier_wavelength / (2 * self.chirps_per_frame * self.chirp_interval)

    def max_unambiguous_velocity(self) -> float:
        return self.carrier_wavelength / (4 * self.chirp_interval)

    def max_range(self) -> float:
        """Far edge of the kept range bins."""
        return self.kept_range_bins * self.range_resolution()

    def frame_rate(self) -> float:
        return 1.0 / self.frame_period

    def angular_resolution(self, theta: float = 0.0, channels: Optional[int] = None) -> float:
        """
        Angular resolution in radians at angle of arrival ``theta``.

        Args:
            theta: Angle of arrival in radians
            channels: Number of receive channels, defaults to ``rx_channels``

        Returns:
            lambda / (N * l * cos(theta))
        """
        n = channels or self.rx_channels
        return self.carrier_wavelength / (n * self.element_spacing * math.cos(theta))

    def with_channels(self, channels: int) -> "RadarConfig":
        """Copy of this configuration using only the first ``channels`` receivers."""
        return RadarConfig.model_validate({**self.model_dump(), "rx_channels": channels})


class PipelineParams(_Section):
    """Noise elimination constants."""

    doppler_bin_threshold: int = Field(2, ge=0)
    power_threshold_factor: float = Field(0.25, gt=0, lt=1)
    window_function: Literal["rectangular", "hann"] = "rectangular"


class SegmenterParams(_Section):
    """Dynamic window constants."""

    motion_threshold: float = 1.8
    detection_window: int = Field(3, ge=2)
    min_segment: int = Field(6, ge=1)
    max_segment: int = Field(50, ge=2)
    log_base: Literal["natural", "base10"] = "natural"
    range_guard: int = Field(2, ge=0)
    angle_guard: int = Field(4, ge=0)
    trace_history: int = Field(2000, ge=1)

    @model_validator(mode="after")
    def _check_lengths(self) -> "SegmenterParams":
        if self.min_segment >= self.max_segment:
            raise ValueError("min_segment must be smaller than max_segment")
        return self


class CleanParams(_Section):
    """Iterative detect-and-cancel constants for static target detection."""

    max_targets: int = Field(5, ge=1)
    stop_fraction: float = Field(0.1, ge=0, lt=1)
    noise_floor: float = Field(0.0, ge=0)
    range_guard: int = Field(2, ge=0)
    angle_guard: int = Field(4, ge=0)


class RoiParams(_Section):
    """Region of interest extents around the detected user, in bins."""

    range_half_width: int = Field(8, ge=0)
    angle_half_width: int = Field(10, ge=0)


class ModelConfig(_Section):
    """Architecture of the frame CNN + sequence LSTM classifier."""

    conv_filters: List[int] = Field(default_factory=lambda: [8, 16, 32])
    kernel_size: int = Field(3, ge=1)
    embedding_size: int = Field(128, ge=1)
    recurrent_hidden: int = Field(128, ge=1)
    classes: int = Field(7, ge=2)
    dropout: float = Field(0.5, ge=0, lt=1)
    frame_shape: Tuple[int, int] = (32, 32)
    normalization: Literal["dataset", "sequence"] = "dataset"
    input_scale: float = Field(1.0, gt=0)

    @field_validator("conv_filters")
    @classmethod
    def _positive_filters(cls, value: List[int]) -> List[int]:
        if not value or any(f < 1 for f in value):
            raise ValueError("conv_filters must be a non-empty list of positive counts")
        return value

    @model_validator(mode="after")
    def _check_pooling(self) -> "ModelConfig":
        factor = 2 ** len(self.conv_filters)
        if any(dim % factor for dim in self.frame_shape):
            raise ValueError(f"frame_shape must be divisible by {factor}")
        return self

    @classmethod
    def full(cls, **overrides) -> "ModelConfig":
        return cls(**{"embedding_size": 128, "recurrent_hidden": 128, **overrides})

    @classmethod
    def lite(cls, **overrides) -> "ModelConfig":
        return cls(**{"embedding_size": 32, "recurrent_hidden": 64, **overrides})


class TrainConfig(_Section):
    """Optimizer and schedule."""

    optimizer: Literal["adam"] = "adam"
    learning_rate: float = Field(1e-4, gt=0)
    batch_size: int = Field(128, ge=1)
    epochs: Optional[int] = Field(None, ge=1)
    augmented: bool = False
    steps: Optional[int] = Field(None, ge=1)
    seed: int = 0

    def resolved_epochs(self) -> int:
        """Explicit epochs, else 100 for plain data and 200 with augmentation."""
        if self.epochs is not None:
            return self.epochs
        return 200 if self.augmented else 100


class AugmentPolicy(_Section):
    """Sampling distributions of the augmentation framework."""

    delta_x: Tuple[float, float] = (-6.0, 6.0)
    delta_y: Tuple[float, float] = (-20.0, 20.0)
    delta_k: Tuple[int, int] = (3, 5)
    beta: Tuple[float, float] = (-math.pi / 12, math.pi / 12)
    gamma: Tuple[float, float] = (0.8, 1.2)
    # Keys are target angles in degrees.
    alpha_by_angle: Dict[float, Tuple[float, float]] = Field(
        default_factory=lambda: {45.0: (0.4, 1.0), 60.0: (0.2, 0.8)}
    )
    translation_axes: Literal["range_angle", "angle_range"] = "range_angle"
    variants_per_input: int = Field(4, ge=1)
    method_probability: float = Field(0.5, ge=0, le=1)
    random_placement: bool = False

    @field_validator("delta_x", "delta_y", "delta_k", "beta", "gamma")
    @classmethod
    def _ordered(cls, value: tuple) -> tuple:
        if value[0] > value[1]:
            raise ValueError("range bounds must be ordered (low, high)")
        return value

    @field_validator("delta_k")
    @classmethod
    def _interval_floor(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if value[0] < 2:
            raise ValueError("delta_k must be at least 2")
        return value

    @field_validator("alpha_by_angle")
    @classmethod
    def _positive_alpha(cls, value: Dict[float, Tuple[float, float]]) -> Dict[float, Tuple[float, float]]:
        for lo, hi in value.values():
            if lo <= 0 or lo > hi:
                raise ValueError("alpha ranges must be positive and ordered")
        return value


class StreamParams(_Section):
    """Streaming runner behaviour."""

    pace: bool = True
    roi_refresh_frames: int = Field(20, ge=1)
    snr_db: float = 20.0
    latency_history: int = Field(10000, ge=100)


class StorageParams(_Section):
    """Default locations on disk."""

    manifest: str = "./data/manifest.json"
    output_dir: str = "./out"


class Settings(_Section):
    """All configuration sections of one run."""

    radar: RadarConfig = Field(default_factory=RadarConfig)
    pipeline: PipelineParams = Field(default_factory=PipelineParams)
    segmenter: SegmenterParams = Field(default_factory=SegmenterParams)
    clean: CleanParams = Field(default_factory=CleanParams)
    roi: RoiParams = Field(default_factory=RoiParams)
    model: ModelConfig = Field(default_factory=ModelConfig.lite)
    train: TrainConfig = Field(default_factory=TrainConfig)
    augment: AugmentPolicy = Field(default_factory=AugmentPolicy)
    stream: StreamParams = Field(default_factory=StreamParams)
    storage: StorageParams = Field(default_factory=StorageParams)
