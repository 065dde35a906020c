import numpy as np
import pytest

from mmgesture.models.config import PipelineParams, RadarConfig, SegmenterParams, Settings
from mmgesture.models.gesture import DRAISequence, DraiFrame, GestureKind


@pytest.fixture
def radar():
    return RadarConfig()


@pytest.fixture
def small_radar():
    """Reduced cube dimensions for loop-based reference checks."""
    return RadarConfig(
        chirps_per_frame=16, samples_per_chirp=16, kept_range_bins=8, rx_channels=4, angle_fft_size=8
    )


@pytest.fixture
def params():
    return PipelineParams()


@pytest.fixture
def seg_params():
    return SegmenterParams()


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def peak_frame():
    """Factory: a 32x32 frame of ones with one cell raised."""

    def make(peak=None, value=100.0, background=1.0, shape=(32, 32), index=0):
        values = np.full(shape, background, dtype=np.float64)
        if peak is not None:
            values[peak] = value
        return DraiFrame(values=values, frame_index=index, timestamp=index * 0.05)

    return make


@pytest.fixture
def track_sequence():
    """Factory: sequence whose frame t holds a single peak at positions[t]."""

    def make(positions, label=GestureKind.PH, shape=(32, 32), floor=0.0):
        array = np.full((len(positions), *shape), floor, dtype=np.float64)
        for t, (r, a) in enumerate(positions):
            array[t, r, a] = 10.0
        return DRAISequence.from_array(array, label=label)

    return make
