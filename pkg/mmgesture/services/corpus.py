"""
Synthetic labeled corpora: gesture scripts with randomized anchors and
speeds, rendered and processed into DRAI sequences.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..models.config import Settings
from ..models.gesture import DRAISequence, GestureKind, GestureScript, NegativeMotion
from .drai_pipeline import process_sequence
from .radar_front import synthesize_script

logger = logging.getLogger(__name__)

Bounds = Tuple[float, float]


def random_script(
    kind: GestureKind,
    rng: np.random.Generator,
    distance: Bounds = (0.6, 1.0),
    angle_deg: Bounds = (-30.0, 30.0),
    speed: Bounds = (0.8, 1.25),
    snr_db: Optional[float] = 20.0,
    duration: float = 1.0,
) -> GestureScript:
    """One gesture script with anchor and speed drawn uniformly from the bounds."""
    negative = list(NegativeMotion)[int(rng.integers(len(NegativeMotion)))] if kind is GestureKind.NG else None
    return GestureScript(
        kind=kind,
        anchor_distance=float(rng.uniform(*distance)),
        anchor_angle=math.radians(float(rng.uniform(*angle_deg))),
        speed_scale=float(rng.uniform(*speed)),
        duration=duration,
        noise_snr=snr_db,
        negative_motion=negative,
        seed=int(rng.integers(2 ** 31)),
    )


def build_synthetic_dataset(
    kinds: Sequence[GestureKind],
    per_class: int,
    settings: Settings,
    seed: int = 0,
    distance: Bounds = (0.6, 1.0),
    angle_deg: Bounds = (-30.0, 30.0),
    speed: Bounds = (0.8, 1.25),
    snr_db: Optional[float] = 20.0,
) -> Tuple[List[DRAISequence], List[np.ndarray]]:
    """
    Render ``per_class`` sequences of every kind.

    Returns:
        (sequences, archives) with the per-channel archive of every sequence
    """
    sequences: List[DRAISequence] = []
    archives: List[np.ndarray] = []
    for kind in kinds:
        for i in range(per_class):
            rng = np.random.default_rng([seed, kind.value, i])
            script = random_script(kind, rng, distance, angle_deg, speed, snr_db)
            cubes = synthesize_script(script, settings.radar)
            seq, archive = process_sequence(cubes, settings.radar, settings.pipeline, kind, script.anchor_angle)
            sequences.append(seq)
            archives.append(archive)
    logger.info("Rendered %d synthetic sequences", len(sequences))
    return sequences, archives
