"""
Utility functions for recognition metrics, latency statistics and formatting.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from ..exceptions import EmptyInputError
from ..models.evaluation import EvalCounters, StageStats


def compute_cra_mpr(counters: EvalCounters) -> Tuple[float, float]:
    """
    Continuous recognition accuracy and multiple prediction rate.

    Args:
        counters: N performed, W misclassified, M missed, P predictions

    Returns:
        (CRA, MPR) = (1 - (W + M) / N, 1 - N / P)
    """
    if counters.performed <= 0:
        raise EmptyInputError("CRA needs at least one performed gesture")
    if counters.predictions <= 0:
        raise EmptyInputError("MPR needs at least one prediction")
    cra = 1 - (counters.misclassified + counters.missed) / counters.performed
    mpr = 1 - counters.performed / counters.predictions
    return cra, mpr


def stage_stats(samples_ms: Sequence[float]) -> StageStats:
    """Mean, median and 99th percentile of latency samples in milliseconds."""
    if not samples_ms:
        return StageStats(mean_ms=0.0, p50_ms=0.0, p99_ms=0.0, count=0)
    values = np.asarray(samples_ms, dtype=float)
    return StageStats(
        mean_ms=float(values.mean()),
        p50_ms=float(np.percentile(values, 50)),
        p99_ms=float(np.percentile(values, 99)),
        count=len(values),
    )


def angular_resolution_deg(wavelength: float, channels: int, spacing: float, theta_deg: float = 0.0) -> float:
    """
    Angular resolution of a uniform linear array in degrees.

    Args:
        wavelength: Carrier wavelength
        channels: Number of receive channels
        spacing: Element spacing, same unit as wavelength
        theta_deg: Angle of arrival

    Returns:
        lambda / (N * l * cos(theta)) converted to degrees
    """
    return math.degrees(wavelength / (channels * spacing * math.cos(math.radians(theta_deg))))


def format_ms(value: Optional[float], decimals: int = 2) -> str:
    if value is None:
        return "N/A"
    return f"{value:.{decimals}f} ms"


def format_percentage(value: Optional[float], decimals: int = 2) -> str:
    """
    Format a fraction as a percentage.

    Args:
        value: Fraction, 0.9708 renders as 97.08%
        decimals: Number of decimal places
    """
    if value is None:
        return "N/A"
    return f"{value * 100:.{decimals}f}%"


def get_color_for_confidence(confidence: Optional[float]) -> str:
    """Color name for Textual styling of a prediction confidence."""
    if confidence is None:
        return "white"
    elif confidence >= 0.9:
        return "green"
    elif confidence >= 0.6:
        return "yellow"
    else:
        return "red"
