"""
Terminal charts of the motion indicator.
"""

import math
from typing import Sequence

import plotext as plt

# Infinite indicator values are drawn at this height.
ETA_CEILING = 10.0


def render_motion_trace(
    eta: Sequence[float],
    threshold: float,
    title: str = "Motion indicator",
    width: int = 70,
    height: int = 20,
) -> str:
    """
    Render the motion indicator and its threshold as a text chart.

    Args:
        eta: Indicator value per frame
        threshold: Motion threshold drawn as a flat line
        title: Chart title
        width: Chart width in characters
        height: Chart height in lines

    Returns:
        Chart text ready for a Static widget or stdout
    """
    plt.clear_figure()
    plt.clear_data()
    plt.clear_color()
    frames = list(range(len(eta)))
    if frames:
        values = [ETA_CEILING if math.isinf(v) else min(v, ETA_CEILING) for v in eta]
        plt.plot(frames, values, marker="braille", label="eta")
        plt.plot(frames, [threshold] * len(frames), marker="braille", label="threshold")
    plt.title(title)
    plt.xlabel("Frame")
    plt.ylabel("eta")
    plt.plot_size(width=width, height=height)
    return plt.build()
