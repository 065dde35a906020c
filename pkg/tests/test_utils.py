import math

import pytest

from mmgesture.exceptions import EmptyInputError, LabelError
from mmgesture.models.evaluation import EvalCounters
from mmgesture.models.gesture import GestureKind, NegativeMotion
from mmgesture.themes import DEFAULT_THEME, THEMES
from mmgesture.utils.calculations import (
    compute_cra_mpr, format_ms, format_percentage, get_color_for_confidence, stage_stats,
)
from mmgesture.utils.labels import label_parser
from mmgesture.utils.plotting import render_motion_trace


@pytest.mark.parametrize(
    "text,kind",
    [
        ("PH", GestureKind.PH),
        ("push", GestureKind.PH),
        ("Pull", GestureKind.PL),
        ("left swipe", GestureKind.LS),
        ("swipe-right", GestureKind.RS),
        ("clockwise", GestureKind.CT),
        ("counter clockwise turning", GestureKind.AT),
        ("ccw", GestureKind.AT),
        ("negative", GestureKind.NG),
        ("wave", GestureKind.NG),
        ("3", GestureKind.RS),
    ],
)
def test_label_names(text, kind):
    assert label_parser.parse(text) is kind


def test_unknown_labels():
    with pytest.raises(LabelError):
        label_parser.parse("jump")
    with pytest.raises(LabelError):
        label_parser.parse("7")


def test_negative_motions_and_lists():
    assert label_parser.parse_negative("sit-stand") is NegativeMotion.SIT_STAND
    assert label_parser.parse_negative("push") is None
    assert label_parser.parse_list("PH, ls,,AT") == [GestureKind.PH, GestureKind.LS, GestureKind.AT]


def test_cra_and_mpr():
    cra, mpr = compute_cra_mpr(EvalCounters(performed=10, misclassified=1, missed=1, predictions=12))
    assert cra == pytest.approx(0.8)
    assert mpr == pytest.approx(1 / 6)
    cra, mpr = compute_cra_mpr(EvalCounters(performed=5, predictions=5))
    assert (cra, mpr) == (1.0, 0.0)


def test_cra_needs_counts():
    with pytest.raises(EmptyInputError):
        compute_cra_mpr(EvalCounters(performed=0, predictions=3))
    with pytest.raises(EmptyInputError):
        compute_cra_mpr(EvalCounters(performed=3, predictions=0))


def test_stage_stats():
    stats = stage_stats([float(v) for v in range(1, 101)])
    assert stats.count == 100
    assert stats.mean_ms == pytest.approx(50.5)
    assert stats.p50_ms == pytest.approx(50.5)
    assert stats.p99_ms == pytest.approx(99.01)
    assert stage_stats([]).count == 0


def test_formatting():
    assert format_ms(1.234) == "1.23 ms"
    assert format_ms(None) == "N/A"
    assert format_percentage(0.9708) == "97.08%"
    assert format_percentage(None) == "N/A"
    assert [get_color_for_confidence(c) for c in (None, 0.95, 0.7, 0.2)] == ["white", "green", "yellow", "red"]


def test_motion_trace_chart():
    chart = render_motion_trace([0.5, 0.7, math.inf, 4.0, 0.6], 1.8, width=60, height=15)
    assert "Motion indicator" in chart
    assert len(chart.splitlines()) >= 10
    assert render_motion_trace([], 1.8)


def test_theme_status_colors():
    theme = THEMES[DEFAULT_THEME]
    assert theme.status_markup(True) == f"[{theme.motion}]motion[/]"
    assert theme.status_markup(False) == f"[{theme.static}]static[/]"
    for theme in THEMES.values():
        assert theme.motion != theme.static
        assert "primary" in theme.to_color_system().generate()
