from collections import deque
from typing import Deque, Iterator, Optional

from textual import log
from textual.app import ComposeResult
from textual.binding import Binding
from textual.containers import Horizontal, Vertical
from textual.screen import Screen
from textual.timer import Timer
from textual.widgets import DataTable, Footer, Header, Static

from ..models.gesture import AdcCube
from ..services.stream_runner import STAGES, StreamRunner, score_events
from ..themes import DEFAULT_THEME, THEMES
from ..utils.calculations import compute_cra_mpr, format_ms, format_percentage, stage_stats
from ..utils.plotting import render_motion_trace

# Frames of indicator history kept on the chart.
TRACE_WINDOW = 200


class StreamMonitorScreen(Screen):
    BINDINGS = [
        Binding("escape", "app.quit", "Quit"),
        Binding("q", "app.quit", "Quit"),
        Binding("p", "toggle_pause", "Pause"),
    ]

    def __init__(self, runner: StreamRunner, cubes: Iterator[AdcCube], bursts=None):
        super().__init__()
        self.runner = runner
        self.cubes = cubes
        self.bursts = bursts
        self.paused = False
        self.finished = False
        self.events_table: Optional[DataTable] = None
        self.latency_table: Optional[DataTable] = None
        self.trace_widget: Optional[Static] = None
        self.timer: Optional[Timer] = None
        self.eta: Deque[float] = deque(maxlen=TRACE_WINDOW)

    def compose(self) -> ComposeResult:
        yield Header()
        with Horizontal(id="monitor-row"):
            with Vertical(id="monitor-left-panel"):
                self.trace_widget = Static("", id="trace-graph")
                yield self.trace_widget
                yield Static("Waiting for frames...", id="monitor-status")
            with Vertical(id="monitor-right-panel"):
                yield Static("Events", classes="section-title")
                self.events_table = DataTable(id="events-table")
                yield self.events_table
                yield Static("Latency", classes="section-title")
                self.latency_table = DataTable(id="latency-table")
                yield self.latency_table
        yield Footer()

    def on_mount(self) -> None:
        self.events_table.add_columns("Frames", "Class", "Confidence", "Latency")
        self.events_table.cursor_type = "row"
        self.latency_table.add_columns("Stage", "Mean", "p99")
        self.timer = self.set_interval(self.runner.settings.radar.frame_period, self.advance)

    def action_toggle_pause(self) -> None:
        self.paused = not self.paused
        self.notify("Paused" if self.paused else "Running")

    def advance(self) -> None:
        """Process the next frame of the stream."""
        if self.paused or self.finished:
            return
        cube = next(self.cubes, None)
        if cube is None:
            self._finish()
            return
        try:
            result = self.runner.step(cube)
        except Exception as e:
            log(f"Error processing frame {self.runner.frames_seen}: {e}")
            self._finish()
            return
        self.eta.append(result.eta)
        if result.event is not None:
            self._add_event(result.event)
        theme = self.app.themes.get(self.app.app_theme, THEMES[DEFAULT_THEME])
        status = theme.status_markup(result.is_motion)
        self.query_one("#monitor-status", Static).update(
            f"Frame {result.frame_index}  {status}  {format_ms(result.total_ms)}"
        )
        if result.frame_index % 5 == 0:
            self._render()

    def _add_event(self, event) -> None:
        self.events_table.add_row(
            f"{event.start_frame}-{event.end_frame}",
            event.label.name,
            format_percentage(event.confidence, 1),
            format_ms(event.latency_ms),
        )

    def _render(self) -> None:
        try:
            self.trace_widget.update(
                render_motion_trace(
                    list(self.eta),
                    self.runner.settings.segmenter.motion_threshold,
                    title=f"Motion indicator ({len(self.runner.events)} events)",
                )
            )
        except Exception as e:
            log(f"Error plotting trace: {e}")
        self.latency_table.clear()
        for stage in STAGES + ("total",):
            samples = self.runner.frame_latency_ms if stage == "total" else self.runner.stage_latency_ms[stage]
            stats = stage_stats(samples)
            self.latency_table.add_row(stage, format_ms(stats.mean_ms), format_ms(stats.p99_ms))

    def _finish(self) -> None:
        self.finished = True
        if self.timer is not None:
            self.timer.stop()
        tail = self.runner.finish()
        if tail is not None:
            self._add_event(tail)
        self._render()
        message = f"Stream finished: {self.runner.frames_seen} frames, {len(self.runner.events)} events"
        if self.bursts:
            counters = score_events(self.bursts, self.runner.events)
            if counters.performed and counters.predictions:
                cra, mpr = compute_cra_mpr(counters)
                message += f", CRA {format_percentage(cra)}, MPR {format_percentage(mpr)}"
        self.query_one("#monitor-status", Static).update(message)
