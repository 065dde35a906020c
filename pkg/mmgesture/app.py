"""
Terminal stream monitor: watches the recognizer work through a stream frame
by frame.
"""

from typing import Iterator, Optional, Sequence

from textual.app import App, ComposeResult
from textual.binding import Binding
from textual.containers import Container
from textual.reactive import reactive

from .models.evaluation import GroundTruthBurst
from .models.gesture import AdcCube
from .screens.stream_monitor import StreamMonitorScreen
from .services.stream_runner import StreamRunner
from .themes import DEFAULT_THEME, THEMES


class MonitorApp(App):
    """Stream monitor with dynamic theme support."""

    app_theme: reactive[str] = reactive(DEFAULT_THEME, init=False)
    """The currently selected theme."""

    CSS = '''
    Screen {
        background: $background;
    }

    Header {
        background: $panel;
        color: $accent;
        text-style: bold;
        border-bottom: wide $accent 50%;
    }

    Footer {
        background: $panel;
        color: $text-muted;
        border-top: wide $panel-lighten-2;
    }

    #monitor-row {
        height: 1fr;
        width: 100%;
    }

    #monitor-left-panel {
        width: auto;
        height: auto;
        padding-right: 2;
    }

    #monitor-right-panel {
        width: 1fr;
        height: 100%;
        padding-left: 1;
    }

    #trace-graph {
        width: auto;
        height: auto;
        min-height: 20;
        min-width: 70;
        border: round $panel-lighten-2;
        padding: 1;
        background: $surface;
    }

    #monitor-status {
        text-align: center;
        color: $text-muted;
        margin-top: 1;
    }

    .section-title {
        text-style: bold;
        color: $accent;
        margin-top: 1;
        margin-bottom: 1;
    }

    #events-table {
        height: 1fr;
    }

    #latency-table {
        height: auto;
    }

    DataTable {
        border: round $panel-lighten-2;
    }

    DataTable > .datatable--header {
        background: $primary;
        color: $text;
        text-style: bold;
    }
    '''

    BINDINGS = [
        Binding("ctrl+c", "quit", "Quit"),
        Binding("ctrl+t", "cycle_theme", "Theme"),
    ]

    def __init__(
        self,
        runner: StreamRunner,
        cubes: Iterator[AdcCube],
        bursts: Optional[Sequence[GroundTruthBurst]] = None,
    ):
        self.themes = THEMES
        self.runner = runner
        self.cubes = cubes
        self.bursts = bursts
        super().__init__()
        self.title = "mmgesture monitor"
        self.sub_title = runner.stream_id

    def get_css_variables(self) -> dict[str, str]:
        """Get theme-specific CSS variables."""
        base_vars = super().get_css_variables()

        if not hasattr(self, 'app_theme') or not self.app_theme:
            return base_vars

        theme = self.themes.get(self.app_theme)
        if theme:
            color_system = theme.to_color_system().generate()
            return {**base_vars, **color_system}

        return base_vars

    def action_cycle_theme(self) -> None:
        """Cycle through available themes."""
        theme_names = list(self.themes.keys())
        current_index = theme_names.index(self.app_theme) if self.app_theme in theme_names else 0
        next_index = (current_index + 1) % len(theme_names)
        self.app_theme = theme_names[next_index]
        self.notify(f"Theme: {self.app_theme.title()}")

    def watch_app_theme(self, theme: str) -> None:
        self.refresh_css()

    def compose(self) -> ComposeResult:
        yield Container()

    def on_mount(self) -> None:
        self.push_screen(StreamMonitorScreen(self.runner, self.cubes, self.bursts))

    def action_quit(self) -> None:
        self.exit()
