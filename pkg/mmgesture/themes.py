"""
Color themes of the stream monitor.

Besides the Textual color system each theme names the colors used for the
motion/static status of the current frame.
"""

from pydantic import BaseModel, ConfigDict, Field
from textual.design import ColorSystem

# Fields that are not part of Textual's color system.
STATUS_FIELDS = {"motion", "static"}


class Theme(BaseModel):
    """Monitor palette: Textual color system plus frame status colors."""

    model_config = ConfigDict(frozen=True)

    primary: str
    secondary: str | None = None
    warning: str | None = None
    error: str | None = None
    success: str | None = None
    accent: str | None = None
    foreground: str | None = None
    background: str | None = None
    surface: str | None = None
    panel: str | None = None
    dark: bool = True
    variables: dict[str, str] = Field(default_factory=dict)
    motion: str = "#F2CC60"
    static: str = "#8B949E"

    def to_color_system(self) -> ColorSystem:
        return ColorSystem(**self.model_dump(exclude=STATUS_FIELDS))

    def status_markup(self, is_motion: bool) -> str:
        """Rich markup for the motion/static label of a frame."""
        color, word = (self.motion, "motion") if is_motion else (self.static, "static")
        return f"[{color}]{word}[/]"


THEMES: dict[str, Theme] = {
    "radar": Theme(
        primary="#39D353",  # phosphor
        secondary="#2EA043",
        accent="#F2CC60",
        success="#56D364",
        warning="#E3B341",
        error="#F85149",
        foreground="#C9D1D9",
        background="#0D1117",
        surface="#161B22",
        panel="#21262D",
        variables={
            "block-cursor-background": "#39D353",
            "block-cursor-foreground": "#0D1117",
            "footer-key-foreground": "#39D353",
        },
        motion="#F2CC60",
        static="#2EA043",
    ),
    "sonar": Theme(
        primary="#4FC1E9",
        secondary="#3B8FB8",
        accent="#A0E7E5",
        success="#48CFAD",
        warning="#FFCE54",
        error="#ED5565",
        foreground="#E6F1F8",
        background="#06121E",
        surface="#0C1F30",
        panel="#163047",
        motion="#FFCE54",
        static="#3B8FB8",
    ),
    "infrared": Theme(
        primary="#FF7B72",
        secondary="#FFA657",
        accent="#D2A8FF",
        success="#7EE787",
        warning="#FFA657",
        error="#FF7B72",
        foreground="#F0F6FC",
        background="#1B1B1F",
        surface="#26262C",
        panel="#34343C",
        motion="#FF7B72",
        static="#8B8B94",
    ),
}

DEFAULT_THEME = "radar"
