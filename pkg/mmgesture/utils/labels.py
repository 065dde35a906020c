"""
Gesture label parsing for command-line arguments and manifest files.
"""

import re
from typing import List, Optional

from ..exceptions import LabelError
from ..models.gesture import GestureKind, NegativeMotion


class LabelParser:
    """Maps free-form gesture names to GestureKind."""

    # Checked in order; the first match wins.
    GESTURE_PATTERNS = [
        (r'^(PH|PUSH)$', GestureKind.PH),
        (r'^(PL|PULL)$', GestureKind.PL),
        (r'^(LS|LEFT[ _-]?SWIPE|SWIPE[ _-]?LEFT)$', GestureKind.LS),
        (r'^(RS|RIGHT[ _-]?SWIPE|SWIPE[ _-]?RIGHT)$', GestureKind.RS),
        (r'^(CT|CW|CLOCKWISE([ _-]?TURNING)?)$', GestureKind.CT),
        (r'^(AT|ACW|CCW|(ANTI|COUNTER)[ _-]?CLOCKWISE([ _-]?TURNING)?)$', GestureKind.AT),
        (r'^(NG|NEG(ATIVE)?|NONE|OTHER)$', GestureKind.NG),
    ]

    def parse(self, text: str) -> GestureKind:
        """
        Parse a gesture name.

        Args:
            text: Short code ("PH") or spoken name ("left swipe"), any case

        Returns:
            Matching GestureKind
        """
        name = text.upper().strip()
        if name.isdigit() and int(name) < len(GestureKind):
            return GestureKind(int(name))
        for pattern, kind in self.GESTURE_PATTERNS:
            if re.match(pattern, name, re.IGNORECASE):
                return kind
        if self.parse_negative(name) is not None:
            return GestureKind.NG
        raise LabelError(f"unknown gesture label: {text!r}")

    def parse_negative(self, text: str) -> Optional[NegativeMotion]:
        """Negative motion named by ``text``, or None."""
        key = re.sub(r'[ -]', '_', text.strip().lower())
        for motion in NegativeMotion:
            if motion.value == key:
                return motion
        return None

    def parse_list(self, text: str) -> List[GestureKind]:
        """Comma separated gesture names."""
        return [self.parse(part) for part in text.split(",") if part.strip()]


# Global instance
label_parser = LabelParser()
