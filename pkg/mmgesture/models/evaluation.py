"""
Data models for datasets, stream events and evaluation reports.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .gesture import GestureKind


@dataclass
class EvalCounters:
    """Counts behind continuous recognition accuracy and multiple prediction rate."""
    performed: int = 0  # N
    misclassified: int = 0  # W
    missed: int = 0  # M
    predictions: int = 0  # P
    negatives: int = 0  # non-gesture bursts, outside N


@dataclass(frozen=True)
class GroundTruthBurst:
    """A scripted motion span inside a stream, inclusive frame indices."""
    start_frame: int
    end_frame: int
    label: GestureKind

    def __len__(self) -> int:
        return self.end_frame - self.start_frame + 1


@dataclass(frozen=True)
class SegmentEvent:
    """Emitted recognition event of the stream runner."""
    start_frame: int
    end_frame: int
    t_start_s: float
    t_end_s: float
    label: GestureKind
    confidence: float
    latency_ms: float
    stream_id: str = "stream-0"

    @property
    def midpoint(self) -> float:
        return (self.start_frame + self.end_frame) / 2

    def to_record(self) -> Dict[str, object]:
        """Line-delimited event record."""
        return {
            "stream_id": self.stream_id,
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "t_start_s": round(self.t_start_s, 4),
            "t_end_s": round(self.t_end_s, 4),
            "class": self.label.name,
            "confidence": round(self.confidence, 4),
            "latency_ms": round(self.latency_ms, 3),
        }


@dataclass
class StageStats:
    """Latency summary of one processing stage, milliseconds."""
    mean_ms: float
    p50_ms: float
    p99_ms: float
    count: int


@dataclass
class StreamReport:
    """Outcome of one streaming run."""
    frame_latency_ms: List[float] = field(default_factory=list)
    stage_latency_ms: Dict[str, List[float]] = field(default_factory=dict)
    events: List[SegmentEvent] = field(default_factory=list)
    segments_seen: int = 0
    counters: Optional[EvalCounters] = None
    cra: Optional[float] = None
    mpr: Optional[float] = None


@dataclass
class DatasetEntry:
    """One sample listed in a dataset manifest."""
    path: str
    label: GestureKind
    user: str = "unknown"
    room: str = "unknown"
    location: str = "unknown"
    format: str = "drai"
    angle_deg: float = 0.0  # anchor angle the sample was collected at


@dataclass
class DatasetManifest:
    """Sample list with domain metadata."""
    entries: List[DatasetEntry] = field(default_factory=list)
    root: str = "."

    def domain_counts(self) -> Dict[str, Dict[str, int]]:
        """Sample counts grouped per user, room and location."""
        counts: Dict[str, Dict[str, int]] = {"user": {}, "room": {}, "location": {}}
        for entry in self.entries:
            for key in counts:
                value = getattr(entry, key)
                counts[key][value] = counts[key].get(value, 0) + 1
        return counts
