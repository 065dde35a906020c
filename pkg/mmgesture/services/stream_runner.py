"""
Continuous recognition: synthetic stream scripts, the frame-by-frame stream
runner with per-stage latency accounting, event scoring and the pipeline
benchmark.
"""

import logging
import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Deque, Dict, Iterable, Iterator, List, Optional, Sequence, Union

import numpy as np
import torch

from ..models.config import ModelConfig, Settings
from ..models.evaluation import EvalCounters, GroundTruthBurst, SegmentEvent, StageStats, StreamReport
from ..models.gesture import (
    AdcCube, DRAISequence, GestureKind, GestureScript, NegativeMotion, Prediction, RegionOfInterest, Scatterer,
    SegmentWindow,
)
from ..utils.calculations import compute_cra_mpr, stage_stats
from .classifier import GestureNet, predict, prepare_input
from .drai_pipeline import accumulate_drai, angle_transform, process_cube, range_doppler_stack, suppress_static
from .radar_front import BODY_REFLECTIVITY, gesture_trajectory, motion_span, synthesize_frame
from .segmentation import DynamicWindowSegmenter, locate_user, mask_to_roi

logger = logging.getLogger(__name__)

STAGES = ("dsp", "spatial", "segmentation", "inference")

Classifier = Callable[[SegmentWindow], Prediction]


@dataclass
class StreamScript:
    """Gestures separated by static gaps in front of one static scene."""
    gestures: List[GestureScript]
    gaps: List[int]  # static frames before each gesture
    static_scene: List[Scatterer] = field(default_factory=list)
    tail: int = 10
    noise_snr: Optional[float] = 20.0
    seed: int = 0

    def scenes(self, config) -> Iterator[List[Scatterer]]:
        """Scatterers of every frame in stream order."""
        for gap, script in zip(self.gaps, self.gestures):
            for _ in range(gap):
                yield list(self.static_scene)
            for scene in gesture_trajectory(script, config):
                yield scene + self.static_scene
        for _ in range(self.tail):
            yield list(self.static_scene)

    def cubes(self, config) -> Iterator[AdcCube]:
        for index, scene in enumerate(self.scenes(config)):
            yield synthesize_frame(config, scene, self.noise_snr, seed=[self.seed, index], frame_index=index)

    def bursts(self, config) -> List[GroundTruthBurst]:
        """Frames in which each scripted gesture is actually moving."""
        bursts = []
        offset = 0
        for gap, script in zip(self.gaps, self.gestures):
            offset += gap
            frames, moving = motion_span(script, config)
            bursts.append(GroundTruthBurst(offset, offset + moving - 1, script.kind))
            offset += frames
        return bursts

    def frame_count(self, config) -> int:
        return sum(self.gaps) + sum(motion_span(s, config)[0] for s in self.gestures) + self.tail


def build_stream_script(
    kinds: Sequence[GestureKind],
    config,
    seed: int = 0,
    anchor_distance: float = 0.8,
    anchor_angle: float = 0.0,
    gap_range: Sequence[int] = (8, 14),
    snr_db: Optional[float] = 20.0,
    body_offset: Optional[float] = 0.2,
    duration: float = 1.0,
    interferer: Optional[Scatterer] = None,
) -> StreamScript:
    """
    Randomized stream of the given gestures performed by one user.

    Gap lengths are drawn uniformly from ``gap_range`` (inclusive) and
    negative samples pick their motion from the seed.
    """
    rng = np.random.default_rng(seed)
    static: List[Scatterer] = []
    if body_offset is not None:
        static.append(Scatterer(anchor_distance + body_offset, anchor_angle, 0.0, BODY_REFLECTIVITY))
    if interferer is not None:
        static.append(interferer)
    gestures = []
    for i, kind in enumerate(kinds):
        negative = None
        if kind is GestureKind.NG:
            negative = list(NegativeMotion)[int(rng.integers(len(NegativeMotion)))]
        gestures.append(
            GestureScript(
                kind=kind,
                anchor_distance=anchor_distance,
                anchor_angle=anchor_angle,
                duration=duration,
                negative_motion=negative,
                body_offset=None,
                seed=seed + i,
            )
        )
    gaps = [int(rng.integers(gap_range[0], gap_range[1] + 1)) for _ in gestures]
    return StreamScript(gestures=gestures, gaps=gaps, static_scene=static, noise_snr=snr_db, seed=seed)


def score_events(bursts: Sequence[GroundTruthBurst], events: Sequence[SegmentEvent]) -> EvalCounters:
    """
    Count performed, misclassified, missed and predicted gestures.

    A burst is missed when no event covers at least half of it; otherwise it
    is judged by the first event whose midpoint falls inside it. Non-gesture
    bursts are only counted in ``negatives``; rejecting them emits nothing.
    """
    gestures = [burst for burst in bursts if burst.label.is_gesture]
    counters = EvalCounters(
        performed=len(gestures), predictions=len(events), negatives=len(bursts) - len(gestures)
    )
    for burst in gestures:
        best = 0
        for event in events:
            overlap = min(burst.end_frame, event.end_frame) - max(burst.start_frame, event.start_frame) + 1
            best = max(best, overlap)
        if best < 0.5 * len(burst):
            counters.missed += 1
            continue
        matched = next(
            (e for e in events if burst.start_frame <= e.midpoint <= burst.end_frame), None
        )
        if matched is None or matched.label != burst.label:
            counters.misclassified += 1
    return counters


def model_classifier(model: GestureNet) -> Classifier:
    return lambda segment: predict(model, segment)


@dataclass
class FrameResult:
    """What the runner did with one frame."""
    frame_index: int
    eta: float
    is_motion: bool
    roi: Optional[RegionOfInterest]
    stage_ms: Dict[str, float]
    total_ms: float
    segment: Optional[SegmentWindow] = None
    prediction: Optional[Prediction] = None
    event: Optional[SegmentEvent] = None


class StreamRunner:
    """
    Frame-by-frame recognizer for one stream.

    Each frame passes DSP, spatial gating (SRAI target detection refreshed
    every ``roi_refresh_frames`` while no window is open), the dynamic
    window, and the classifier when a window closes.
    """

    def __init__(self, settings: Settings, classifier: Classifier, stream_id: str = "stream-0"):
        self.settings = settings
        self.classifier = classifier
        self.stream_id = stream_id
        self.segmenter = DynamicWindowSegmenter(settings.segmenter)
        self.roi: Optional[RegionOfInterest] = None
        self.frames_seen = 0
        self.segments_seen = 0
        self.events: List[SegmentEvent] = []
        history = settings.stream.latency_history
        self.stage_latency_ms: Dict[str, Deque[float]] = {stage: deque(maxlen=history) for stage in STAGES}
        self.frame_latency_ms: Deque[float] = deque(maxlen=history)

    def step(self, cube: AdcCube) -> FrameResult:
        settings = self.settings
        timings: Dict[str, float] = {}
        start = time.perf_counter()

        products = process_cube(replace(cube, frame_index=self.frames_seen), settings.radar, settings.pipeline)
        mark = time.perf_counter()
        timings["dsp"] = (mark - start) * 1000

        if self.frames_seen % settings.stream.roi_refresh_frames == 0 and not self.segmenter.is_open:
            located = locate_user(products.srai, settings.clean, settings.roi)
            if located is not None:
                self.roi = located
        frame = mask_to_roi(products.drai, self.roi) if self.roi is not None else products.drai
        now = time.perf_counter()
        timings["spatial"], mark = (now - mark) * 1000, now

        segment = self.segmenter.push(frame)
        now = time.perf_counter()
        timings["segmentation"], mark = (now - mark) * 1000, now

        prediction, event = self._classify(segment, start) if segment is not None else (None, None)
        timings["inference"] = (time.perf_counter() - mark) * 1000

        total = (time.perf_counter() - start) * 1000
        for stage, value in timings.items():
            self.stage_latency_ms[stage].append(value)
        self.frame_latency_ms.append(total)
        result = FrameResult(
            frame_index=self.frames_seen,
            eta=self.segmenter.trace.eta[-1],
            is_motion=self.segmenter.trace.motion[-1],
            roi=self.roi,
            stage_ms=timings,
            total_ms=total,
            segment=segment,
            prediction=prediction,
            event=event,
        )
        self.frames_seen += 1
        return result

    def finish(self) -> Optional[SegmentEvent]:
        """Close a window left open at stream end."""
        segment = self.segmenter.flush()
        if segment is None:
            return None
        return self._classify(segment, time.perf_counter())[1]

    def _classify(self, segment: SegmentWindow, started: float):
        self.segments_seen += 1
        prediction = self.classifier(segment)
        if not prediction.label.is_gesture:
            logger.debug("Segment [%d, %d] rejected as negative", segment.start_frame, segment.end_frame)
            return prediction, None
        period = self.settings.radar.frame_period
        event = SegmentEvent(
            start_frame=segment.start_frame,
            end_frame=segment.end_frame,
            t_start_s=segment.start_frame * period,
            t_end_s=(segment.end_frame + 1) * period,
            label=prediction.label,
            confidence=prediction.confidence,
            latency_ms=(time.perf_counter() - started) * 1000,
            stream_id=self.stream_id,
        )
        self.events.append(event)
        logger.info("Event %s [%d, %d] p=%.2f", event.label.name, event.start_frame, event.end_frame, event.confidence)
        return prediction, event

    def report(self, bursts: Optional[Sequence[GroundTruthBurst]] = None) -> StreamReport:
        report = StreamReport(
            frame_latency_ms=list(self.frame_latency_ms),
            stage_latency_ms={k: list(v) for k, v in self.stage_latency_ms.items()},
            events=list(self.events),
            segments_seen=self.segments_seen,
        )
        if bursts is not None:
            report.counters = score_events(bursts, self.events)
            if report.counters.performed and report.counters.predictions:
                report.cra, report.mpr = compute_cra_mpr(report.counters)
        return report


def run_stream(
    source: Union[StreamScript, Iterable[AdcCube]],
    settings: Settings,
    classifier: Classifier,
    pace: Optional[bool] = None,
    bursts: Optional[Sequence[GroundTruthBurst]] = None,
    stream_id: str = "stream-0",
    on_event: Optional[Callable[[SegmentEvent], None]] = None,
) -> StreamReport:
    """
    Run a whole stream through a fresh StreamRunner.

    Args:
        source: Stream script (ground truth taken from it) or cubes read from a file
        settings: Run settings
        classifier: Callable mapping a segment to a Prediction
        pace: Hold each frame to the frame period; defaults to settings.stream.pace
        bursts: Ground truth for scoring when the source is not a script
        on_event: Called with every event as it is emitted

    Returns:
        StreamReport with latencies, events and, when ground truth is known, CRA and MPR
    """
    pace = settings.stream.pace if pace is None else pace
    if isinstance(source, StreamScript):
        cubes: Iterable[AdcCube] = source.cubes(settings.radar)
        bursts = source.bursts(settings.radar) if bursts is None else bursts
    else:
        cubes = source

    runner = StreamRunner(settings, classifier, stream_id)
    period = settings.radar.frame_period
    deadline = time.monotonic()
    for cube in cubes:
        result = runner.step(cube)
        if result.event is not None and on_event is not None:
            on_event(result.event)
        if pace:
            deadline += period
            delay = deadline - time.monotonic()
            if delay > 0:
                time.sleep(delay)
    tail = runner.finish()
    if tail is not None and on_event is not None:
        on_event(tail)
    logger.info("Stream %s: %d frames, %d events", stream_id, runner.frames_seen, len(runner.events))
    return runner.report(bursts)


def bench_pipeline(
    settings: Settings,
    trials: int = 1000,
    models: Optional[Dict[str, GestureNet]] = None,
    sequence_length: int = 20,
    seed: int = 0,
) -> Dict[str, StageStats]:
    """
    Time the signal stages on a synthetic frame and the classifiers on a
    ``sequence_length``-frame sequence.

    Returns:
        Stage name -> latency statistics; "total" sums the signal stages per trial
    """
    if trials < 100:
        raise ValueError("bench_pipeline needs at least 100 trials")
    radar, params = settings.radar, settings.pipeline
    scene = [
        Scatterer(0.7, 0.3, 0.5, 1.0),
        Scatterer(0.9, 0.3, 0.0, BODY_REFLECTIVITY),
    ]
    cube = synthesize_frame(radar, scene, settings.stream.snr_db, seed=seed)
    signal_stages = ("range_doppler", "static_suppression", "angle_transform", "noise_elimination")
    samples: Dict[str, List[float]] = {name: [] for name in signal_stages + ("total",)}

    for _ in range(trials):
        t0 = time.perf_counter()
        stack = range_doppler_stack(cube.samples, radar, params.window_function)
        t1 = time.perf_counter()
        cleaned = suppress_static(stack, params.doppler_bin_threshold, radar)
        t2 = time.perf_counter()
        rda = angle_transform(cleaned, radar)
        t3 = time.perf_counter()
        accumulate_drai(cleaned, rda, params.power_threshold_factor)
        t4 = time.perf_counter()
        marks = (t0, t1, t2, t3, t4)
        for name, begin, end in zip(signal_stages, marks, marks[1:]):
            samples[name].append((end - begin) * 1000)
        samples["total"].append((t4 - t0) * 1000)

    if models is None:
        models = {
            "lite": GestureNet(ModelConfig.lite()),
            "full": GestureNet(ModelConfig.full()),
        }
    rng = np.random.default_rng(seed)
    for name, model in models.items():
        shape = tuple(model.config.frame_shape)
        seq = DRAISequence.from_array(rng.random((sequence_length, *shape)))
        model.eval()
        frames = prepare_input(model.config, seq).unsqueeze(0)
        key = f"inference_{name}"
        samples[key] = []
        with torch.no_grad():
            for _ in range(trials):
                t0 = time.perf_counter()
                model(frames)
                samples[key].append((time.perf_counter() - t0) * 1000)

    return {name: stage_stats(values) for name, values in samples.items()}
