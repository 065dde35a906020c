"""
Settings loading, binary file formats, dataset manifests and dataset
ingestion.
"""

import json
import logging
import math
import struct
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError

from ..exceptions import ConfigError, FileFormatError, LabelError, ShapeMismatchError
from ..models.config import Settings
from ..models.evaluation import DatasetEntry, DatasetManifest, SegmentEvent
from ..models.gesture import UNLABELED, AdcCube, DRAISequence, GestureKind

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent.parent / "config.yaml"

ADC_MAGIC = b"MMWC"
ADC_VERSION = 1
ADC_HEADER = "<4sHIIII"  # magic, version, chirps, samples, channels, frames

DRAI_MAGIC = b"DRAI"
DRAI_VERSION = 1
DRAI_HEADER = "<4sHIIIB"  # magic, version, range bins, angle bins, frames, label


def load_settings(path: Optional[PathLike] = None) -> Settings:
    """
    Load settings from a YAML file.

    A missing default file gives the built-in defaults; an explicitly named
    file must exist.
    """
    config_path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    if not config_path.exists():
        if path is not None:
            raise ConfigError(f"Config file not found: {config_path}")
        return Settings()
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        return Settings.model_validate(data)
    except (yaml.YAMLError, IOError) as e:
        raise ConfigError(f"Cannot read {config_path}: {e}") from e
    except ValidationError as e:
        raise ConfigError(f"Invalid settings in {config_path}:\n{e}") from e


def _read_header(data: bytes, fmt: str, magic: bytes, version: int, path: PathLike) -> Tuple:
    size = struct.calcsize(fmt)
    if len(data) < size:
        raise FileFormatError(f"{path}: truncated header")
    fields = struct.unpack_from(fmt, data)
    if fields[0] != magic:
        raise FileFormatError(f"{path}: bad magic {fields[0]!r}, expected {magic!r}")
    if fields[1] != version:
        raise FileFormatError(f"{path}: unsupported version {fields[1]}")
    return fields[2:]


def write_adc_cubes(path: PathLike, cubes: Sequence[AdcCube]) -> None:
    """Write raw cubes as interleaved little-endian float32 (real, imag), chirp-major."""
    if not cubes:
        raise ShapeMismatchError("no cubes to write")
    chirps, samples, channels = cubes[0].shape
    with open(path, "wb") as f:
        f.write(struct.pack(ADC_HEADER, ADC_MAGIC, ADC_VERSION, chirps, samples, channels, len(cubes)))
        for cube in cubes:
            if cube.shape != (chirps, samples, channels):
                raise ShapeMismatchError(f"cube {cube.frame_index} has shape {cube.shape}")
            f.write(np.ascontiguousarray(cube.samples, dtype="<c8").tobytes())


def read_adc_cubes(path: PathLike) -> List[AdcCube]:
    with open(path, "rb") as f:
        data = f.read()
    chirps, samples, channels, frames = _read_header(data, ADC_HEADER, ADC_MAGIC, ADC_VERSION, path)
    offset = struct.calcsize(ADC_HEADER)
    per_frame = chirps * samples * channels
    if len(data) - offset != frames * per_frame * 8:
        raise FileFormatError(f"{path}: payload size does not match {frames} frames of {chirps}x{samples}x{channels}")
    values = np.frombuffer(data, dtype="<c8", offset=offset).astype(np.complex128)
    values = values.reshape(frames, chirps, samples, channels)
    return [AdcCube(samples=values[t], frame_index=t) for t in range(frames)]


def write_drai_sequence(path: PathLike, seq: DRAISequence) -> None:
    """Write a DRAI sequence as row-major little-endian float32 frames."""
    stack = seq.stack()
    frames, range_bins, angle_bins = stack.shape
    label = UNLABELED if seq.label is None else seq.label.value
    with open(path, "wb") as f:
        f.write(struct.pack(DRAI_HEADER, DRAI_MAGIC, DRAI_VERSION, range_bins, angle_bins, frames, label))
        f.write(np.ascontiguousarray(stack, dtype="<f4").tobytes())


def read_drai_sequence(path: PathLike, frame_period: float = 0.05) -> DRAISequence:
    with open(path, "rb") as f:
        data = f.read()
    range_bins, angle_bins, frames, label = _read_header(data, DRAI_HEADER, DRAI_MAGIC, DRAI_VERSION, path)
    offset = struct.calcsize(DRAI_HEADER)
    if len(data) - offset != frames * range_bins * angle_bins * 4:
        raise FileFormatError(f"{path}: payload size does not match {frames} frames of {range_bins}x{angle_bins}")
    if label != UNLABELED and label >= len(GestureKind):
        raise FileFormatError(f"{path}: unknown label byte {label}")
    stack = np.frombuffer(data, dtype="<f4", offset=offset).reshape(frames, range_bins, angle_bins)
    kind = None if label == UNLABELED else GestureKind(label)
    return DRAISequence.from_array(stack.astype(np.float64), label=kind, frame_period=frame_period)


def save_rdi_archive(path: PathLike, archive: np.ndarray) -> None:
    """Keep per-channel range-Doppler images [T, N, K, L] for later antenna reduction."""
    np.savez_compressed(path, rdi=archive.astype(np.complex64))


def load_rdi_archive(path: PathLike) -> np.ndarray:
    try:
        with np.load(path) as archive:
            return archive["rdi"]
    except (OSError, KeyError, ValueError) as e:
        raise FileFormatError(f"{path}: not a range-Doppler archive: {e}") from e


def _entry_to_dict(entry: DatasetEntry) -> Dict:
    return {
        "path": entry.path,
        "label": entry.label.name,
        "user": entry.user,
        "room": entry.room,
        "location": entry.location,
        "format": entry.format,
        "angle_deg": entry.angle_deg,
    }


def _dict_to_entry(data: Dict) -> DatasetEntry:
    try:
        label = GestureKind[data["label"]]
    except KeyError as e:
        raise LabelError(f"unknown label {data.get('label')!r}") from e
    fmt = data.get("format", "drai")
    if fmt not in ("drai", "npy"):
        raise FileFormatError(f"unknown entry format {fmt!r}")
    return DatasetEntry(
        path=data["path"],
        label=label,
        user=str(data.get("user", "unknown")),
        room=str(data.get("room", "unknown")),
        location=str(data.get("location", "unknown")),
        format=fmt,
        angle_deg=float(data.get("angle_deg", 0.0)),
    )


def load_manifest(path: PathLike) -> DatasetManifest:
    """Read a JSON manifest; entry paths are relative to ``root``, itself relative to the manifest."""
    manifest_path = Path(path)
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (json.JSONDecodeError, IOError) as e:
        raise FileFormatError(f"Cannot read manifest {manifest_path}: {e}") from e
    root = manifest_path.parent / data.get("root", ".")
    entries = []
    for i, raw in enumerate(data.get("entries", [])):
        try:
            entries.append(_dict_to_entry(raw))
        except (LabelError, FileFormatError, KeyError) as e:
            logger.warning("Manifest entry %d skipped: %s", i, e)
    return DatasetManifest(entries=entries, root=str(root))


def save_manifest(manifest: DatasetManifest, path: PathLike, root: str = ".") -> None:
    data = {"root": root, "entries": [_entry_to_dict(entry) for entry in manifest.entries]}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)


def _load_entry(entry: DatasetEntry, root: Path, shape: Tuple[int, int], frame_period: float) -> DRAISequence:
    path = root / entry.path
    if not path.exists():
        raise FileNotFoundError(f"{path} does not exist")
    if entry.format == "npy":
        seq = DRAISequence.from_array(np.load(path), label=entry.label, frame_period=frame_period)
    else:
        seq = read_drai_sequence(path, frame_period)
        if seq.label is not None and seq.label != entry.label:
            raise LabelError(f"{path}: file label {seq.label.name} disagrees with manifest {entry.label.name}")
    if len(seq) == 0:
        raise ShapeMismatchError(f"{path}: no frames")
    frame_shape = seq.frames[0].values.shape
    if frame_shape != tuple(shape):
        raise ShapeMismatchError(f"{path}: frames are {frame_shape}, expected {tuple(shape)}")
    return DRAISequence(frames=seq.frames, label=entry.label, angle_tag=math.radians(entry.angle_deg))


def load_dataset(
    manifest_path: PathLike, shape: Tuple[int, int] = (32, 32), frame_period: float = 0.05
) -> List[DRAISequence]:
    """
    Load every manifest entry; bad entries are logged and skipped.
    """
    manifest = load_manifest(manifest_path)
    root = Path(manifest.root)
    dataset: List[DRAISequence] = []
    for entry in manifest.entries:
        try:
            dataset.append(_load_entry(entry, root, shape, frame_period))
        except (OSError, ValueError, FileFormatError) as e:
            logger.warning("Skipping %s: %s", entry.path, e)
    logger.info("Loaded %d of %d manifest entries", len(dataset), len(manifest.entries))
    return dataset


def summarize_manifest(manifest: DatasetManifest) -> str:
    """Per-domain sample counts and the users x rooms x locations domain total."""
    counts = manifest.domain_counts()
    lines = [f"samples: {len(manifest.entries)}"]
    for key in ("user", "room", "location"):
        values = ", ".join(f"{name}={n}" for name, n in sorted(counts[key].items()))
        lines.append(f"{key}s ({len(counts[key])}): {values}")
    labels: Dict[str, int] = {}
    for entry in manifest.entries:
        labels[entry.label.name] = labels.get(entry.label.name, 0) + 1
    lines.append("classes: " + ", ".join(f"{name}={n}" for name, n in sorted(labels.items())))
    domains = len(counts["user"]) * len(counts["room"]) * len(counts["location"])
    lines.append(
        f"domains: {len(counts['room'])} rooms x {len(counts['user'])} users x "
        f"{len(counts['location'])} locations = {domains}"
    )
    return "\n".join(lines)


def write_event_lines(events: Iterable[SegmentEvent], stream: TextIO) -> None:
    """One JSON record per event."""
    for event in events:
        stream.write(json.dumps(event.to_record()) + "\n")
    stream.flush()
