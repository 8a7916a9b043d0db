"""Canonical landmark data model and bundle file format.

A landmark bundle holds the per-frame face mesh (478 points) and upper-body
pose (33 points) for one view of a video pair, in normalized image
coordinates.  Missing detections are encoded at frame level by a null
``face`` or ``pose`` entry, never by NaN coordinates.

Bundle file schema (JSON)::

    {"video_id": str,
     "view": "source" | "edited",
     "fps": number > 0,
     "frames": [{"frame_index": int,
                 "face": [[x, y] * 478] | null,
                 "pose": [[x, y] * 33] | null}, ...]}

Pair record file schema (JSON)::

    {"pair_id": str,
     "kind": "edited_pair" | "identical_pair",
     "source": "<bundle path>",
     "edited": "<bundle path>"}

Bundle paths in a pair record are resolved relative to the record's own
directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaError

FACE_POINT_COUNT = 478
POSE_POINT_COUNT = 33

# Face mesh indices used by the motion channels.
MOUTH_VERTICAL_PAIRS = ((13, 14), (82, 87), (312, 317), (0, 17))
MOUTH_CORNER_LEFT = 61
MOUTH_CORNER_RIGHT = 291

RIGHT_EYE_OUTER = 33
RIGHT_EYE_INNER = 133
RIGHT_EYE_UPPER = 159
RIGHT_EYE_LOWER = 145
RIGHT_IRIS_CENTER = 468

LEFT_EYE_INNER = 362
LEFT_EYE_OUTER = 263
LEFT_EYE_UPPER = 386
LEFT_EYE_LOWER = 374
LEFT_IRIS_CENTER = 473

# Upper-body pose indices.
LEFT_SHOULDER = 11
RIGHT_SHOULDER = 12
LEFT_ELBOW = 13
RIGHT_ELBOW = 14
LEFT_WRIST = 15
RIGHT_WRIST = 16
LEFT_HIP = 23
RIGHT_HIP = 24


class View(str, Enum):
    SOURCE = "source"
    EDITED = "edited"


class PairKind(str, Enum):
    EDITED = "edited_pair"
    IDENTICAL = "identical_pair"


@dataclass(frozen=True)
class LandmarkPoint:
    """A single 2D landmark in normalized image coordinates."""

    x: float
    y: float


def _optional_array_equal(a: np.ndarray | None, b: np.ndarray | None) -> bool:
    if a is None or b is None:
        return a is b
    return np.array_equal(a, b)


def _as_point_array(points, count: int, what: str, frame_index: int) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.shape != (count, 2):
        raise SchemaError(
            f"frame {frame_index}: {what} must have shape ({count}, 2), got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"frame {frame_index}: {what} contains non-finite coordinates")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LandmarkFrame:
    """Landmarks for one frame; ``face``/``pose`` are None on missed detection."""

    frame_index: int
    face: np.ndarray | None = None
    pose: np.ndarray | None = None

    def __eq__(self, other):
        if not isinstance(other, LandmarkFrame):
            return NotImplemented
        return (
            self.frame_index == other.frame_index
            and _optional_array_equal(self.face, other.face)
            and _optional_array_equal(self.pose, other.pose)
        )

    def __post_init__(self):
        if self.frame_index < 0:
            raise SchemaError(f"frame_index must be non-negative, got {self.frame_index}")
        if self.face is not None:
            object.__setattr__(
                self, "face", _as_point_array(self.face, FACE_POINT_COUNT, "face", self.frame_index)
            )
        if self.pose is not None:
            object.__setattr__(
                self, "pose", _as_point_array(self.pose, POSE_POINT_COUNT, "pose", self.frame_index)
            )

    def face_point(self, index: int) -> LandmarkPoint:
        if self.face is None:
            raise ValueError(f"frame {self.frame_index} has no face detection")
        x, y = self.face[index]
        return LandmarkPoint(float(x), float(y))

    def pose_point(self, index: int) -> LandmarkPoint:
        if self.pose is None:
            raise ValueError(f"frame {self.frame_index} has no pose detection")
        x, y = self.pose[index]
        return LandmarkPoint(float(x), float(y))


@dataclass(frozen=True)
class LandmarkBundle:
    """Ordered landmark frames for one view of one video."""

    video_id: str
    view: View
    fps: float
    frames: tuple[LandmarkFrame, ...]

    def __post_init__(self):
        object.__setattr__(self, "view", View(self.view))
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.fps > 0:
            raise SchemaError(f"fps must be positive, got {self.fps}")
        if not self.frames:
            raise SchemaError("bundle has no frames")
        for expected, frame in enumerate(self.frames):
            if frame.frame_index != expected:
                raise SchemaError(
                    f"frame_index sequence broken at index {expected}: got {frame.frame_index}"
                )

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    def face_array(self) -> np.ndarray:
        """(n_frames, 478, 2) array with NaN rows where face is missing."""
        out = np.full((self.n_frames, FACE_POINT_COUNT, 2), np.nan)
        for i, frame in enumerate(self.frames):
            if frame.face is not None:
                out[i] = frame.face
        return out

    def pose_array(self) -> np.ndarray:
        """(n_frames, 33, 2) array with NaN rows where pose is missing."""
        out = np.full((self.n_frames, POSE_POINT_COUNT, 2), np.nan)
        for i, frame in enumerate(self.frames):
            if frame.pose is not None:
                out[i] = frame.pose
        return out


def detection_coverage(bundle: LandmarkBundle, subsystem: str) -> float:
    """Fraction of frames where the given subsystem ("face" or "pose") is present."""
    if subsystem not in ("face", "pose"):
        raise ValueError(f"subsystem must be 'face' or 'pose', got {subsystem!r}")
    present = sum(1 for frame in bundle.frames if getattr(frame, subsystem) is not None)
    return present / bundle.n_frames


def parse_bundle(raw: bytes | str) -> LandmarkBundle:
    """Parse and validate a landmark bundle from raw JSON content."""
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed bundle JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("bundle must be a JSON object")
    missing = {"video_id", "view", "fps", "frames"} - doc.keys()
    if missing:
        raise SchemaError(f"bundle missing fields: {sorted(missing)}")
    try:
        view = View(doc["view"])
    except ValueError:
        raise SchemaError(f"view must be 'source' or 'edited', got {doc['view']!r}") from None
    raw_frames = doc["frames"]
    if not isinstance(raw_frames, list):
        raise SchemaError("frames must be a list")
    frames = []
    for entry in raw_frames:
        if not isinstance(entry, dict) or "frame_index" not in entry:
            raise SchemaError("each frame must be an object with a frame_index")
        frames.append(
            LandmarkFrame(
                frame_index=entry["frame_index"],
                face=entry.get("face"),
                pose=entry.get("pose"),
            )
        )
    return LandmarkBundle(
        video_id=str(doc["video_id"]),
        view=view,
        fps=float(doc["fps"]),
        frames=tuple(frames),
    )


def serialize_bundle(bundle: LandmarkBundle) -> bytes:
    """Serialize a bundle to canonical JSON bytes (deterministic)."""
    doc = {
        "video_id": bundle.video_id,
        "view": bundle.view.value,
        "fps": bundle.fps,
        "frames": [
            {
                "frame_index": frame.frame_index,
                "face": None if frame.face is None else frame.face.tolist(),
                "pose": None if frame.pose is None else frame.pose.tolist(),
            }
            for frame in bundle.frames
        ],
    }
    return (json.dumps(doc, separators=(",", ":")) + "\n").encode("utf-8")


def load_bundle(path: str | Path) -> LandmarkBundle:
    return parse_bundle(Path(path).read_bytes())


def write_bundle(bundle: LandmarkBundle, path: str | Path) -> None:
    Path(path).write_bytes(serialize_bundle(bundle))


@dataclass(frozen=True)
class PairRecord:
    """A frame-aligned (source, edited) bundle pair."""

    pair_id: str
    source: LandmarkBundle
    edited: LandmarkBundle
    kind: PairKind = PairKind.EDITED

    def __post_init__(self):
        object.__setattr__(self, "kind", PairKind(self.kind))
        if self.source.n_frames != self.edited.n_frames:
            raise SchemaError(
                f"pair {self.pair_id}: views differ in length "
                f"({self.source.n_frames} vs {self.edited.n_frames})"
            )

    @property
    def n_frames(self) -> int:
        return self.source.n_frames


def load_pair(path: str | Path) -> PairRecord:
    """Load a pair record file, resolving bundle paths relative to it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_bytes())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: malformed pair JSON: {exc}") from exc
    missing = {"pair_id", "kind", "source", "edited"} - doc.keys()
    if missing:
        raise SchemaError(f"{path}: pair record missing fields: {sorted(missing)}")
    source = load_bundle(path.parent / doc["source"])
    edited = load_bundle(path.parent / doc["edited"])
    if source.view is not View.SOURCE:
        raise SchemaError(f"{path}: source bundle has view={source.view.value!r}")
    if edited.view is not View.EDITED:
        raise SchemaError(f"{path}: edited bundle has view={edited.view.value!r}")
    try:
        kind = PairKind(doc["kind"])
    except ValueError:
        raise SchemaError(f"{path}: unknown pair kind {doc['kind']!r}") from None
    return PairRecord(pair_id=str(doc["pair_id"]), source=source, edited=edited, kind=kind)


def write_pair(pair: PairRecord, directory: str | Path) -> Path:
    """Write both bundles plus the pair record into a directory.

    Returns the path of the pair record file.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    source_name = f"{pair.pair_id}.source.json"
    edited_name = f"{pair.pair_id}.edited.json"
    write_bundle(pair.source, directory / source_name)
    write_bundle(pair.edited, directory / edited_name)
    record = {
        "pair_id": pair.pair_id,
        "kind": pair.kind.value,
        "source": source_name,
        "edited": edited_name,
    }
    record_path = directory / f"{pair.pair_id}.pair.json"
    record_path.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
    return record_path
