"""Embedding-based evaluation metrics over externally supplied vectors.

All metrics are deterministic cosine arithmetic on an
:class:`EmbeddingBundle`; no encoder model is ever run here.

* directional (image): mean cosine between per-frame edit directions
  ``unit(E(edit_t) - E(src_t))`` and the global direction
  ``unit(E(key) - E(src_0))``
* directional (text-dual): same per-frame directions against
  ``unit(E_text(target) - E_text(source))``
* text alignment: mean cosine between each edited frame embedding and the
  target text embedding
* face similarity: mean cosine between each frame's face embedding and the
  keyframe face embedding, skipping frames with no face detection

Frames whose per-frame difference norm is below 1e-9 are skipped and
counted (an unedited frame carries no direction evidence).

Bundle file layouts: ``inline`` (arrays embedded in the JSON document,
missing face rows as null) and ``sidecar`` (JSON header plus a row-major
little-endian float32 payload, missing face rows as NaN).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .channels import Channel
from .curation import pair_channel_correlations
from .dsp import DspConfig
from .errors import (
    AllFramesSkipped,
    MissingTextEmbeddings,
    NoFacesDetected,
    ParseError,
    SchemaError,
    UndefinedDirection,
)
from .jsonio import canonical_json_bytes
from .landmarks import PairRecord

DIRECTION_EPS = 1e-9

FORMAT_TAG = "embeddings/v1"


def _vector(values, dim: int | None, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise SchemaError(f"{name} must be a 1-D vector")
    if dim is not None and arr.size != dim:
        raise SchemaError(f"{name} has dim {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


def _matrix(values, dim: int | None, name: str, allow_missing_rows: bool = False) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise SchemaError(f"{name} must be a (frames, dim) matrix with at least one row")
    if dim is not None and arr.shape[1] != dim:
        raise SchemaError(f"{name} has dim {arr.shape[1]}, expected {dim}")
    row_nan = np.isnan(arr).any(axis=1)
    row_all_nan = np.isnan(arr).all(axis=1)
    if allow_missing_rows:
        if np.any(row_nan & ~row_all_nan):
            raise SchemaError(f"{name}: rows must be fully present or fully missing")
        if not np.all(np.isfinite(arr[~row_nan])):
            raise SchemaError(f"{name} contains non-finite values")
    elif not np.all(np.isfinite(arr)):
        raise SchemaError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EmbeddingBundle:
    """Per-frame and key embeddings for one evaluation pair.

    ``face_edit_frames`` rows that are entirely NaN mark frames where face
    detection failed; image embeddings must be present for every frame.
    """

    pair_id: str
    src_frames: np.ndarray
    edit_frames: np.ndarray
    key: np.ndarray
    src_first: np.ndarray
    face_edit_frames: np.ndarray
    face_key: np.ndarray
    text_source: np.ndarray | None = None
    text_target: np.ndarray | None = None
    model: dict | None = None

    def __post_init__(self):
        src = _matrix(self.src_frames, None, "src_frames")
        dim = src.shape[1]
        object.__setattr__(self, "src_frames", src)
        object.__setattr__(self, "edit_frames", _matrix(self.edit_frames, dim, "edit_frames"))
        if self.edit_frames.shape[0] != src.shape[0]:
            raise SchemaError("src_frames and edit_frames disagree in frame count")
        object.__setattr__(self, "key", _vector(self.key, dim, "key"))
        object.__setattr__(self, "src_first", _vector(self.src_first, dim, "src_first"))
        faces = _matrix(self.face_edit_frames, None, "face_edit_frames", allow_missing_rows=True)
        if faces.shape[0] != src.shape[0]:
            raise SchemaError("face_edit_frames and src_frames disagree in frame count")
        object.__setattr__(self, "face_edit_frames", faces)
        object.__setattr__(self, "face_key", _vector(self.face_key, faces.shape[1], "face_key"))
        # Text embeddings live in the encoders' joint space: same dim as images.
        for name in ("text_source", "text_target"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _vector(value, dim, name))

    @property
    def n_frames(self) -> int:
        return self.src_frames.shape[0]


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def _bounded(value: float) -> float:
    # Cosine means can exceed +/-1 by an ulp on identical vectors.
    return min(1.0, max(-1.0, value))


def _frame_directions(bundle: EmbeddingBundle) -> tuple[np.ndarray, np.ndarray]:
    """Unit per-frame edit directions and the skip mask for near-zero diffs."""
    diffs = bundle.edit_frames - bundle.src_frames
    norms = np.linalg.norm(diffs, axis=1)
    skipped = norms < DIRECTION_EPS
    if np.all(skipped):
        raise AllFramesSkipped(
            f"{bundle.pair_id}: all {bundle.n_frames} frames have near-zero edit difference"
        )
    directions = diffs[~skipped] / norms[~skipped, None]
    return directions, skipped


def directional_clip_image(bundle: EmbeddingBundle) -> float:
    """Mean cosine between per-frame edit directions and the key-frame direction."""
    global_diff = bundle.key - bundle.src_first
    norm = np.linalg.norm(global_diff)
    if norm < DIRECTION_EPS:
        raise UndefinedDirection(
            f"{bundle.pair_id}: key and first source frame embeddings coincide"
        )
    directions, _ = _frame_directions(bundle)
    return _bounded(float(np.mean(directions @ (global_diff / norm))))


def directional_clip_text_dual(bundle: EmbeddingBundle) -> float:
    """Mean cosine between per-frame edit directions and the text edit direction."""
    if bundle.text_source is None or bundle.text_target is None:
        raise MissingTextEmbeddings(f"{bundle.pair_id}: text embeddings absent")
    text_diff = bundle.text_target - bundle.text_source
    norm = np.linalg.norm(text_diff)
    if norm < DIRECTION_EPS:
        raise UndefinedDirection(f"{bundle.pair_id}: text embeddings coincide")
    directions, _ = _frame_directions(bundle)
    return _bounded(float(np.mean(directions @ (text_diff / norm))))


def clip_text_align(bundle: EmbeddingBundle) -> float:
    """Mean cosine between each edited frame embedding and the target text."""
    if bundle.text_target is None:
        raise MissingTextEmbeddings(f"{bundle.pair_id}: target text embedding absent")
    frames = bundle.edit_frames / np.linalg.norm(bundle.edit_frames, axis=1, keepdims=True)
    return _bounded(float(np.mean(frames @ _unit(bundle.text_target))))


def arcface_similarity(bundle: EmbeddingBundle) -> float:
    """Mean cosine between per-frame face embeddings and the keyframe face."""
    present = ~np.isnan(bundle.face_edit_frames).all(axis=1)
    if not np.any(present):
        raise NoFacesDetected(f"{bundle.pair_id}: no frame has a face embedding")
    faces = bundle.face_edit_frames[present]
    faces = faces / np.linalg.norm(faces, axis=1, keepdims=True)
    return _bounded(float(np.mean(faces @ _unit(bundle.face_key))))


def eval_sync(pair: PairRecord, cfg: DspConfig = DspConfig()) -> dict[Channel, float]:
    """The four synchronization correlations, identical to the curation path."""
    return pair_channel_correlations(pair, cfg)


@dataclass(frozen=True)
class MetricReport:
    """All edit-fidelity and identity metrics for one pair.

    Metrics that cannot be computed from the supplied bundle are None with
    the cause recorded in ``unavailable``.
    """

    pair_id: str
    directional_clip_image: float | None
    directional_clip_text_dual: float | None
    clip_text_align: float | None
    arcface_sim: float | None
    frames_skipped: int
    faces_missing: int
    unavailable: dict[str, str] = field(default_factory=dict)
    per_frame: dict[str, list] | None = None

    METRIC_NAMES = (
        "directional_clip_image",
        "directional_clip_text_dual",
        "clip_text_align",
        "arcface_sim",
    )

    def to_dict(self) -> dict:
        doc = {
            "pair_id": self.pair_id,
            "directional_clip_image": self.directional_clip_image,
            "directional_clip_text_dual": self.directional_clip_text_dual,
            "clip_text_align": self.clip_text_align,
            "arcface_sim": self.arcface_sim,
            "frames_skipped": self.frames_skipped,
            "faces_missing": self.faces_missing,
            "unavailable": self.unavailable,
        }
        if self.per_frame is not None:
            doc["per_frame"] = self.per_frame
        return doc


def compute_metrics(bundle: EmbeddingBundle, per_frame: bool = False) -> MetricReport:
    """Evaluate every metric, mapping declared per-metric errors to None."""
    values: dict[str, float | None] = {}
    unavailable: dict[str, str] = {}
    operations = {
        "directional_clip_image": directional_clip_image,
        "directional_clip_text_dual": directional_clip_text_dual,
        "clip_text_align": clip_text_align,
        "arcface_sim": arcface_similarity,
    }
    for name, op in operations.items():
        try:
            values[name] = op(bundle)
        except (MissingTextEmbeddings, UndefinedDirection, AllFramesSkipped, NoFacesDetected) as exc:
            values[name] = None
            unavailable[name] = str(exc)

    diffs = bundle.edit_frames - bundle.src_frames
    skipped = np.linalg.norm(diffs, axis=1) < DIRECTION_EPS
    missing_faces = np.isnan(bundle.face_edit_frames).all(axis=1)

    traces = None
    if per_frame:
        traces = _per_frame_traces(bundle, skipped, missing_faces)

    return MetricReport(
        pair_id=bundle.pair_id,
        directional_clip_image=values["directional_clip_image"],
        directional_clip_text_dual=values["directional_clip_text_dual"],
        clip_text_align=values["clip_text_align"],
        arcface_sim=values["arcface_sim"],
        frames_skipped=int(np.count_nonzero(skipped)),
        faces_missing=int(np.count_nonzero(missing_faces)),
        unavailable=unavailable,
        per_frame=traces,
    )


def _per_frame_traces(
    bundle: EmbeddingBundle, skipped: np.ndarray, missing_faces: np.ndarray
) -> dict[str, list]:
    diffs = bundle.edit_frames - bundle.src_frames
    norms = np.linalg.norm(diffs, axis=1)
    traces: dict[str, list] = {}

    def direction_trace(reference: np.ndarray) -> list:
        ref = _unit(reference)
        out = []
        for t in range(bundle.n_frames):
            out.append(None if skipped[t] else float(diffs[t] @ ref / norms[t]))
        return out

    global_diff = bundle.key - bundle.src_first
    if np.linalg.norm(global_diff) >= DIRECTION_EPS:
        traces["directional_clip_image"] = direction_trace(global_diff)
    if bundle.text_source is not None and bundle.text_target is not None:
        text_diff = bundle.text_target - bundle.text_source
        if np.linalg.norm(text_diff) >= DIRECTION_EPS:
            traces["directional_clip_text_dual"] = direction_trace(text_diff)
    if bundle.text_target is not None:
        target = _unit(bundle.text_target)
        frames = bundle.edit_frames / np.linalg.norm(bundle.edit_frames, axis=1, keepdims=True)
        traces["clip_text_align"] = [float(v) for v in frames @ target]
    face_key = _unit(bundle.face_key)
    arc = []
    for t in range(bundle.n_frames):
        if missing_faces[t]:
            arc.append(None)
        else:
            row = bundle.face_edit_frames[t]
            arc.append(float(row @ face_key / np.linalg.norm(row)))
    traces["arcface_sim"] = arc
    return traces


def aggregate_reports(reports: Sequence[MetricReport]) -> dict[str, float | None]:
    """Unweighted mean of each metric over pairs (pair_id order), None-skipping."""
    ordered = sorted(reports, key=lambda r: r.pair_id)
    out: dict[str, float | None] = {}
    for name in MetricReport.METRIC_NAMES:
        values = [getattr(r, name) for r in ordered if getattr(r, name) is not None]
        out[name] = float(np.mean(values)) if values else None
    return out


def embedding_bundle_bytes(bundle: EmbeddingBundle, layout: str = "inline") -> bytes:
    """Serialize the JSON document (header or full inline bundle)."""
    if layout != "inline":
        raise ValueError("use write_embedding_bundle for sidecar layout")
    faces = [
        None if np.isnan(row).all() else row.tolist() for row in bundle.face_edit_frames
    ]
    doc = {
        "pair_id": bundle.pair_id,
        "format": FORMAT_TAG,
        "layout": "inline",
        "n_frames": bundle.n_frames,
        "image_dim": bundle.src_frames.shape[1],
        "face_dim": bundle.face_edit_frames.shape[1],
        "text_dim": None if bundle.text_target is None else int(bundle.text_target.size),
        "model": bundle.model,
        "src_frames": bundle.src_frames.tolist(),
        "edit_frames": bundle.edit_frames.tolist(),
        "key": bundle.key.tolist(),
        "src_first": bundle.src_first.tolist(),
        "face_edit_frames": faces,
        "face_key": bundle.face_key.tolist(),
        "text_source": None if bundle.text_source is None else bundle.text_source.tolist(),
        "text_target": None if bundle.text_target is None else bundle.text_target.tolist(),
    }
    return canonical_json_bytes(doc, indent=None)


def write_embedding_bundle(
    bundle: EmbeddingBundle, path: str | Path, layout: str = "inline"
) -> None:
    """Write a bundle as inline JSON or JSON header + float32 LE sidecar."""
    path = Path(path)
    if layout == "inline":
        path.write_bytes(embedding_bundle_bytes(bundle))
        return
    if layout != "sidecar":
        raise ValueError(f"unknown layout {layout!r}")

    sections: dict[str, dict] = {}
    chunks: list[np.ndarray] = []
    offset = 0

    def add(name: str, arr: np.ndarray) -> None:
        nonlocal offset
        data = np.ascontiguousarray(arr, dtype="<f4")
        sections[name] = {"offset": offset, "shape": list(data.shape)}
        chunks.append(data)
        offset += data.nbytes

    add("src_frames", bundle.src_frames)
    add("edit_frames", bundle.edit_frames)
    add("key", bundle.key)
    add("src_first", bundle.src_first)
    add("face_edit_frames", bundle.face_edit_frames)
    add("face_key", bundle.face_key)
    if bundle.text_source is not None:
        add("text_source", bundle.text_source)
    if bundle.text_target is not None:
        add("text_target", bundle.text_target)

    payload_name = path.name + ".bin"
    header = {
        "pair_id": bundle.pair_id,
        "format": FORMAT_TAG,
        "layout": "sidecar",
        "payload": payload_name,
        "dtype": "float32",
        "byte_order": "little",
        "n_frames": bundle.n_frames,
        "image_dim": bundle.src_frames.shape[1],
        "face_dim": bundle.face_edit_frames.shape[1],
        "text_dim": None if bundle.text_target is None else int(bundle.text_target.size),
        "model": bundle.model,
        "sections": sections,
    }
    (path.parent / payload_name).write_bytes(b"".join(chunk.tobytes() for chunk in chunks))
    path.write_bytes(canonical_json_bytes(header))


def load_embedding_bundle(path: str | Path) -> EmbeddingBundle:
    """Load an embedding bundle file in either layout."""
    path = Path(path)
    try:
        doc = json.loads(path.read_bytes())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: malformed embedding JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG:
        raise SchemaError(f"{path}: not an {FORMAT_TAG} document")
    layout = doc.get("layout", "inline")

    if layout == "inline":
        faces = [
            [np.nan] * doc["face_dim"] if row is None else row
            for row in doc["face_edit_frames"]
        ]
        return EmbeddingBundle(
            pair_id=doc["pair_id"],
            src_frames=doc["src_frames"],
            edit_frames=doc["edit_frames"],
            key=doc["key"],
            src_first=doc["src_first"],
            face_edit_frames=faces,
            face_key=doc["face_key"],
            text_source=doc.get("text_source"),
            text_target=doc.get("text_target"),
            model=doc.get("model"),
        )

    if layout != "sidecar":
        raise SchemaError(f"{path}: unknown layout {layout!r}")
    if doc.get("byte_order") != "little" or doc.get("dtype") != "float32":
        raise SchemaError(f"{path}: sidecar must declare little-endian float32")
    payload = (path.parent / doc["payload"]).read_bytes()

    def section(name: str) -> np.ndarray:
        info = doc["sections"][name]
        shape = tuple(info["shape"])
        count = int(np.prod(shape))
        start = info["offset"]
        arr = np.frombuffer(payload, dtype="<f4", count=count, offset=start)
        return arr.reshape(shape).astype(np.float64)

    has_text = "text_source" in doc["sections"], "text_target" in doc["sections"]
    return EmbeddingBundle(
        pair_id=doc["pair_id"],
        src_frames=section("src_frames"),
        edit_frames=section("edit_frames"),
        key=section("key"),
        src_first=section("src_first"),
        face_edit_frames=section("face_edit_frames"),
        face_key=section("face_key"),
        text_source=section("text_source") if has_text[0] else None,
        text_target=section("text_target") if has_text[1] else None,
        model=doc.get("model"),
    )
