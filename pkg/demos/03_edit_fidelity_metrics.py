"""Compute the embedding-based evaluation metrics on toy bundles.

Embeddings normally come from external encoders; here they are synthetic
vectors constructed so each metric's behavior is visible: a consistent
edit direction, a drifting one, and one with missing face detections.
"""

import numpy as np

from syncurator import (
    EmbeddingBundle,
    aggregate_reports,
    compute_metrics,
    load_embedding_bundle,
    write_embedding_bundle,
)

rng = np.random.default_rng(0)
DIM, FACE_DIM, FRAMES = 32, 16, 8


def bundle_with_drift(pair_id: str, drift: float) -> EmbeddingBundle:
    """Per-frame edits follow the key direction plus `drift` worth of noise."""
    src = rng.normal(size=(FRAMES, DIM))
    direction = rng.normal(size=DIM)
    steps = rng.uniform(0.5, 1.5, size=FRAMES)[:, None]
    edit = src + steps * direction + drift * rng.normal(size=(FRAMES, DIM))
    face = rng.normal(size=FACE_DIM)
    faces = face + 0.1 * rng.normal(size=(FRAMES, FACE_DIM))
    faces[FRAMES // 2] = np.nan  # one dropped detection
    return EmbeddingBundle(
        pair_id=pair_id,
        src_frames=src,
        edit_frames=edit,
        key=src[0] + direction,
        src_first=src[0],
        face_edit_frames=faces,
        face_key=face,
        text_source=rng.normal(size=DIM),
        text_target=direction + 0.2 * rng.normal(size=DIM),
        model={"image": "toy-encoder", "face": "toy-face", "text": "toy-encoder"},
    )


reports = []
for pair_id, drift in (("consistent", 0.05), ("drifting", 1.5)):
    report = compute_metrics(bundle_with_drift(pair_id, drift))
    reports.append(report)
    print(f"\n{pair_id} (drift={drift}):")
    print(f"  directional CLIP (image):     {report.directional_clip_image:+.4f}")
    print(f"  directional CLIP (text-dual): {report.directional_clip_text_dual:+.4f}")
    print(f"  CLIP-text alignment:          {report.clip_text_align:+.4f}")
    print(f"  face similarity:              {report.arcface_sim:+.4f}")
    print(f"  frames skipped / faces missing: {report.frames_skipped} / {report.faces_missing}")

print("\nbenchmark aggregate (unweighted mean over pairs):")
for name, value in aggregate_reports(reports).items():
    print(f"  {name}: {value:+.4f}")

# Bundles round-trip through both file layouts.
import tempfile
from pathlib import Path

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "pair.emb.json"
    write_embedding_bundle(bundle_with_drift("roundtrip", 0.1), path, layout="sidecar")
    loaded = load_embedding_bundle(path)
    print(f"\nsidecar round trip: {loaded.pair_id}, {loaded.n_frames} frames, "
          f"payload={path.name}.bin")
