"""Shared builders for landmark bundles and channel signals."""

from __future__ import annotations

import numpy as np
import pytest

from syncurator import (
    Channel,
    ChannelSignal,
    LandmarkBundle,
    LandmarkFrame,
    Stage,
    View,
)
from syncurator.landmarks import FACE_POINT_COUNT, POSE_POINT_COUNT


def make_bundle(
    faces,
    poses=None,
    video_id: str = "test",
    view: View = View.SOURCE,
    fps: float = 20.0,
) -> LandmarkBundle:
    """Bundle from per-frame (478,2)/None faces and (33,2)/None poses."""
    if poses is None:
        poses = [None] * len(faces)
    frames = tuple(
        LandmarkFrame(i, face=face, pose=pose)
        for i, (face, pose) in enumerate(zip(faces, poses))
    )
    return LandmarkBundle(video_id=video_id, view=view, fps=fps, frames=frames)


def random_bundle(
    seed: int,
    n_frames: int = 12,
    face_missing=(),
    pose_missing=(),
    view: View = View.SOURCE,
    video_id: str = "rand",
) -> LandmarkBundle:
    """Bundle with uniformly random landmarks; geometry non-degenerate a.s."""
    rng = np.random.default_rng(seed)
    faces = []
    poses = []
    for i in range(n_frames):
        faces.append(None if i in face_missing else rng.uniform(0.1, 0.9, (FACE_POINT_COUNT, 2)))
        poses.append(None if i in pose_missing else rng.uniform(0.1, 0.9, (POSE_POINT_COUNT, 2)))
    return make_bundle(faces, poses, video_id=video_id, view=view)


def signal(values, stage=Stage.NORMALIZED, channel=Channel.SPEECH, component="mar"):
    return ChannelSignal(channel, component, np.asarray(values, dtype=float), stage=stage)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
