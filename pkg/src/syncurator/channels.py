"""Motion-channel signal extraction from landmark bundles.

Four channels capture complementary talking-head dynamics:

* speech  - mouth aspect ratio (MAR): mean vertical lip separation over
  mouth width
* gaze    - iris position normalized to the eye box, averaged over both
  eyes, as (x, y) components
* blink   - eye aspect ratio (EAR) averaged over both eyes and negated so
  closures are positive peaks
* pose    - six upper-body geometric features (shoulder orientation, torso
  inclination, two elbow angles, two relative wrist heights)

All extractors return one value per frame, NaN where the required
detections are absent or the geometry is degenerate (a DegenerateGeometry
warning is emitted for the latter).  Values are pure per-frame arithmetic
on the landmark coordinates; smoothing and normalization live in
:mod:`syncurator.dsp`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import landmarks as lm
from .errors import DegenerateGeometry
from .landmarks import LandmarkBundle

EXTENT_EPS = 1e-9


class Channel(str, Enum):
    SPEECH = "speech"
    GAZE = "gaze"
    BLINK = "blink"
    POSE = "pose"


class Stage(str, Enum):
    RAW = "raw"
    INTERPOLATED = "interpolated"
    SMOOTHED = "smoothed"
    NORMALIZED = "normalized"


STAGE_ORDER = {Stage.RAW: 0, Stage.INTERPOLATED: 1, Stage.SMOOTHED: 2, Stage.NORMALIZED: 3}


@dataclass(frozen=True)
class ChannelSignal:
    """A named per-frame scalar series for one channel component.

    ``circular`` marks wraparound-prone angle series that must be unwrapped
    before smoothing and correlation.
    """

    channel: Channel
    component: str
    values: np.ndarray
    stage: Stage = Stage.RAW
    circular: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("signal values must be a non-empty 1-D array")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "channel", Channel(self.channel))
        object.__setattr__(self, "stage", Stage(self.stage))

    def __len__(self) -> int:
        return self.values.size

    @property
    def valid_fraction(self) -> float:
        return float(np.count_nonzero(~np.isnan(self.values))) / self.values.size

    def advanced(self, values: np.ndarray, stage: Stage) -> "ChannelSignal":
        """New signal with replaced values at a strictly later stage."""
        if STAGE_ORDER[Stage(stage)] <= STAGE_ORDER[self.stage]:
            raise ValueError(f"stage may only advance: {self.stage.value} -> {Stage(stage).value}")
        return replace(self, values=values, stage=stage)


@dataclass(frozen=True)
class ChannelSet:
    """All ten component signals for one view."""

    speech: ChannelSignal
    gaze: tuple[ChannelSignal, ChannelSignal]
    blink: ChannelSignal
    pose: tuple[ChannelSignal, ...]

    def __post_init__(self):
        if len(self.gaze) != 2:
            raise ValueError("gaze must have exactly 2 components")
        if len(self.pose) != 6:
            raise ValueError("pose must have exactly 6 components")
        lengths = {len(sig) for sig in self.components()}
        if len(lengths) != 1:
            raise ValueError(f"component signals disagree in length: {sorted(lengths)}")

    def components(self) -> tuple[ChannelSignal, ...]:
        return (self.speech, *self.gaze, self.blink, *self.pose)

    def by_channel(self, channel: Channel) -> tuple[ChannelSignal, ...]:
        channel = Channel(channel)
        if channel is Channel.SPEECH:
            return (self.speech,)
        if channel is Channel.GAZE:
            return self.gaze
        if channel is Channel.BLINK:
            return (self.blink,)
        return self.pose


def _warn_degenerate(component: str, mask: np.ndarray) -> None:
    frames = np.flatnonzero(mask)
    if frames.size:
        shown = ", ".join(map(str, frames[:8]))
        more = "" if frames.size <= 8 else f" (+{frames.size - 8} more)"
        warnings.warn(
            f"{component}: degenerate geometry at frame(s) {shown}{more}; values set missing",
            DegenerateGeometry,
            stacklevel=3,
        )


def _distances(points: np.ndarray, i: int, j: int) -> np.ndarray:
    return np.linalg.norm(points[:, i, :] - points[:, j, :], axis=1)


def speech_signal(bundle: LandmarkBundle) -> ChannelSignal:
    """Mouth aspect ratio per frame.

    MAR = mean distance of the four vertical lip pairs / mouth-corner width.
    """
    face = bundle.face_array()
    upper = [pair[0] for pair in lm.MOUTH_VERTICAL_PAIRS]
    lower = [pair[1] for pair in lm.MOUTH_VERTICAL_PAIRS]
    vertical = np.linalg.norm(face[:, upper, :] - face[:, lower, :], axis=2).mean(axis=1)
    width = _distances(face, lm.MOUTH_CORNER_LEFT, lm.MOUTH_CORNER_RIGHT)
    degenerate = width < EXTENT_EPS
    with np.errstate(invalid="ignore", divide="ignore"):
        mar = vertical / width
    mar[degenerate] = np.nan
    _warn_degenerate("speech/mar", degenerate)
    return ChannelSignal(Channel.SPEECH, "mar", mar)


def _eye_gaze(face, iris, inner, outer, upper, lower, label):
    """Per-eye normalized iris position: -1 at inner/upper edge, +1 at outer/lower."""
    x_extent = face[:, outer, 0] - face[:, inner, 0]
    y_extent = face[:, lower, 1] - face[:, upper, 1]
    degenerate = (np.abs(x_extent) < EXTENT_EPS) | (np.abs(y_extent) < EXTENT_EPS)
    with np.errstate(invalid="ignore", divide="ignore"):
        gx = 2.0 * (face[:, iris, 0] - face[:, inner, 0]) / x_extent - 1.0
        gy = 2.0 * (face[:, iris, 1] - face[:, upper, 1]) / y_extent - 1.0
    gx[degenerate] = np.nan
    gy[degenerate] = np.nan
    _warn_degenerate(f"gaze/{label}", degenerate)
    return gx, gy


def gaze_signal(bundle: LandmarkBundle) -> tuple[ChannelSignal, ChannelSignal]:
    """Normalized gaze components (x, y), arithmetic mean over both eyes."""
    face = bundle.face_array()
    rgx, rgy = _eye_gaze(
        face,
        lm.RIGHT_IRIS_CENTER,
        lm.RIGHT_EYE_INNER,
        lm.RIGHT_EYE_OUTER,
        lm.RIGHT_EYE_UPPER,
        lm.RIGHT_EYE_LOWER,
        "right_eye",
    )
    lgx, lgy = _eye_gaze(
        face,
        lm.LEFT_IRIS_CENTER,
        lm.LEFT_EYE_INNER,
        lm.LEFT_EYE_OUTER,
        lm.LEFT_EYE_UPPER,
        lm.LEFT_EYE_LOWER,
        "left_eye",
    )
    gx = (rgx + lgx) / 2.0
    gy = (rgy + lgy) / 2.0
    return (
        ChannelSignal(Channel.GAZE, "gaze_x", gx),
        ChannelSignal(Channel.GAZE, "gaze_y", gy),
    )


def blink_signal(bundle: LandmarkBundle) -> ChannelSignal:
    """Negated mean eye aspect ratio; blinks show as positive peaks."""
    face = bundle.face_array()
    right_h = _distances(face, lm.RIGHT_EYE_OUTER, lm.RIGHT_EYE_INNER)
    left_h = _distances(face, lm.LEFT_EYE_OUTER, lm.LEFT_EYE_INNER)
    degenerate = (right_h < EXTENT_EPS) | (left_h < EXTENT_EPS)
    with np.errstate(invalid="ignore", divide="ignore"):
        ear_right = _distances(face, lm.RIGHT_EYE_UPPER, lm.RIGHT_EYE_LOWER) / right_h
        ear_left = _distances(face, lm.LEFT_EYE_UPPER, lm.LEFT_EYE_LOWER) / left_h
    signal = -0.5 * (ear_right + ear_left)
    signal[degenerate] = np.nan
    _warn_degenerate("blink/ear", degenerate)
    return ChannelSignal(Channel.BLINK, "ear_neg", signal)


def _vector_angle(vec: np.ndarray, component: str) -> np.ndarray:
    """atan2 angle of per-frame vectors, NaN where the norm is near zero."""
    norms = np.linalg.norm(vec, axis=1)
    degenerate = norms < EXTENT_EPS
    angle = np.arctan2(vec[:, 1], vec[:, 0])
    angle[degenerate] = np.nan
    _warn_degenerate(component, degenerate)
    return angle


def _interior_angle(a: np.ndarray, b: np.ndarray, component: str) -> np.ndarray:
    """Interior joint angle in [0, pi] between per-frame vectors a and b."""
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    degenerate = (na < EXTENT_EPS) | (nb < EXTENT_EPS)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.sum(a * b, axis=1) / (na * nb)
    angle = np.arccos(np.clip(cos, -1.0, 1.0))
    angle[degenerate] = np.nan
    _warn_degenerate(component, degenerate)
    return angle


def pose_signals(bundle: LandmarkBundle) -> tuple[ChannelSignal, ...]:
    """Six upper-body features: shoulder/torso angles, elbow angles, wrist heights.

    Angles are in radians; orientation angles use atan2 from the positive-x
    image axis and are marked circular for later unwrapping.
    """
    pose = bundle.pose_array()
    shoulder_vec = pose[:, lm.RIGHT_SHOULDER, :] - pose[:, lm.LEFT_SHOULDER, :]
    shoulder_angle = _vector_angle(shoulder_vec, "pose/shoulder_angle")

    shoulder_mid = (pose[:, lm.LEFT_SHOULDER, :] + pose[:, lm.RIGHT_SHOULDER, :]) / 2.0
    hip_mid = (pose[:, lm.LEFT_HIP, :] + pose[:, lm.RIGHT_HIP, :]) / 2.0
    torso_angle = _vector_angle(hip_mid - shoulder_mid, "pose/torso_angle")

    elbow_left = _interior_angle(
        pose[:, lm.LEFT_SHOULDER, :] - pose[:, lm.LEFT_ELBOW, :],
        pose[:, lm.LEFT_WRIST, :] - pose[:, lm.LEFT_ELBOW, :],
        "pose/elbow_angle_left",
    )
    elbow_right = _interior_angle(
        pose[:, lm.RIGHT_SHOULDER, :] - pose[:, lm.RIGHT_ELBOW, :],
        pose[:, lm.RIGHT_WRIST, :] - pose[:, lm.RIGHT_ELBOW, :],
        "pose/elbow_angle_right",
    )

    wrist_left = pose[:, lm.LEFT_SHOULDER, 1] - pose[:, lm.LEFT_WRIST, 1]
    wrist_right = pose[:, lm.RIGHT_SHOULDER, 1] - pose[:, lm.RIGHT_WRIST, 1]

    return (
        ChannelSignal(Channel.POSE, "shoulder_angle", shoulder_angle, circular=True),
        ChannelSignal(Channel.POSE, "torso_angle", torso_angle, circular=True),
        ChannelSignal(Channel.POSE, "elbow_angle_left", elbow_left),
        ChannelSignal(Channel.POSE, "elbow_angle_right", elbow_right),
        ChannelSignal(Channel.POSE, "wrist_height_left", wrist_left),
        ChannelSignal(Channel.POSE, "wrist_height_right", wrist_right),
    )


def extract_channels(bundle: LandmarkBundle) -> ChannelSet:
    """Extract all four channels (ten component signals) at the raw stage."""
    return ChannelSet(
        speech=speech_signal(bundle),
        gaze=gaze_signal(bundle),
        blink=blink_signal(bundle),
        pose=pose_signals(bundle),
    )


def channel_dump_csv(channels: ChannelSet) -> str:
    """CSV dump of one view's signals for external plotting.

    Columns: frame_index, channel, component, value, missing_flag; missing
    samples have an empty value cell and flag 1.
    """
    lines = ["frame_index,channel,component,value,missing_flag"]
    for sig in channels.components():
        for index, value in enumerate(sig.values):
            missing = math.isnan(value)
            cell = "" if missing else repr(float(value))
            lines.append(
                f"{index},{sig.channel.value},{sig.component},{cell},{int(missing)}"
            )
    return "\n".join(lines) + "\n"


def unwrap_angles(signal: ChannelSignal) -> ChannelSignal:
    """Remove 2*pi discontinuities from a circular angle series (NaN-aware).

    Non-circular signals pass through unchanged.  Applied before smoothing
    so that branch-cut wraparound cannot destroy the correlation.
    """
    if not signal.circular:
        return signal
    values = signal.values.copy()
    valid = ~np.isnan(values)
    if np.count_nonzero(valid) > 1:
        values[valid] = np.unwrap(values[valid])
    return replace(signal, values=values)
