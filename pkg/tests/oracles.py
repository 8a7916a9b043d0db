"""Independent oracles: deliberately naive re-computations of every formula.

These never share code with the library paths they check.  Channel oracles
are pure per-frame Python arithmetic; DSP oracles are explicit per-window
least-squares solves and textbook covariance sums; metric oracles are plain
loops over embedding rows.
"""

from __future__ import annotations

import math

import numpy as np

MOUTH_PAIRS = ((13, 14), (82, 87), (312, 317), (0, 17))


def dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def mar_frame(face) -> float:
    vertical = sum(dist(face[u], face[d]) for u, d in MOUTH_PAIRS) / 4.0
    return vertical / dist(face[61], face[291])


def gaze_frame(face) -> tuple[float, float]:
    def one_eye(iris, inner, outer, upper, lower):
        gx = 2.0 * (face[iris][0] - face[inner][0]) / (face[outer][0] - face[inner][0]) - 1.0
        gy = 2.0 * (face[iris][1] - face[upper][1]) / (face[lower][1] - face[upper][1]) - 1.0
        return gx, gy

    right = one_eye(468, 133, 33, 159, 145)
    left = one_eye(473, 362, 263, 386, 374)
    return (right[0] + left[0]) / 2.0, (right[1] + left[1]) / 2.0


def blink_frame(face) -> float:
    ear_right = dist(face[159], face[145]) / dist(face[33], face[133])
    ear_left = dist(face[386], face[374]) / dist(face[263], face[362])
    return -0.5 * (ear_right + ear_left)


def pose_frame(pose) -> tuple[float, float, float, float, float, float]:
    def angle_of(vec):
        return math.atan2(vec[1], vec[0])

    def interior(center, end_a, end_b):
        ax, ay = end_a[0] - center[0], end_a[1] - center[1]
        bx, by = end_b[0] - center[0], end_b[1] - center[1]
        cos = (ax * bx + ay * by) / (math.hypot(ax, ay) * math.hypot(bx, by))
        return math.acos(max(-1.0, min(1.0, cos)))

    shoulder = angle_of((pose[12][0] - pose[11][0], pose[12][1] - pose[11][1]))
    sh_mid = ((pose[11][0] + pose[12][0]) / 2.0, (pose[11][1] + pose[12][1]) / 2.0)
    hip_mid = ((pose[23][0] + pose[24][0]) / 2.0, (pose[23][1] + pose[24][1]) / 2.0)
    torso = angle_of((hip_mid[0] - sh_mid[0], hip_mid[1] - sh_mid[1]))
    elbow_left = interior(pose[13], pose[11], pose[15])
    elbow_right = interior(pose[14], pose[12], pose[16])
    wrist_left = pose[11][1] - pose[15][1]
    wrist_right = pose[12][1] - pose[16][1]
    return shoulder, torso, elbow_left, elbow_right, wrist_left, wrist_right


def interp_gaps(values) -> list[float]:
    """Per-gap two-point line equation; edges extend the nearest valid value."""
    values = list(values)
    n = len(values)
    valid = [i for i in range(n) if not math.isnan(values[i])]
    out = list(values)
    for i in range(n):
        if not math.isnan(values[i]):
            continue
        prev = max((j for j in valid if j < i), default=None)
        nxt = min((j for j in valid if j > i), default=None)
        if prev is None:
            out[i] = values[nxt]
        elif nxt is None:
            out[i] = values[prev]
        else:
            out[i] = values[prev] + (i - prev) * (values[nxt] - values[prev]) / (nxt - prev)
    return out


def savgol(values, window: int, order: int) -> np.ndarray:
    """Per-window polynomial regression in local coordinates.

    Interior samples use the centered window; boundary samples reuse the
    first/last full window with the fit evaluated at the sample's offset.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    if window <= 1:
        return x.copy()
    half = window // 2
    out = np.empty(n)
    for i in range(n):
        start = min(max(i - half, 0), n - window)
        tau = np.arange(start, start + window, dtype=float) - i
        coeffs = np.polyfit(tau, x[start : start + window], order)
        out[i] = coeffs[-1]
    return out


def pearson(a, b) -> float:
    n = len(a)
    mean_a = sum(a) / n
    mean_b = sum(b) / n
    cov = sum((x - mean_a) * (y - mean_b) for x, y in zip(a, b))
    var_a = sum((x - mean_a) ** 2 for x in a)
    var_b = sum((y - mean_b) ** 2 for y in b)
    return cov / math.sqrt(var_a * var_b)


def unit(vec) -> list[float]:
    norm = math.sqrt(sum(x * x for x in vec))
    return [x / norm for x in vec]


def dot(a, b) -> float:
    return sum(x * y for x, y in zip(a, b))


def directional_score(src_frames, edit_frames, reference) -> float:
    ref = unit(reference)
    values = []
    for src, edit in zip(src_frames, edit_frames):
        diff = [e - s for e, s in zip(edit, src)]
        norm = math.sqrt(sum(x * x for x in diff))
        if norm < 1e-9:
            continue
        values.append(dot([x / norm for x in diff], ref))
    return sum(values) / len(values)


def text_align_score(edit_frames, text_target) -> float:
    target = unit(text_target)
    values = [dot(unit(frame), target) for frame in edit_frames]
    return sum(values) / len(values)


def face_similarity_score(face_frames, face_key) -> float:
    key = unit(face_key)
    values = []
    for row in face_frames:
        if any(math.isnan(x) for x in row):
            continue
        values.append(dot(unit(row), key))
    return sum(values) / len(values)
