/**
 * Deterministic stand-in backends.
 *
 * They synthesize schema-valid detections and embeddings from the frame
 * index and content alone, so the full extraction pipeline (crops, bundle
 * files, sidecar logs, payload layout) can run and be tested end to end on
 * machines without model weights.  Identical options produce identical
 * outputs.
 */

import { gaussianVector, hashString, mulberry32 } from "./prng.js";
import {
  FACE_POINT_COUNT,
  POSE_POINT_COUNT,
  type EmbeddingBackend,
  type LandmarkBackend,
  type LandmarkDetection,
  type VideoFrame,
} from "./types.js";

function hashBytes(data: Uint8Array, salt: number): number {
  let hash = (0x811c9dc5 ^ salt) >>> 0;
  const stride = Math.max(1, Math.floor(data.length / 512));
  for (let i = 0; i < data.length; i += stride) {
    hash ^= data[i];
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

function failsAt(index: number, seed: number, rate: number): boolean {
  if (rate <= 0) return false;
  return mulberry32((seed ^ Math.imul(index + 1, 0x9e3779b1)) >>> 0)() < rate;
}

export interface SyntheticLandmarkOptions {
  seed?: number;
  /** Fraction of frames reported as missed detections, per subsystem. */
  faceFailRate?: number;
  poseFailRate?: number;
  /** Frame offset added to the motion phase (simulates desynchronization). */
  phaseOffset?: number;
}

export class SyntheticLandmarkBackend implements LandmarkBackend {
  readonly models = { face: "synthetic-face-mesh/1", pose: "synthetic-pose/1" };
  private readonly seed: number;
  private readonly faceFailRate: number;
  private readonly poseFailRate: number;
  private readonly phaseOffset: number;
  private readonly faceBase: number[][];
  private readonly poseBase: number[][];

  constructor(options: SyntheticLandmarkOptions = {}) {
    this.seed = options.seed ?? 0;
    this.faceFailRate = options.faceFailRate ?? 0;
    this.poseFailRate = options.poseFailRate ?? 0;
    this.phaseOffset = options.phaseOffset ?? 0;
    const rand = mulberry32(this.seed ^ 0x5eed);
    this.faceBase = Array.from({ length: FACE_POINT_COUNT }, () => [
      0.2 + 0.6 * rand(),
      0.2 + 0.6 * rand(),
    ]);
    this.poseBase = Array.from({ length: POSE_POINT_COUNT }, () => [
      0.2 + 0.6 * rand(),
      0.2 + 0.6 * rand(),
    ]);
  }

  async detect(frame: VideoFrame): Promise<LandmarkDetection> {
    const t = frame.index + this.phaseOffset;
    return {
      face: failsAt(frame.index, this.seed ^ 0xface, this.faceFailRate)
        ? null
        : this.faceAt(t),
      pose: failsAt(frame.index, this.seed ^ 0x905e, this.poseFailRate)
        ? null
        : this.poseAt(t),
    };
  }

  private faceAt(t: number): number[][] {
    const face = this.faceBase.map((point) => [point[0], point[1]]);
    const lipGap = 0.02 + 0.012 * Math.sin((2 * Math.PI * t) / 18);
    for (const [upper, lower] of [[13, 14], [82, 87], [312, 317], [0, 17]]) {
      face[upper] = [0.5, 0.62 - lipGap / 2];
      face[lower] = [0.5, 0.62 + lipGap / 2];
    }
    face[61] = [0.45, 0.62];
    face[291] = [0.55, 0.62];

    const lidGap = 0.018 + 0.011 * Math.sin((2 * Math.PI * t) / 28);
    const gazeX = 0.4 * Math.sin((2 * Math.PI * t) / 150);
    const gazeY = 0.4 * Math.sin((2 * Math.PI * t) / 150 + 1.1);
    for (const eye of [
      { inner: 133, outer: 33, upper: 159, lower: 145, iris: 468, cx: 0.385, sign: -1 },
      { inner: 362, outer: 263, upper: 386, lower: 374, iris: 473, cx: 0.615, sign: 1 },
    ]) {
      face[eye.inner] = [eye.cx - eye.sign * 0.035, 0.4];
      face[eye.outer] = [eye.cx + eye.sign * 0.035, 0.4];
      face[eye.upper] = [eye.cx, 0.4 - lidGap / 2];
      face[eye.lower] = [eye.cx, 0.4 + lidGap / 2];
      face[eye.iris] = [eye.cx + eye.sign * gazeX * 0.035, 0.4 + (gazeY * lidGap) / 2];
    }
    return face;
  }

  private poseAt(t: number): number[][] {
    const pose = this.poseBase.map((point) => [point[0], point[1]]);
    const roll = 0.08 * Math.sin((2 * Math.PI * t) / 220);
    const sway = 0.015 * Math.sin((2 * Math.PI * t) / 220 + 0.6);
    const midX = 0.5 + sway;
    pose[11] = [midX - 0.1 * Math.cos(roll), 0.7 - 0.1 * Math.sin(roll)];
    pose[12] = [midX + 0.1 * Math.cos(roll), 0.7 + 0.1 * Math.sin(roll)];
    pose[23] = [0.42, 0.95];
    pose[24] = [0.58, 0.95];
    const bendLeft = 1.9 + 0.2 * Math.sin((2 * Math.PI * t) / 220 + 1.2);
    const bendRight = 1.9 + 0.2 * Math.sin((2 * Math.PI * t) / 220 + 2.0);
    pose[13] = [pose[11][0] - 0.07, pose[11][1] + 0.11];
    pose[14] = [pose[12][0] + 0.07, pose[12][1] + 0.11];
    const leftDir = Math.atan2(pose[11][1] - pose[13][1], pose[11][0] - pose[13][0]);
    const rightDir = Math.atan2(pose[12][1] - pose[14][1], pose[12][0] - pose[14][0]);
    pose[15] = [
      pose[13][0] + 0.12 * Math.cos(leftDir - bendLeft),
      pose[13][1] + 0.12 * Math.sin(leftDir - bendLeft),
    ];
    pose[16] = [
      pose[14][0] + 0.12 * Math.cos(rightDir + bendRight),
      pose[14][1] + 0.12 * Math.sin(rightDir + bendRight),
    ];
    return pose;
  }
}

export interface SyntheticEmbeddingOptions {
  seed?: number;
  imageDim?: number;
  faceDim?: number;
  faceFailRate?: number;
}

export class SyntheticEmbeddingBackend implements EmbeddingBackend {
  readonly models = {
    image: "synthetic-image-encoder/1",
    text: "synthetic-text-encoder/1",
    face: "synthetic-face-encoder/1",
  };
  readonly imageDim: number;
  readonly faceDim: number;
  private readonly seed: number;
  private readonly faceFailRate: number;

  constructor(options: SyntheticEmbeddingOptions = {}) {
    this.seed = options.seed ?? 0;
    this.imageDim = options.imageDim ?? 32;
    this.faceDim = options.faceDim ?? 16;
    this.faceFailRate = options.faceFailRate ?? 0;
  }

  async embedImage(frame: VideoFrame): Promise<Float32Array> {
    return gaussianVector(this.imageDim, hashBytes(frame.data, this.seed ^ 0x1a6e));
  }

  async embedFace(frame: VideoFrame): Promise<Float32Array | null> {
    if (failsAt(frame.index, this.seed ^ 0xfa2e, this.faceFailRate)) {
      return null;
    }
    return gaussianVector(this.faceDim, hashBytes(frame.data, this.seed ^ 0xfa2e));
  }

  async embedText(prompt: string): Promise<Float32Array> {
    return gaussianVector(this.imageDim, hashString(prompt) ^ this.seed);
  }
}
