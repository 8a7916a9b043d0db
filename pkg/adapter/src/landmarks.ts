import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { cropFrame } from "./crop.js";
import { CropError } from "./errors.js";
import {
  FACE_POINT_COUNT,
  POSE_POINT_COUNT,
  type CropRect,
  type LandmarkBackend,
  type VideoSource,
  type ViewName,
} from "./types.js";

export interface LandmarkExtraction {
  bundlePath: string;
  logPath: string;
  frameCount: number;
  coverageFace: number;
  coveragePose: number;
}

function checkPoints(points: number[][] | null, count: number, what: string, index: number) {
  if (points === null) return;
  if (points.length !== count || points.some((p) => p.length !== 2)) {
    throw new CropError(`frame ${index}: backend returned malformed ${what} landmarks`);
  }
}

/**
 * Run landmark detection over one view and emit a canonical bundle file
 * plus a sidecar log of per-frame detection failures.
 */
export async function extractLandmarks(options: {
  video: VideoSource;
  crop?: CropRect;
  view: ViewName;
  videoId: string;
  outDir: string;
  backend: LandmarkBackend;
}): Promise<LandmarkExtraction> {
  const { video, view, videoId, outDir, backend } = options;
  const crop = options.crop ?? { x: 0, y: 0, width: video.width, height: video.height };
  if (crop.x < 0 || crop.y < 0 || crop.x + crop.width > video.width ||
      crop.y + crop.height > video.height) {
    throw new CropError(`crop ${JSON.stringify(crop)} exceeds ${video.width}x${video.height}`);
  }
  mkdirSync(outDir, { recursive: true });

  const frames: Array<{ frame_index: number; face: number[][] | null; pose: number[][] | null }> = [];
  const faceFailures: number[] = [];
  const poseFailures: number[] = [];
  for await (const frame of video.frames()) {
    const detection = await backend.detect(cropFrame(frame, crop));
    checkPoints(detection.face, FACE_POINT_COUNT, "face", frame.index);
    checkPoints(detection.pose, POSE_POINT_COUNT, "pose", frame.index);
    if (detection.face === null) faceFailures.push(frame.index);
    if (detection.pose === null) poseFailures.push(frame.index);
    frames.push({ frame_index: frame.index, face: detection.face, pose: detection.pose });
  }
  await backend.close?.();

  const bundle = { video_id: videoId, view, fps: video.fps, frames };
  const bundlePath = join(outDir, `${videoId}.${view}.json`);
  writeFileSync(bundlePath, JSON.stringify(bundle) + "\n");

  const coverageFace = (frames.length - faceFailures.length) / frames.length;
  const coveragePose = (frames.length - poseFailures.length) / frames.length;
  const log = {
    video_id: videoId,
    view,
    models: backend.models,
    frame_count: frames.length,
    face_failures: faceFailures,
    pose_failures: poseFailures,
    coverage_face: coverageFace,
    coverage_pose: coveragePose,
  };
  const logPath = join(outDir, `${videoId}.${view}.log.json`);
  writeFileSync(logPath, JSON.stringify(log, null, 2) + "\n");

  return {
    bundlePath,
    logPath,
    frameCount: frames.length,
    coverageFace,
    coveragePose,
  };
}

/** Write the pair record the primary toolkit consumes. */
export function writePairRecord(
  outDir: string,
  pairId: string,
  kind: "edited_pair" | "identical_pair",
  sourceBundle: string,
  editedBundle: string,
): string {
  const record = {
    pair_id: pairId,
    kind,
    source: sourceBundle,
    edited: editedBundle,
  };
  const path = join(outDir, `${pairId}.pair.json`);
  writeFileSync(path, JSON.stringify(record, null, 2) + "\n");
  return path;
}
