/**
 * MediaPipe Tasks wiring for real face-mesh (478 points) and pose (33
 * points) detection.
 *
 * Model asset paths come from the options or the MEDIAPIPE_FACE_MODEL /
 * MEDIAPIPE_POSE_MODEL environment variables; the @mediapipe/tasks-vision
 * package is loaded dynamically so that environments without it (or
 * without the .task weights) can still run every other backend.  Detection
 * runs in VIDEO mode with the backend defaults for confidence thresholds;
 * the resolved model identifiers are recorded in every output file.
 */

import { ModelLoadError } from "./errors.js";
import type { LandmarkBackend, LandmarkDetection, VideoFrame } from "./types.js";

export interface MediapipeOptions {
  faceModelPath?: string;
  poseModelPath?: string;
  wasmBasePath?: string;
}

interface TasksVisionModule {
  FilesetResolver: { forVisionTasks(base: string): Promise<unknown> };
  FaceLandmarker: { createFromOptions(vision: unknown, options: unknown): Promise<any> };
  PoseLandmarker: { createFromOptions(vision: unknown, options: unknown): Promise<any> };
}

async function loadTasksVision(): Promise<TasksVisionModule> {
  const specifier = "@mediapipe/tasks-vision";
  try {
    return (await import(specifier)) as TasksVisionModule;
  } catch (error) {
    throw new ModelLoadError(
      `${specifier} is not installed; run \`npm install ${specifier}\` and provide ` +
        `model assets to use the mediapipe backend (${(error as Error).message})`,
    );
  }
}

export async function createMediapipeBackend(
  options: MediapipeOptions = {},
): Promise<LandmarkBackend> {
  const faceModel = options.faceModelPath ?? process.env.MEDIAPIPE_FACE_MODEL;
  const poseModel = options.poseModelPath ?? process.env.MEDIAPIPE_POSE_MODEL;
  if (!faceModel || !poseModel) {
    throw new ModelLoadError(
      "mediapipe backend needs face and pose .task model paths " +
        "(MEDIAPIPE_FACE_MODEL / MEDIAPIPE_POSE_MODEL)",
    );
  }
  const vision = await loadTasksVision();
  const fileset = await vision.FilesetResolver.forVisionTasks(
    options.wasmBasePath ?? "node_modules/@mediapipe/tasks-vision/wasm",
  );
  const faceLandmarker = await vision.FaceLandmarker.createFromOptions(fileset, {
    baseOptions: { modelAssetPath: faceModel },
    runningMode: "VIDEO",
    numFaces: 1,
  });
  const poseLandmarker = await vision.PoseLandmarker.createFromOptions(fileset, {
    baseOptions: { modelAssetPath: poseModel },
    runningMode: "VIDEO",
    numPoses: 1,
  });

  const toImageData = (frame: VideoFrame) => {
    // tasks-vision accepts ImageData-shaped {data,width,height} with RGBA.
    const rgba = new Uint8ClampedArray(frame.width * frame.height * 4);
    for (let i = 0, j = 0; i < frame.data.length; i += 3, j += 4) {
      rgba[j] = frame.data[i];
      rgba[j + 1] = frame.data[i + 1];
      rgba[j + 2] = frame.data[i + 2];
      rgba[j + 3] = 255;
    }
    return { data: rgba, width: frame.width, height: frame.height };
  };

  return {
    models: { face: `mediapipe-face-landmarker:${faceModel}`,
              pose: `mediapipe-pose-landmarker:${poseModel}` },
    async detect(frame: VideoFrame): Promise<LandmarkDetection> {
      const image = toImageData(frame);
      const timestamp = frame.index;
      const faceResult = faceLandmarker.detectForVideo(image, timestamp);
      const poseResult = poseLandmarker.detectForVideo(image, timestamp);
      const face = faceResult?.faceLandmarks?.[0];
      const pose = poseResult?.landmarks?.[0];
      return {
        face: face ? face.map((p: { x: number; y: number }) => [p.x, p.y]) : null,
        pose: pose ? pose.map((p: { x: number; y: number }) => [p.x, p.y]) : null,
      };
    },
    async close() {
      faceLandmarker.close?.();
      poseLandmarker.close?.();
    },
  };
}
