export const FACE_POINT_COUNT = 478;
export const POSE_POINT_COUNT = 33;

export type ViewName = "source" | "edited";

/** Pixel-space crop rectangle inside a decoded frame. */
export interface CropRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

/** One decoded RGB frame (8-bit interleaved, row-major). */
export interface VideoFrame {
  index: number;
  width: number;
  height: number;
  data: Uint8Array;
}

export interface VideoSource {
  id: string;
  fps: number;
  width: number;
  height: number;
  frameCount: number;
  frames(): AsyncIterable<VideoFrame>;
}

/** Per-frame detection result in crop-normalized [0,1] coordinates. */
export interface LandmarkDetection {
  face: number[][] | null;
  pose: number[][] | null;
}

export interface LandmarkBackend {
  readonly models: Record<string, string>;
  detect(frame: VideoFrame): Promise<LandmarkDetection>;
  close?(): Promise<void>;
}

export interface EmbeddingBackend {
  readonly models: Record<string, string>;
  readonly imageDim: number;
  readonly faceDim: number;
  embedImage(frame: VideoFrame): Promise<Float32Array>;
  /** null marks a frame where no face was detected. */
  embedFace(frame: VideoFrame): Promise<Float32Array | null>;
  embedText(prompt: string): Promise<Float32Array>;
  close?(): Promise<void>;
}

/** Batch description recorded alongside every output file. */
export interface AdapterManifest {
  video: string;
  views: { source: CropRect; edited: CropRect };
  models: Record<string, string>;
  outDir: string;
}
