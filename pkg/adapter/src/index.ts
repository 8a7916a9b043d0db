export { cropFrame, parseCrop, splitDualPanel, validateCrops } from "./crop.js";
export { extractEmbeddings } from "./embeddings.js";
export { createClipBackend } from "./encoders.js";
export { CropError, DecodeError, ModelLoadError } from "./errors.js";
export { extractLandmarks, writePairRecord } from "./landmarks.js";
export { createMediapipeBackend } from "./mediapipe.js";
export { SyntheticEmbeddingBackend, SyntheticLandmarkBackend } from "./synthetic.js";
export { openVideo } from "./video.js";
export type {
  AdapterManifest,
  CropRect,
  EmbeddingBackend,
  LandmarkBackend,
  LandmarkDetection,
  VideoFrame,
  VideoSource,
  ViewName,
} from "./types.js";
