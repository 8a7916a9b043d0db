/**
 * Real encoder wiring via transformers.js: a CLIP checkpoint provides the
 * joint image/text space and a face-embedding checkpoint provides identity
 * vectors.  Checkpoints are configurable (CLIP_MODEL_ID / FACE_MODEL_ID
 * environment variables); weights are downloaded on first use by the
 * library's own cache, so offline environments should pre-seed it.  Loaded
 * dynamically for the same reason as the mediapipe backend.
 */

import { ModelLoadError } from "./errors.js";
import type { EmbeddingBackend, VideoFrame } from "./types.js";

export interface EncoderOptions {
  clipModelId?: string;
  faceModelId?: string;
}

const DEFAULT_CLIP = "Xenova/clip-vit-base-patch32";

async function loadTransformers(): Promise<any> {
  const specifier = "@xenova/transformers";
  try {
    return await import(specifier);
  } catch (error) {
    throw new ModelLoadError(
      `${specifier} is not installed; run \`npm install ${specifier}\` to use the ` +
        `clip backend (${(error as Error).message})`,
    );
  }
}

function l2Normalize(vec: Float32Array): Float32Array {
  let sum = 0;
  for (const value of vec) sum += value * value;
  const norm = Math.sqrt(sum) || 1;
  return vec.map((value) => value / norm) as Float32Array;
}

export async function createClipBackend(
  options: EncoderOptions = {},
): Promise<EmbeddingBackend> {
  const clipId = options.clipModelId ?? process.env.CLIP_MODEL_ID ?? DEFAULT_CLIP;
  const faceId = options.faceModelId ?? process.env.FACE_MODEL_ID;
  if (!faceId) {
    throw new ModelLoadError(
      "clip backend needs a face-embedding checkpoint id (FACE_MODEL_ID)",
    );
  }
  const transformers = await loadTransformers();
  const { RawImage, pipeline } = transformers;
  const imagePipe = await pipeline("image-feature-extraction", clipId);
  const textPipe = await pipeline("feature-extraction", clipId);
  const facePipe = await pipeline("image-feature-extraction", faceId);

  const toRawImage = (frame: VideoFrame) =>
    new RawImage(frame.data, frame.width, frame.height, 3);

  const firstRun = await imagePipe(toRawImage({
    index: 0, width: 2, height: 2, data: new Uint8Array(12),
  }));
  const imageDim = firstRun.dims.at(-1);
  const faceProbe = await facePipe(toRawImage({
    index: 0, width: 2, height: 2, data: new Uint8Array(12),
  }));
  const faceDim = faceProbe.dims.at(-1);

  return {
    models: { image: clipId, text: clipId, face: faceId },
    imageDim,
    faceDim,
    async embedImage(frame: VideoFrame): Promise<Float32Array> {
      const output = await imagePipe(toRawImage(frame));
      return l2Normalize(Float32Array.from(output.data));
    },
    async embedFace(frame: VideoFrame): Promise<Float32Array | null> {
      const output = await facePipe(toRawImage(frame));
      return l2Normalize(Float32Array.from(output.data));
    },
    async embedText(prompt: string): Promise<Float32Array> {
      const output = await textPipe(prompt, { pooling: "mean", normalize: true });
      return Float32Array.from(output.data);
    },
  };
}
