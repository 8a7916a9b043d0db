import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { cropFrame } from "./crop.js";
import { DecodeError, ModelLoadError } from "./errors.js";
import type { CropRect, EmbeddingBackend, VideoFrame, VideoSource } from "./types.js";

export interface EmbeddingExtraction {
  headerPath: string;
  payloadPath: string;
  frameCount: number;
  facesMissing: number;
}

interface Section {
  offset: number;
  shape: number[];
}

function floatsToLE(values: Float32Array): Buffer {
  const buffer = Buffer.alloc(values.length * 4);
  for (let i = 0; i < values.length; i++) {
    buffer.writeFloatLE(values[i], i * 4);
  }
  return buffer;
}

/**
 * Embed both views of a pair and emit the sidecar-layout embedding bundle:
 * a JSON header plus a row-major little-endian float32 payload.  Frames
 * whose face embedding is unavailable become NaN rows.
 */
export async function extractEmbeddings(options: {
  source: VideoSource;
  edited: VideoSource;
  pairId: string;
  outDir: string;
  backend: EmbeddingBackend;
  keyFrame?: VideoFrame;
  prompts?: { source: string; target: string };
  sourceCrop?: CropRect;
  editedCrop?: CropRect;
}): Promise<EmbeddingExtraction> {
  const { source, edited, pairId, outDir, backend } = options;
  if (source.frameCount !== edited.frameCount) {
    throw new DecodeError(
      `views disagree in frame count: ${source.frameCount} vs ${edited.frameCount}`,
    );
  }
  mkdirSync(outDir, { recursive: true });

  const srcRows: Float32Array[] = [];
  for await (const frame of source.frames()) {
    srcRows.push(await backend.embedImage(maybeCrop(frame, options.sourceCrop)));
  }
  const editRows: Float32Array[] = [];
  const faceRows: Float32Array[] = [];
  let facesMissing = 0;
  let firstEdited: VideoFrame | null = null;
  for await (const frame of edited.frames()) {
    const cropped = maybeCrop(frame, options.editedCrop);
    if (firstEdited === null) firstEdited = cropped;
    editRows.push(await backend.embedImage(cropped));
    const face = await backend.embedFace(cropped);
    if (face === null) {
      facesMissing += 1;
      faceRows.push(nanRow(backend.faceDim));
    } else {
      faceRows.push(face);
    }
  }

  const keyFrame = options.keyFrame ?? firstEdited;
  if (!keyFrame) {
    throw new DecodeError("edited view has no frames");
  }
  const key = await backend.embedImage(keyFrame);
  const faceKey = await backend.embedFace(keyFrame);
  if (faceKey === null) {
    throw new ModelLoadError("no face found in the keyframe; face similarity undefined");
  }
  const srcFirst = srcRows[0];

  let textSource: Float32Array | null = null;
  let textTarget: Float32Array | null = null;
  if (options.prompts) {
    textSource = await backend.embedText(options.prompts.source);
    textTarget = await backend.embedText(options.prompts.target);
  }
  await backend.close?.();

  const sections: Record<string, Section> = {};
  const chunks: Buffer[] = [];
  let offset = 0;
  const add = (name: string, rows: Float32Array[], shape: number[]) => {
    const flat = new Float32Array(shape.reduce((a, b) => a * b, 1));
    let cursor = 0;
    for (const row of rows) {
      flat.set(row, cursor);
      cursor += row.length;
    }
    sections[name] = { offset, shape };
    const buffer = floatsToLE(flat);
    chunks.push(buffer);
    offset += buffer.length;
  };

  const frameCount = srcRows.length;
  add("src_frames", srcRows, [frameCount, backend.imageDim]);
  add("edit_frames", editRows, [frameCount, backend.imageDim]);
  add("key", [key], [backend.imageDim]);
  add("src_first", [srcFirst], [backend.imageDim]);
  add("face_edit_frames", faceRows, [frameCount, backend.faceDim]);
  add("face_key", [faceKey], [backend.faceDim]);
  if (textSource && textTarget) {
    add("text_source", [textSource], [backend.imageDim]);
    add("text_target", [textTarget], [backend.imageDim]);
  }

  const payloadName = `${pairId}.emb.json.bin`;
  const header = {
    pair_id: pairId,
    format: "embeddings/v1",
    layout: "sidecar",
    payload: payloadName,
    dtype: "float32",
    byte_order: "little",
    n_frames: frameCount,
    image_dim: backend.imageDim,
    face_dim: backend.faceDim,
    text_dim: textSource && textTarget ? backend.imageDim : null,
    model: backend.models,
    sections,
  };
  const payloadPath = join(outDir, payloadName);
  const headerPath = join(outDir, `${pairId}.emb.json`);
  writeFileSync(payloadPath, Buffer.concat(chunks));
  writeFileSync(headerPath, JSON.stringify(header, null, 2) + "\n");

  return { headerPath, payloadPath, frameCount, facesMissing };
}

function maybeCrop(frame: VideoFrame, crop?: CropRect): VideoFrame {
  return crop ? cropFrame(frame, crop) : frame;
}

function nanRow(dim: number): Float32Array {
  return new Float32Array(dim).fill(Number.NaN);
}
