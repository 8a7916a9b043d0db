import { CropError } from "./errors.js";
import type { CropRect, VideoFrame } from "./types.js";

function within(crop: CropRect, width: number, height: number): boolean {
  return (
    crop.x >= 0 &&
    crop.y >= 0 &&
    crop.width > 0 &&
    crop.height > 0 &&
    crop.x + crop.width <= width &&
    crop.y + crop.height <= height
  );
}

function overlaps(a: CropRect, b: CropRect): boolean {
  return (
    a.x < b.x + b.width &&
    b.x < a.x + a.width &&
    a.y < b.y + b.height &&
    b.y < a.y + a.height
  );
}

/** Crops must sit inside the frame and never overlap each other. */
export function validateCrops(
  crops: { source: CropRect; edited: CropRect },
  width: number,
  height: number,
): void {
  for (const [name, crop] of Object.entries(crops)) {
    if (!within(crop, width, height)) {
      throw new CropError(
        `${name} crop ${JSON.stringify(crop)} exceeds frame bounds ${width}x${height}`,
      );
    }
  }
  if (overlaps(crops.source, crops.edited)) {
    throw new CropError("source and edited crops overlap");
  }
}

/** Side-by-side panel split at a configurable vertical midline. */
export function splitDualPanel(
  width: number,
  height: number,
  midline = 0.5,
): { source: CropRect; edited: CropRect } {
  const split = Math.round(width * midline);
  if (split <= 0 || split >= width) {
    throw new CropError(`midline ${midline} leaves an empty panel in width ${width}`);
  }
  return {
    source: { x: 0, y: 0, width: split, height },
    edited: { x: split, y: 0, width: width - split, height },
  };
}

export function cropFrame(frame: VideoFrame, crop: CropRect): VideoFrame {
  const out = new Uint8Array(crop.width * crop.height * 3);
  for (let row = 0; row < crop.height; row++) {
    const srcStart = ((crop.y + row) * frame.width + crop.x) * 3;
    out.set(frame.data.subarray(srcStart, srcStart + crop.width * 3), row * crop.width * 3);
  }
  return { index: frame.index, width: crop.width, height: crop.height, data: out };
}

export function parseCrop(text: string): CropRect {
  const parts = text.split(",").map(Number);
  if (parts.length !== 4 || parts.some((value) => !Number.isFinite(value))) {
    throw new CropError(`crop must be "x,y,width,height", got "${text}"`);
  }
  const [x, y, width, height] = parts;
  return { x, y, width, height };
}
