import { spawn } from "node:child_process";
import { readFileSync, readdirSync, statSync } from "node:fs";
import { join } from "node:path";

import { DecodeError } from "./errors.js";
import { hashString, mulberry32 } from "./prng.js";
import type { VideoFrame, VideoSource } from "./types.js";

/**
 * Open a video input. Three forms are supported:
 *
 * - "synthetic:<id>?frames=40&fps=20&width=160&height=120" - deterministic
 *   generated frames (no decoder required; used by tests and dry runs)
 * - a directory holding meta.json {fps,width,height,frames:[...]} plus raw
 *   RGB888 frame files
 * - any other path is decoded by piping through ffmpeg (DecodeError when
 *   ffmpeg/ffprobe are unavailable or the file cannot be read)
 */
export async function openVideo(input: string): Promise<VideoSource> {
  if (input.startsWith("synthetic:")) {
    return syntheticSource(input);
  }
  let stats;
  try {
    stats = statSync(input);
  } catch {
    throw new DecodeError(`video input not found: ${input}`);
  }
  if (stats.isDirectory()) {
    return frameDirSource(input);
  }
  return ffmpegSource(input);
}

function syntheticSource(uri: string): VideoSource {
  const query = uri.includes("?") ? uri.slice(uri.indexOf("?") + 1) : "";
  const id = uri.slice("synthetic:".length).split("?")[0] || "clip";
  const params = new URLSearchParams(query);
  const frameCount = Number(params.get("frames") ?? 40);
  const fps = Number(params.get("fps") ?? 20);
  const width = Number(params.get("width") ?? 160);
  const height = Number(params.get("height") ?? 120);
  if (!(frameCount > 0 && fps > 0 && width > 0 && height > 0)) {
    throw new DecodeError(`invalid synthetic video spec: ${uri}`);
  }
  const seed = hashString(uri);
  return {
    id,
    fps,
    width,
    height,
    frameCount,
    async *frames() {
      for (let index = 0; index < frameCount; index++) {
        const rand = mulberry32(seed ^ index);
        const data = new Uint8Array(width * height * 3);
        const base = Math.floor(rand() * 64);
        for (let i = 0; i < data.length; i++) {
          data[i] = (base + ((i * 2654435761) >>> 24)) & 0xff;
        }
        yield { index, width, height, data };
      }
    },
  };
}

interface FrameDirMeta {
  fps: number;
  width: number;
  height: number;
  frames: string[];
}

function frameDirSource(dir: string): VideoSource {
  let meta: FrameDirMeta;
  try {
    meta = JSON.parse(readFileSync(join(dir, "meta.json"), "utf-8"));
  } catch (error) {
    const listing = readdirSync(dir).slice(0, 5).join(", ");
    throw new DecodeError(`frame directory ${dir} has no readable meta.json (${listing})`);
  }
  const expected = meta.width * meta.height * 3;
  return {
    id: dir,
    fps: meta.fps,
    width: meta.width,
    height: meta.height,
    frameCount: meta.frames.length,
    async *frames() {
      for (let index = 0; index < meta.frames.length; index++) {
        const data = new Uint8Array(readFileSync(join(dir, meta.frames[index])));
        if (data.length !== expected) {
          throw new DecodeError(
            `${meta.frames[index]}: expected ${expected} RGB bytes, got ${data.length}`,
          );
        }
        yield { index, width: meta.width, height: meta.height, data };
      }
    },
  };
}

function run(command: string, args: string[]): Promise<Buffer> {
  return new Promise((resolve, reject) => {
    const child = spawn(command, args, { stdio: ["ignore", "pipe", "pipe"] });
    const chunks: Buffer[] = [];
    const errors: Buffer[] = [];
    child.stdout.on("data", (chunk) => chunks.push(chunk));
    child.stderr.on("data", (chunk) => errors.push(chunk));
    child.on("error", (error) => reject(new DecodeError(`${command}: ${error.message}`)));
    child.on("close", (code) => {
      if (code === 0) {
        resolve(Buffer.concat(chunks));
      } else {
        reject(
          new DecodeError(`${command} exited ${code}: ${Buffer.concat(errors).toString().slice(0, 400)}`),
        );
      }
    });
  });
}

async function ffmpegSource(path: string): Promise<VideoSource> {
  const probeRaw = await run("ffprobe", [
    "-v", "error",
    "-select_streams", "v:0",
    "-show_entries", "stream=width,height,r_frame_rate,nb_frames",
    "-of", "json",
    path,
  ]);
  const stream = JSON.parse(probeRaw.toString()).streams?.[0];
  if (!stream) {
    throw new DecodeError(`${path}: no video stream`);
  }
  const [num, den] = String(stream.r_frame_rate).split("/").map(Number);
  const fps = den ? num / den : num;
  const width = Number(stream.width);
  const height = Number(stream.height);

  const raw = await run("ffmpeg", [
    "-v", "error",
    "-i", path,
    "-f", "rawvideo",
    "-pix_fmt", "rgb24",
    "-",
  ]);
  const frameBytes = width * height * 3;
  const frameCount = Math.floor(raw.length / frameBytes);
  if (frameCount === 0) {
    throw new DecodeError(`${path}: decoded zero frames`);
  }
  return {
    id: path,
    fps,
    width,
    height,
    frameCount,
    async *frames() {
      for (let index = 0; index < frameCount; index++) {
        const start = index * frameBytes;
        yield {
          index,
          width,
          height,
          data: new Uint8Array(raw.subarray(start, start + frameBytes)),
        };
      }
    },
  };
}
