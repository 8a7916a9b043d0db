#!/usr/bin/env node
/**
 * extract landmarks  --video INPUT --view source|edited --video-id ID --out DIR
 *                    [--crop x,y,w,h] [--backend synthetic|mediapipe] [--seed N]
 *                    [--face-fail-rate F] [--pose-fail-rate F] [--phase-offset N]
 * extract panel-pair --video INPUT --pair-id ID --out DIR [--midline F]
 *                    [--kind edited_pair|identical_pair] [backend flags]
 * extract embeddings --source INPUT --edited INPUT --pair-id ID --out DIR
 *                    [--prompt-source S --prompt-target T]
 *                    [--backend synthetic|clip] [--seed N] [--face-fail-rate F]
 *
 * INPUT is a video file (decoded via ffmpeg), a raw-frame directory, or a
 * synthetic: URI.  Every run writes a manifest.json recording inputs,
 * crops, and model identifiers.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { basename, join } from "node:path";

import { splitDualPanel, parseCrop, validateCrops } from "./crop.js";
import { extractEmbeddings } from "./embeddings.js";
import { createClipBackend } from "./encoders.js";
import { extractLandmarks, writePairRecord } from "./landmarks.js";
import { createMediapipeBackend } from "./mediapipe.js";
import { SyntheticEmbeddingBackend, SyntheticLandmarkBackend } from "./synthetic.js";
import { openVideo } from "./video.js";
import type { EmbeddingBackend, LandmarkBackend } from "./types.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    if (!argv[i].startsWith("--")) {
      throw new Error(`unexpected argument: ${argv[i]}`);
    }
    const name = argv[i].slice(2);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new Error(`flag --${name} needs a value`);
    }
    flags.set(name, value);
    i++;
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) throw new Error(`missing required flag --${name}`);
  return value;
}

async function landmarkBackend(flags: Map<string, string>): Promise<LandmarkBackend> {
  const kind = flags.get("backend") ?? "synthetic";
  if (kind === "mediapipe") return createMediapipeBackend();
  if (kind !== "synthetic") throw new Error(`unknown landmark backend: ${kind}`);
  return new SyntheticLandmarkBackend({
    seed: Number(flags.get("seed") ?? 0),
    faceFailRate: Number(flags.get("face-fail-rate") ?? 0),
    poseFailRate: Number(flags.get("pose-fail-rate") ?? 0),
    phaseOffset: Number(flags.get("phase-offset") ?? 0),
  });
}

async function embeddingBackend(flags: Map<string, string>): Promise<EmbeddingBackend> {
  const kind = flags.get("backend") ?? "synthetic";
  if (kind === "clip") return createClipBackend();
  if (kind !== "synthetic") throw new Error(`unknown embedding backend: ${kind}`);
  return new SyntheticEmbeddingBackend({
    seed: Number(flags.get("seed") ?? 0),
    faceFailRate: Number(flags.get("face-fail-rate") ?? 0),
  });
}

function writeManifest(outDir: string, manifest: Record<string, unknown>): void {
  mkdirSync(outDir, { recursive: true });
  const name = `manifest.${manifest.command}.json`;
  writeFileSync(join(outDir, name), JSON.stringify(manifest, null, 2) + "\n");
}

async function cmdLandmarks(flags: Map<string, string>): Promise<void> {
  const video = await openVideo(need(flags, "video"));
  const view = need(flags, "view") as "source" | "edited";
  const outDir = need(flags, "out");
  const backend = await landmarkBackend(flags);
  const crop = flags.has("crop") ? parseCrop(flags.get("crop")!) : undefined;
  const result = await extractLandmarks({
    video,
    crop,
    view,
    videoId: need(flags, "video-id"),
    outDir,
    backend,
  });
  writeManifest(outDir, {
    command: "landmarks",
    video: need(flags, "video"),
    view,
    crop: crop ?? null,
    models: backend.models,
    out_dir: outDir,
  });
  console.log(
    `${result.bundlePath}: ${result.frameCount} frames, ` +
      `face coverage ${result.coverageFace.toFixed(3)}, ` +
      `pose coverage ${result.coveragePose.toFixed(3)} (log: ${result.logPath})`,
  );
}

async function cmdPanelPair(flags: Map<string, string>): Promise<void> {
  const video = await openVideo(need(flags, "video"));
  const pairId = need(flags, "pair-id");
  const outDir = need(flags, "out");
  const midline = Number(flags.get("midline") ?? 0.5);
  const kind = (flags.get("kind") ?? "edited_pair") as "edited_pair" | "identical_pair";
  const crops = splitDualPanel(video.width, video.height, midline);
  validateCrops(crops, video.width, video.height);
  const backend = await landmarkBackend(flags);

  const source = await extractLandmarks({
    video, crop: crops.source, view: "source", videoId: pairId, outDir, backend,
  });
  const edited = await extractLandmarks({
    video: await openVideo(need(flags, "video")),
    crop: crops.edited, view: "edited", videoId: pairId, outDir, backend,
  });
  const recordPath = writePairRecord(
    outDir, pairId, kind, basename(source.bundlePath), basename(edited.bundlePath),
  );
  writeManifest(outDir, {
    command: "panel-pair",
    video: need(flags, "video"),
    views: crops,
    models: backend.models,
    out_dir: outDir,
  });
  console.log(`${recordPath}: pair record with views split at midline ${midline}`);
}

async function cmdEmbeddings(flags: Map<string, string>): Promise<void> {
  const outDir = need(flags, "out");
  const backend = await embeddingBackend(flags);
  const prompts =
    flags.has("prompt-source") || flags.has("prompt-target")
      ? { source: need(flags, "prompt-source"), target: need(flags, "prompt-target") }
      : undefined;
  const result = await extractEmbeddings({
    source: await openVideo(need(flags, "source")),
    edited: await openVideo(need(flags, "edited")),
    pairId: need(flags, "pair-id"),
    outDir,
    backend,
    prompts,
  });
  writeManifest(outDir, {
    command: "embeddings",
    source: need(flags, "source"),
    edited: need(flags, "edited"),
    prompts: prompts ?? null,
    models: backend.models,
    out_dir: outDir,
  });
  console.log(
    `${result.headerPath}: ${result.frameCount} frames, ` +
      `${result.facesMissing} faces missing (payload: ${result.payloadPath})`,
  );
}

export async function main(argv = process.argv.slice(2)): Promise<number> {
  const command = argv[0];
  try {
    const flags = parseFlags(argv.slice(1));
    if (command === "landmarks") await cmdLandmarks(flags);
    else if (command === "panel-pair") await cmdPanelPair(flags);
    else if (command === "embeddings") await cmdEmbeddings(flags);
    else {
      console.error("usage: extract landmarks|panel-pair|embeddings [flags]");
      return 2;
    }
    return 0;
  } catch (error) {
    console.error(`error: ${(error as Error).message}`);
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(await main());
}
