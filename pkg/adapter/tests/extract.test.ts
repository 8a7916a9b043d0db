import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";

import { parseCrop, splitDualPanel, validateCrops } from "../src/crop.js";
import { extractEmbeddings } from "../src/embeddings.js";
import { CropError, DecodeError } from "../src/errors.js";
import { extractLandmarks, writePairRecord } from "../src/landmarks.js";
import { SyntheticEmbeddingBackend, SyntheticLandmarkBackend } from "../src/synthetic.js";
import { openVideo } from "../src/video.js";

const FACE_POINTS = 478;
const POSE_POINTS = 33;

// A 2-second clip at 20 FPS, dual-panel sized.
const CLIP = "synthetic:sample?frames=40&fps=20&width=320&height=120";

const tempDirs: string[] = [];
function tempDir(): string {
  const dir = mkdtempSync(join(tmpdir(), "adapter-test-"));
  tempDirs.push(dir);
  return dir;
}
afterAll(() => {
  for (const dir of tempDirs) rmSync(dir, { recursive: true, force: true });
});

/** The primary toolkit is consumed only through its CLI and file formats. */
function primaryCli(args: string[]): string {
  return execFileSync("syncurator", args, { encoding: "utf-8" });
}

async function extractPair(outDir: string, options: { faceFailRate?: number } = {}) {
  const video = await openVideo(CLIP);
  const crops = splitDualPanel(video.width, video.height);
  const backend = new SyntheticLandmarkBackend({ seed: 11, ...options });
  const source = await extractLandmarks({
    video, crop: crops.source, view: "source", videoId: "sample", outDir, backend,
  });
  const edited = await extractLandmarks({
    video: await openVideo(CLIP),
    crop: crops.edited, view: "edited", videoId: "sample", outDir, backend,
  });
  writePairRecord(outDir, "sample", "edited_pair", "sample.source.json", "sample.edited.json");
  return { source, edited };
}

describe("landmark extraction", () => {
  it("emits schema-valid bundles for a 2-second clip", async () => {
    const outDir = tempDir();
    const { source } = await extractPair(outDir);
    expect(source.frameCount).toBe(40);

    const bundle = JSON.parse(readFileSync(join(outDir, "sample.source.json"), "utf-8"));
    expect(bundle.view).toBe("source");
    expect(bundle.fps).toBe(20);
    expect(bundle.frames).toHaveLength(40);
    for (const frame of bundle.frames) {
      if (frame.face !== null) expect(frame.face).toHaveLength(FACE_POINTS);
      if (frame.pose !== null) expect(frame.pose).toHaveLength(POSE_POINTS);
    }
    expect(bundle.frames.map((f: any) => f.frame_index)).toEqual(
      Array.from({ length: 40 }, (_, i) => i),
    );
  });

  it("round-trips through the primary parser with zero schema errors", async () => {
    const outDir = tempDir();
    await extractPair(outDir);
    const runDir = tempDir();
    // Exit code 0 means every file parsed and scored.
    primaryCli(["score", outDir, "--out", runDir]);
    const scores = JSON.parse(readFileSync(join(runDir, "scores.json"), "utf-8"));
    expect(scores.errors).toBeUndefined();
    expect(scores.scores).toHaveLength(1);
    expect(scores.scores[0].pair_id).toBe("sample");
  });

  it("coverage and frame counts agree between adapter log and primary report", async () => {
    const outDir = tempDir();
    const { source, edited } = await extractPair(outDir, { faceFailRate: 0.15 });
    const log = JSON.parse(readFileSync(source.logPath, "utf-8"));
    expect(log.frame_count).toBe(40);
    expect(log.coverage_face).toBeCloseTo(1 - log.face_failures.length / 40, 12);

    const runDir = tempDir();
    primaryCli(["score", outDir, "--out", runDir]);
    const row = JSON.parse(readFileSync(join(runDir, "scores.json"), "utf-8")).scores[0];
    // Same backend seed drives both views: identical failure frames, so the
    // primary's min-over-views coverage equals the per-view log coverage.
    expect(row.coverage_face).toBeCloseTo(log.coverage_face, 12);
    expect(row.coverage_pose).toBeCloseTo(log.coverage_pose, 12);
    expect(edited.coverageFace).toBeCloseTo(log.coverage_face, 12);
  });

  it("marks failed detections as nulls at the logged frames", async () => {
    const outDir = tempDir();
    const { source } = await extractPair(outDir, { faceFailRate: 0.3 });
    const log = JSON.parse(readFileSync(source.logPath, "utf-8"));
    expect(log.face_failures.length).toBeGreaterThan(0);
    const bundle = JSON.parse(readFileSync(source.bundlePath, "utf-8"));
    for (const index of log.face_failures) {
      expect(bundle.frames[index].face).toBeNull();
    }
    const detected = bundle.frames.filter((f: any) => f.face !== null);
    expect(detected.length + log.face_failures.length).toBe(40);
  });

  it("is deterministic for identical options", async () => {
    const dirA = tempDir();
    const dirB = tempDir();
    await extractPair(dirA);
    await extractPair(dirB);
    expect(readFileSync(join(dirA, "sample.source.json"), "utf-8")).toBe(
      readFileSync(join(dirB, "sample.source.json"), "utf-8"),
    );
  });
});

describe("embedding extraction", () => {
  const SRC = "synthetic:left?frames=40&fps=20&width=160&height=120";
  const EDIT = "synthetic:right?frames=40&fps=20&width=160&height=120";

  async function extractEmb(outDir: string, withText = true) {
    return extractEmbeddings({
      source: await openVideo(SRC),
      edited: await openVideo(EDIT),
      pairId: "sample",
      outDir,
      backend: new SyntheticEmbeddingBackend({ seed: 7, faceFailRate: 0.1 }),
      prompts: withText
        ? { source: "a person", target: "a person wearing a hat" }
        : undefined,
    });
  }

  it("emits a sidecar bundle the primary evaluator accepts", async () => {
    const outDir = tempDir();
    const result = await extractEmb(outDir);
    expect(result.frameCount).toBe(40);

    const header = JSON.parse(readFileSync(result.headerPath, "utf-8"));
    expect(header.format).toBe("embeddings/v1");
    expect(header.layout).toBe("sidecar");
    expect(header.byte_order).toBe("little");
    expect(header.model.image).toContain("synthetic");

    const runDir = tempDir();
    primaryCli(["eval", "--embeddings", outDir, "--out", runDir]);
    const metrics = JSON.parse(readFileSync(join(runDir, "metrics.json"), "utf-8"));
    const row = metrics.pairs[0];
    expect(row.pair_id).toBe("sample");
    for (const name of [
      "directional_clip_image",
      "directional_clip_text_dual",
      "clip_text_align",
      "arcface_sim",
    ]) {
      expect(typeof row[name]).toBe("number");
      expect(Math.abs(row[name])).toBeLessThanOrEqual(1);
    }
    expect(row.faces_missing).toBe(result.facesMissing);
  });

  it("omits text sections when no prompts are given (primary reports N/A)", async () => {
    const outDir = tempDir();
    const result = await extractEmb(outDir, false);
    const header = JSON.parse(readFileSync(result.headerPath, "utf-8"));
    expect(header.sections.text_source).toBeUndefined();
    expect(header.text_dim).toBeNull();

    const runDir = tempDir();
    primaryCli(["eval", "--embeddings", outDir, "--out", runDir]);
    const row = JSON.parse(readFileSync(join(runDir, "metrics.json"), "utf-8")).pairs[0];
    expect(row.directional_clip_text_dual).toBeNull();
    expect(row.clip_text_align).toBeNull();
    expect(typeof row.directional_clip_image).toBe("number");
  });

  it("rejects views with mismatched frame counts", async () => {
    const outDir = tempDir();
    await expect(
      extractEmbeddings({
        source: await openVideo(SRC),
        edited: await openVideo("synthetic:short?frames=10&fps=20&width=160&height=120"),
        pairId: "bad",
        outDir,
        backend: new SyntheticEmbeddingBackend(),
      }),
    ).rejects.toThrow(/frame count/);
  });
});

describe("inputs and crops", () => {
  it("missing video raises DecodeError", async () => {
    await expect(openVideo("/nonexistent/clip.mp4")).rejects.toThrow(DecodeError);
  });

  it("frame directories decode raw RGB frames", async () => {
    const dir = tempDir();
    const frame = Buffer.alloc(4 * 2 * 3, 7);
    writeFileSync(join(dir, "f0.rgb"), frame);
    writeFileSync(join(dir, "f1.rgb"), frame);
    writeFileSync(
      join(dir, "meta.json"),
      JSON.stringify({ fps: 20, width: 4, height: 2, frames: ["f0.rgb", "f1.rgb"] }),
    );
    const video = await openVideo(dir);
    expect(video.frameCount).toBe(2);
    let count = 0;
    for await (const f of video.frames()) {
      expect(f.data.length).toBe(24);
      count++;
    }
    expect(count).toBe(2);
  });

  it("validates crop bounds and overlap", () => {
    expect(() =>
      validateCrops(
        {
          source: { x: 0, y: 0, width: 200, height: 120 },
          edited: { x: 150, y: 0, width: 170, height: 120 },
        },
        320,
        120,
      ),
    ).toThrow(CropError); // overlapping panels
    expect(() =>
      validateCrops(
        {
          source: { x: 0, y: 0, width: 400, height: 120 },
          edited: { x: 160, y: 0, width: 160, height: 120 },
        },
        320,
        120,
      ),
    ).toThrow(CropError); // out of bounds
    const crops = splitDualPanel(320, 120);
    expect(crops.source.width + crops.edited.width).toBe(320);
    expect(() => validateCrops(crops, 320, 120)).not.toThrow();
  });

  it("parses crop flags", () => {
    expect(parseCrop("0,0,160,120")).toEqual({ x: 0, y: 0, width: 160, height: 120 });
    expect(() => parseCrop("1,2,3")).toThrow(CropError);
  });
});
