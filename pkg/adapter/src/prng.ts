/** Deterministic helpers so identical inputs always produce identical files. */

export function hashString(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

/** mulberry32: small, fast, reproducible across platforms. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) | 0;
    let t = Math.imul(state ^ (state >>> 15), 1 | state);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function gaussianVector(dim: number, seed: number): Float32Array {
  const rand = mulberry32(seed);
  const out = new Float32Array(dim);
  for (let i = 0; i < dim; i += 2) {
    const u = Math.max(rand(), 1e-12);
    const v = rand();
    const radius = Math.sqrt(-2 * Math.log(u));
    out[i] = radius * Math.cos(2 * Math.PI * v);
    if (i + 1 < dim) out[i + 1] = radius * Math.sin(2 * Math.PI * v);
  }
  return out;
}
