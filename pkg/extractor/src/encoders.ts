/**
 * Feature encoders behind pluggable interfaces.
 *
 * The builtin implementations are deterministic and training-free, so the
 * pipeline runs end-to-end on any CPU with nothing to download: images map
 * to grid statistics (per-cell color means and gradient energy) and texts
 * to hashed character trigrams, each pushed through a seeded random
 * sign-projection to the target dimension and L2-normalized.  Swapping in
 * a real vision-language model is a matter of implementing these two
 * interfaces; downstream files carry no trace of which encoder produced
 * them beyond the sidecar run metadata.
 */

import { Raster } from './image.js';
import { hashString, projectionSign } from './random.js';

export interface ImageEncoder {
  readonly name: string;
  readonly dim: number;
  encodeImage(image: Raster): Float32Array;
}

export interface TextEncoder {
  readonly name: string;
  readonly dim: number;
  encodeText(text: string): Float32Array;
}

const GRID = 8;
const HIST_BINS = 8;
const TEXT_BUCKETS = 256;

function project(features: number[], dim: number, seed: number): Float32Array {
  const out = new Float32Array(dim);
  for (let j = 0; j < dim; j++) {
    let acc = 0;
    for (let i = 0; i < features.length; i++) {
      acc += features[i] * projectionSign(seed, i, j);
    }
    out[j] = acc / Math.sqrt(features.length);
  }
  let norm = 0;
  for (const v of out) norm += v * v;
  norm = Math.sqrt(norm);
  if (norm === 0) {
    // degenerate input (e.g. fully-masked black crop): fall back to a
    // deterministic unit direction so the core never sees a zero row
    out[seed % dim] = 1;
    return out;
  }
  for (let j = 0; j < dim; j++) out[j] /= norm;
  return out;
}

export class GridStatsImageEncoder implements ImageEncoder {
  readonly name = 'grid-stats-v1';

  constructor(readonly dim: number = 64, private readonly seed: number = 0x5eed) {}

  encodeImage(image: Raster): Float32Array {
    const features: number[] = [];
    const cellW = image.width / GRID;
    const cellH = image.height / GRID;
    const luminance: number[][] = [];
    for (let gy = 0; gy < GRID; gy++) {
      const lumRow: number[] = [];
      for (let gx = 0; gx < GRID; gx++) {
        let r = 0;
        let g = 0;
        let b = 0;
        let n = 0;
        const x0 = Math.floor(gx * cellW);
        const y0 = Math.floor(gy * cellH);
        const x1 = Math.max(x0 + 1, Math.floor((gx + 1) * cellW));
        const y1 = Math.max(y0 + 1, Math.floor((gy + 1) * cellH));
        for (let y = y0; y < Math.min(y1, image.height); y++) {
          for (let x = x0; x < Math.min(x1, image.width); x++) {
            const [pr, pg, pb] = image.pixel(x, y);
            r += pr;
            g += pg;
            b += pb;
            n++;
          }
        }
        n = Math.max(n, 1);
        features.push(r / n / 255, g / n / 255, b / n / 255);
        lumRow.push((r + g + b) / n / (3 * 255));
      }
      luminance.push(lumRow);
    }
    // gradient energy between neighboring cells
    for (let gy = 0; gy < GRID; gy++) {
      for (let gx = 0; gx < GRID; gx++) {
        const here = luminance[gy][gx];
        features.push(gx + 1 < GRID ? Math.abs(luminance[gy][gx + 1] - here) : 0);
        features.push(gy + 1 < GRID ? Math.abs(luminance[gy + 1][gx] - here) : 0);
      }
    }
    // global color histogram
    const hist = new Array(3 * HIST_BINS).fill(0);
    const pixels = image.width * image.height;
    for (let y = 0; y < image.height; y++) {
      for (let x = 0; x < image.width; x++) {
        const rgb = image.pixel(x, y);
        for (let c = 0; c < 3; c++) {
          const bin = Math.min(HIST_BINS - 1, Math.floor((rgb[c] / 256) * HIST_BINS));
          hist[c * HIST_BINS + bin] += 1 / pixels;
        }
      }
    }
    features.push(...hist);
    return project(features, this.dim, this.seed);
  }
}

export class TrigramTextEncoder implements TextEncoder {
  readonly name = 'char-trigram-v1';

  constructor(readonly dim: number = 64, private readonly seed: number = 0x7e47) {}

  encodeText(text: string): Float32Array {
    const counts = new Array(TEXT_BUCKETS).fill(0);
    const padded = `^^${text.toLowerCase()}$$`;
    for (let i = 0; i + 3 <= padded.length; i++) {
      counts[hashString(padded.slice(i, i + 3)) % TEXT_BUCKETS] += 1;
    }
    let norm = Math.sqrt(counts.reduce((acc: number, v: number) => acc + v * v, 0));
    if (norm === 0) norm = 1;
    return project(counts.map((v: number) => v / norm), this.dim, this.seed);
  }
}

export function imageEncoderByName(name: string, dim: number): ImageEncoder {
  if (name === 'grid-stats-v1') return new GridStatsImageEncoder(dim);
  throw new Error(`unknown image encoder ${name}`);
}

export function textEncoderByName(name: string, dim: number): TextEncoder {
  if (name === 'char-trigram-v1') return new TrigramTextEncoder(dim);
  throw new Error(`unknown text encoder ${name}`);
}
