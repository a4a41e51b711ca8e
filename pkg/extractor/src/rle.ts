/**
 * Mask archive with run-length-encoded binary instance masks.
 *
 * Archive layout (JSON, UTF-8):
 *   { "version": 1,
 *     "masks": { "<mask_ref>": { "width": W, "height": H, "rle": [n0, n1, ...] } } }
 *
 * `rle` encodes the mask in row-major pixel order as alternating run
 * lengths, ALWAYS starting with a run of zeros (a leading zero-length run
 * is legal, so a mask starting with ones begins `[0, k, ...]`).  The run
 * lengths must sum to exactly W*H.
 */

import { readFileSync } from 'node:fs';

export interface RleMask {
  width: number;
  height: number;
  rle: number[];
}

export interface MaskArchive {
  version: 1;
  masks: Record<string, RleMask>;
}

export function encodeMask(bits: Uint8Array, width: number, height: number): RleMask {
  if (bits.length !== width * height) {
    throw new Error(`mask has ${bits.length} pixels, expected ${width * height}`);
  }
  const rle: number[] = [];
  let current = 0;
  let run = 0;
  for (const bit of bits) {
    const value = bit === 0 ? 0 : 1;
    if (value === current) {
      run++;
    } else {
      rle.push(run);
      current = value;
      run = 1;
    }
  }
  rle.push(run);
  return { width, height, rle };
}

export function decodeMask(mask: RleMask): Uint8Array {
  const total = mask.width * mask.height;
  const bits = new Uint8Array(total);
  let value = 0;
  let offset = 0;
  for (const run of mask.rle) {
    if (run < 0 || !Number.isInteger(run)) {
      throw new Error(`bad run length ${run}`);
    }
    if (value === 1) {
      bits.fill(1, offset, offset + run);
    }
    offset += run;
    value = 1 - value;
  }
  if (offset !== total) {
    throw new Error(`run lengths sum to ${offset}, expected ${total}`);
  }
  return bits;
}

export function loadMaskArchive(path: string): MaskArchive {
  const doc = JSON.parse(readFileSync(path, 'utf-8'));
  if (doc.version !== 1 || typeof doc.masks !== 'object') {
    throw new Error(`${path}: unsupported mask archive`);
  }
  return doc as MaskArchive;
}
