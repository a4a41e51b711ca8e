/**
 * Synthetic color-keyed sample scenes for exercising the pipeline without
 * real photos: solid shapes on a white background, one color per category,
 * laid out on a seeded non-overlapping grid.
 */

import { join } from 'node:path';
import { mkdirSync } from 'node:fs';
import { Raster } from './image.js';
import { mulberry32 } from './random.js';
import { atomicWriteJson } from './util.js';

export const SAMPLE_COLORS: Record<string, [number, number, number]> = {
  person: [40, 80, 200],
  motorcycle: [200, 40, 40],
  apple: [40, 180, 60],
  bench: [150, 100, 60],
};

/** Detector config whose category ids line up with the core demo tables. */
export function sampleDetectorConfig() {
  return {
    categories: [
      { category: 0, name: 'person', color: SAMPLE_COLORS.person, tolerance: 40 },
      { category: 1, name: 'motorcycle', color: SAMPLE_COLORS.motorcycle, tolerance: 40 },
      { category: 2, name: 'apple', color: SAMPLE_COLORS.apple, tolerance: 40 },
      { category: 3, name: 'bench', color: SAMPLE_COLORS.bench, tolerance: 40 },
    ],
    min_area: 64,
  };
}

export function makeSampleImages(outDir: string, count: number, seed = 1234): string[] {
  mkdirSync(outDir, { recursive: true });
  const rng = mulberry32(seed);
  const written: string[] = [];
  const objectNames = ['motorcycle', 'apple', 'bench'];
  for (let k = 0; k < count; k++) {
    const image = Raster.blank(400, 300, [255, 255, 255]);
    const slots = [40, 150, 260];
    const persons = 1 + Math.floor(rng() * 2);
    for (let p = 0; p < persons; p++) {
      const x = slots[p] + Math.floor(rng() * 30);
      const y = 30 + Math.floor(rng() * 30);
      image.fillRect(x, y, x + 50, y + 110, SAMPLE_COLORS.person);
    }
    const objects = 1 + Math.floor(rng() * 2);
    for (let o = 0; o < objects; o++) {
      const name = objectNames[Math.floor(rng() * objectNames.length)];
      const x = slots[o] + Math.floor(rng() * 30);
      const y = 180 + Math.floor(rng() * 20);
      image.fillRect(x, y, x + 70, y + 60, SAMPLE_COLORS[name]);
    }
    const path = join(outDir, `sample${String(k).padStart(3, '0')}.png`);
    image.toPngFile(path);
    written.push(path);
  }
  atomicWriteJson(join(outDir, 'detector_config.json'), sampleDetectorConfig());
  return written;
}
