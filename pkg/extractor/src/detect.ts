/**
 * Color-key instance detector with per-instance masks.
 *
 * Pixels within a per-category color tolerance are grouped into
 * 4-connected components; each sufficiently large component becomes one
 * detection with a center-format box, a confidence derived from color
 * proximity, and a run-length-encoded instance mask.  This is the builtin
 * no-download backend for synthetic and color-keyed imagery; real detector
 * backends implement the same `Detector` interface.
 */

import { Raster } from './image.js';
import { encodeMask, RleMask } from './rle.js';
import { ColorKeyCategory, DetectorConfig, DetectionRecord } from './types.js';

export interface DetectedInstance {
  record: DetectionRecord;
  mask: RleMask;
}

export interface Detector {
  readonly name: string;
  detect(imageId: string, image: Raster): DetectedInstance[];
}

function channelDistance(a: [number, number, number], b: [number, number, number]): number {
  return Math.max(Math.abs(a[0] - b[0]), Math.abs(a[1] - b[1]), Math.abs(a[2] - b[2]));
}

export class ColorKeyDetector implements Detector {
  readonly name = 'color-key-v1';

  constructor(private readonly config: DetectorConfig) {
    if (config.categories.length === 0) {
      throw new Error('detector config lists no categories');
    }
  }

  detect(imageId: string, image: Raster): DetectedInstance[] {
    const { width, height } = image;
    const assigned = new Int16Array(width * height).fill(-1);
    const distance = new Float32Array(width * height);
    for (let y = 0; y < height; y++) {
      for (let x = 0; x < width; x++) {
        const rgb = image.pixel(x, y);
        let best = -1;
        let bestDistance = Infinity;
        for (let c = 0; c < this.config.categories.length; c++) {
          const cat = this.config.categories[c];
          const d = channelDistance(rgb, cat.color);
          if (d <= cat.tolerance && d < bestDistance) {
            best = c;
            bestDistance = d;
          }
        }
        assigned[y * width + x] = best;
        distance[y * width + x] = bestDistance;
      }
    }

    const visited = new Uint8Array(width * height);
    const instances: DetectedInstance[] = [];
    let detId = 0;
    for (let start = 0; start < width * height; start++) {
      if (visited[start] || assigned[start] < 0) continue;
      const categoryIndex = assigned[start];
      const component: number[] = [];
      const queue = [start];
      visited[start] = 1;
      while (queue.length > 0) {
        const index = queue.pop()!;
        component.push(index);
        const x = index % width;
        const y = (index - x) / width;
        for (const [nx, ny] of [[x - 1, y], [x + 1, y], [x, y - 1], [x, y + 1]]) {
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          const ni = ny * width + nx;
          if (!visited[ni] && assigned[ni] === categoryIndex) {
            visited[ni] = 1;
            queue.push(ni);
          }
        }
      }
      if (component.length < this.config.minArea) continue;

      const category = this.config.categories[categoryIndex];
      let x0 = width;
      let y0 = height;
      let x1 = 0;
      let y1 = 0;
      let meanDistance = 0;
      const bits = new Uint8Array(width * height);
      for (const index of component) {
        const x = index % width;
        const y = (index - x) / width;
        x0 = Math.min(x0, x);
        y0 = Math.min(y0, y);
        x1 = Math.max(x1, x);
        y1 = Math.max(y1, y);
        meanDistance += distance[index];
        bits[index] = 1;
      }
      meanDistance /= component.length;
      const proximity = 1 - meanDistance / Math.max(category.tolerance, 1);
      const record: DetectionRecord = {
        det_id: detId,
        cx: (x0 + x1 + 1) / 2,
        cy: (y0 + y1 + 1) / 2,
        w: x1 - x0 + 1,
        h: y1 - y0 + 1,
        category: category.category,
        score: Math.min(0.99, 0.5 + 0.49 * Math.max(0, proximity)),
        mask_ref: `${imageId}/m${detId}`,
      };
      instances.push({ record, mask: encodeMask(bits, width, height) });
      detId++;
    }
    return instances;
  }
}

export function loadDetectorConfig(raw: unknown): DetectorConfig {
  const doc = raw as { categories?: ColorKeyCategory[]; min_area?: number };
  if (!doc || !Array.isArray(doc.categories)) {
    throw new Error('detector config must list categories');
  }
  return {
    categories: doc.categories,
    minArea: doc.min_area ?? 32,
  };
}
