/** Minimal RGBA raster wrapper over pngjs plus the crop/masking primitives. */

import { readFileSync, writeFileSync } from 'node:fs';
import { PNG } from 'pngjs';

export class Raster {
  constructor(
    readonly width: number,
    readonly height: number,
    /** RGBA, row-major, 4 bytes per pixel. */
    readonly data: Uint8Array,
  ) {
    if (data.length !== width * height * 4) {
      throw new Error(`raster buffer is ${data.length} bytes, expected ${width * height * 4}`);
    }
  }

  static blank(width: number, height: number, fill: [number, number, number] = [0, 0, 0]): Raster {
    const data = new Uint8Array(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      data[i * 4] = fill[0];
      data[i * 4 + 1] = fill[1];
      data[i * 4 + 2] = fill[2];
      data[i * 4 + 3] = 255;
    }
    return new Raster(width, height, data);
  }

  static fromPngFile(path: string): Raster {
    const png = PNG.sync.read(readFileSync(path));
    return new Raster(png.width, png.height, new Uint8Array(png.data));
  }

  toPngFile(path: string): void {
    const png = new PNG({ width: this.width, height: this.height });
    Buffer.from(this.data).copy(png.data);
    writeFileSync(path, PNG.sync.write(png));
  }

  pixel(x: number, y: number): [number, number, number] {
    const i = (y * this.width + x) * 4;
    return [this.data[i], this.data[i + 1], this.data[i + 2]];
  }

  setPixel(x: number, y: number, rgb: [number, number, number]): void {
    const i = (y * this.width + x) * 4;
    this.data[i] = rgb[0];
    this.data[i + 1] = rgb[1];
    this.data[i + 2] = rgb[2];
    this.data[i + 3] = 255;
  }

  fillRect(x0: number, y0: number, x1: number, y1: number, rgb: [number, number, number]): void {
    for (let y = Math.max(0, y0); y < Math.min(this.height, y1); y++) {
      for (let x = Math.max(0, x0); x < Math.min(this.width, x1); x++) {
        this.setPixel(x, y, rgb);
      }
    }
  }

  /**
   * Extract the axis-aligned region [x0, x1) x [y0, y1), clamped to the
   * frame.  Degenerate clamps yield a 1x1 raster rather than an error.
   */
  crop(x0: number, y0: number, x1: number, y1: number): Raster {
    const cx0 = Math.max(0, Math.min(this.width - 1, Math.floor(x0)));
    const cy0 = Math.max(0, Math.min(this.height - 1, Math.floor(y0)));
    const cx1 = Math.max(cx0 + 1, Math.min(this.width, Math.ceil(x1)));
    const cy1 = Math.max(cy0 + 1, Math.min(this.height, Math.ceil(y1)));
    const width = cx1 - cx0;
    const height = cy1 - cy0;
    const out = new Uint8Array(width * height * 4);
    for (let y = 0; y < height; y++) {
      const src = ((cy0 + y) * this.width + cx0) * 4;
      out.set(this.data.subarray(src, src + width * 4), y * width * 4);
    }
    return new Raster(width, height, out);
  }

  /** Zero every pixel whose bit is not set in any of the given masks. */
  applyMasks(masks: Uint8Array[], originX: number, originY: number, maskWidth: number): Raster {
    const out = new Uint8Array(this.data);
    for (let y = 0; y < this.height; y++) {
      for (let x = 0; x < this.width; x++) {
        const maskIndex = (originY + y) * maskWidth + (originX + x);
        const keep = masks.some((m) => m[maskIndex] === 1);
        if (!keep) {
          const i = (y * this.width + x) * 4;
          out[i] = 0;
          out[i + 1] = 0;
          out[i + 2] = 0;
        }
      }
    }
    return new Raster(this.width, this.height, out);
  }
}
