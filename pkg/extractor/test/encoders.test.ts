import { describe, expect, it } from 'vitest';
import { GridStatsImageEncoder, TrigramTextEncoder } from '../src/encoders.js';
import { Raster } from '../src/image.js';
import { SAMPLE_COLORS } from '../src/samples.js';

function norm(v: Float32Array): number {
  let acc = 0;
  for (const x of v) acc += x * x;
  return Math.sqrt(acc);
}

function cosine(a: Float32Array, b: Float32Array): number {
  let dot = 0;
  for (let i = 0; i < a.length; i++) dot += a[i] * b[i];
  return dot / (norm(a) * norm(b));
}

describe('image encoder', () => {
  const encoder = new GridStatsImageEncoder(64);

  it('is deterministic across runs', () => {
    const image = Raster.blank(60, 40, [10, 200, 30]);
    image.fillRect(5, 5, 30, 30, SAMPLE_COLORS.person);
    const a = encoder.encodeImage(image);
    const b = encoder.encodeImage(image);
    expect(Array.from(a)).toEqual(Array.from(b));
    expect(cosine(a, b)).toBeGreaterThan(0.999);
  });

  it('returns unit-norm rows', () => {
    const image = Raster.blank(32, 32, [128, 60, 90]);
    expect(norm(encoder.encodeImage(image))).toBeCloseTo(1.0, 5);
  });

  it('never emits a zero row, even for an all-black crop', () => {
    const image = Raster.blank(16, 16, [0, 0, 0]);
    expect(norm(encoder.encodeImage(image))).toBeCloseTo(1.0, 5);
  });

  it('distinguishes differently colored scenes', () => {
    const red = Raster.blank(32, 32, [220, 20, 20]);
    const blue = Raster.blank(32, 32, [20, 20, 220]);
    expect(cosine(encoder.encodeImage(red), encoder.encodeImage(blue))).toBeLessThan(0.99);
  });
});

describe('text encoder', () => {
  const encoder = new TrigramTextEncoder(64);

  it('identical strings produce identical rows', () => {
    const a = encoder.encodeText('a photo of a person riding');
    const b = encoder.encodeText('a photo of a person riding');
    expect(Array.from(a)).toEqual(Array.from(b));
  });

  it('different strings produce different rows', () => {
    const a = encoder.encodeText('a photo of a person riding a motorcycle');
    const b = encoder.encodeText('a photo of a person eating an apple');
    expect(cosine(a, b)).toBeLessThan(0.999);
  });

  it('rows are unit norm', () => {
    expect(norm(encoder.encodeText('anything at all'))).toBeCloseTo(1.0, 5);
  });
});
