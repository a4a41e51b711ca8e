/** The three extraction stages, file-to-file. */

import { readFileSync, readdirSync } from 'node:fs';
import { basename, join } from 'node:path';
import { Detector } from './detect.js';
import { ImageEncoder, TextEncoder } from './encoders.js';
import { KIND_CANDIDATE, KIND_TEXT_T1, KIND_TEXT_T2, writeFaem } from './faem.js';
import { Raster } from './image.js';
import { decodeMask, loadMaskArchive, MaskArchive, RleMask } from './rle.js';
import { CropSpecFile, CropSpecRecord, DetectionsFile, TemplateRow } from './types.js';
import { atomicWriteJson } from './util.js';

export interface DetectRunResult {
  detections: DetectionsFile;
  archive: MaskArchive;
  skipped: string[];
}

export function runDetect(imagesDir: string, detector: Detector): DetectRunResult {
  const files = readdirSync(imagesDir)
    .filter((name) => name.toLowerCase().endsWith('.png'))
    .sort();
  const detections: DetectionsFile = { version: 1, images: [] };
  const archive: MaskArchive = { version: 1, masks: {} };
  const skipped: string[] = [];
  for (const name of files) {
    const imageId = name.replace(/\.png$/i, '');
    let raster: Raster;
    try {
      raster = Raster.fromPngFile(join(imagesDir, name));
    } catch (error) {
      console.warn(`warning: skipping unreadable image ${name}: ${error}`);
      skipped.push(name);
      continue;
    }
    const instances = detector.detect(imageId, raster);
    detections.images.push({
      image_id: imageId,
      width: raster.width,
      height: raster.height,
      detections: instances.map((inst) => inst.record),
    });
    for (const inst of instances) {
      archive.masks[inst.record.mask_ref!] = inst.mask;
    }
  }
  return { detections, archive, skipped };
}

export function writeDetectOutputs(
  result: DetectRunResult,
  detectionsPath: string,
  masksPath: string,
): void {
  atomicWriteJson(detectionsPath, result.detections);
  atomicWriteJson(masksPath, result.archive);
}

function maskBits(archive: MaskArchive, ref: string | null): Uint8Array | null {
  if (ref === null || !(ref in archive.masks)) return null;
  return decodeMask(archive.masks[ref]);
}

export interface EmbedCropsResult {
  written: string[];
  failed: string[];
}

/**
 * Embed each crop-spec file's pairs in pair_id order into one candidate
 * embedding file.  In delete mode the pixels outside the two instance
 * masks are zeroed before encoding; a pair referencing a missing mask is
 * fatal for its image (reported, image skipped, others continue).
 */
export function runEmbedCrops(
  cropSpecPaths: string[],
  imagesDir: string,
  archive: MaskArchive,
  encoder: ImageEncoder,
  outDir: string,
): EmbedCropsResult {
  const written: string[] = [];
  const failed: string[] = [];
  for (const specPath of cropSpecPaths) {
    const spec = JSON.parse(readFileSync(specPath, 'utf-8')) as CropSpecFile;
    if (spec.version !== 1) {
      throw new Error(`${specPath}: unsupported crop-spec version`);
    }
    let raster: Raster;
    try {
      raster = Raster.fromPngFile(join(imagesDir, `${spec.image_id}.png`));
    } catch (error) {
      console.error(`error: ${spec.image_id}: cannot read image: ${error}`);
      failed.push(spec.image_id);
      continue;
    }
    const ordered = [...spec.pairs].sort((a, b) => a.pair_id - b.pair_id);
    const rows: Float32Array[] = [];
    let imageFailed = false;
    for (const pair of ordered) {
      let view = cropView(raster, pair);
      if (pair.background_mode === 'delete') {
        const humanBits = maskBits(archive, pair.human_mask_ref);
        const objectBits = maskBits(archive, pair.object_mask_ref);
        if (humanBits === null || objectBits === null) {
          console.error(
            `error: ${spec.image_id}: pair ${pair.pair_id} needs instance masks ` +
            `in delete mode (${pair.human_mask_ref}, ${pair.object_mask_ref})`,
          );
          imageFailed = true;
          break;
        }
        const x0 = Math.max(0, Math.floor(pair.crop.cx - pair.crop.w / 2));
        const y0 = Math.max(0, Math.floor(pair.crop.cy - pair.crop.h / 2));
        view = view.applyMasks([humanBits, objectBits], x0, y0, raster.width);
      }
      rows.push(encoder.encodeImage(view));
    }
    if (imageFailed) {
      failed.push(spec.image_id);
      continue;
    }
    const outPath = join(outDir, `candidates_${spec.image_id}.faem`);
    writeFaem(outPath, KIND_CANDIDATE, rows);
    atomicWriteJson(`${outPath}.meta.json`, {
      encoder: encoder.name,
      dim: encoder.dim,
      source: basename(specPath),
    });
    written.push(outPath);
  }
  return { written, failed };
}

function cropView(raster: Raster, pair: CropSpecRecord): Raster {
  const { cx, cy, w, h } = pair.crop;
  return raster.crop(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2);
}

export function readTemplates(path: string): TemplateRow[] {
  const rows: TemplateRow[] = [];
  const lines = readFileSync(path, 'utf-8').split('\n').filter((line) => line.trim() !== '');
  for (const line of lines) {
    const row = JSON.parse(line) as TemplateRow;
    if (typeof row.hoi_id !== 'number' || typeof row.t1 !== 'string' || typeof row.t2 !== 'string') {
      throw new Error(`${path}: malformed template line: ${line}`);
    }
    rows.push(row);
  }
  rows.sort((a, b) => a.hoi_id - b.hoi_id);
  rows.forEach((row, index) => {
    if (row.hoi_id !== index) {
      throw new Error(`${path}: template hoi_ids not contiguous at ${row.hoi_id}`);
    }
  });
  return rows;
}

export function runEmbedTemplates(
  templates: TemplateRow[],
  encoder: TextEncoder,
  outT1: string,
  outT2: string,
): void {
  writeFaem(outT1, KIND_TEXT_T1, templates.map((row) => encoder.encodeText(row.t1)));
  writeFaem(outT2, KIND_TEXT_T2, templates.map((row) => encoder.encodeText(row.t2)));
  for (const path of [outT1, outT2]) {
    atomicWriteJson(`${path}.meta.json`, {
      encoder: encoder.name,
      dim: encoder.dim,
      rows: templates.length,
    });
  }
}

export { loadMaskArchive };
