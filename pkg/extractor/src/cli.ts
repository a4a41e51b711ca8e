/**
 * extract: model-backed producer of the core pipeline's input files.
 *
 *   extract detect          images -> detections.json + RLE mask archive
 *   extract embed-crops     crop specs -> candidate embedding files
 *   extract embed-templates template list -> two text embedding files
 *   extract make-samples    synthetic color-keyed scenes for pipeline tests
 */

import { readFileSync } from 'node:fs';
import { parseArgs } from 'node:util';
import { ColorKeyDetector, loadDetectorConfig } from './detect.js';
import { imageEncoderByName, textEncoderByName } from './encoders.js';
import {
  loadMaskArchive,
  readTemplates,
  runDetect,
  runEmbedCrops,
  runEmbedTemplates,
  writeDetectOutputs,
} from './pipeline.js';
import { makeSampleImages } from './samples.js';

function usage(): never {
  console.error(
    'usage: extract <detect|embed-crops|embed-templates|make-samples> [options]\n' +
    '  detect          --images DIR --config FILE --out FILE --masks FILE\n' +
    '  embed-crops     --crop-specs FILE... --images DIR --masks FILE --out-dir DIR\n' +
    '                  [--encoder grid-stats-v1] [--dim 64]\n' +
    '  embed-templates --templates FILE --out-t1 FILE --out-t2 FILE\n' +
    '                  [--encoder char-trigram-v1] [--dim 64]\n' +
    '  make-samples    --out DIR [--count 5] [--seed 1234]',
  );
  process.exit(2);
}

function required(values: Record<string, unknown>, name: string): string {
  const value = values[name];
  if (typeof value !== 'string' || value === '') {
    console.error(`error: --${name} is required`);
    usage();
  }
  return value as string;
}

function cmdDetect(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      images: { type: 'string' },
      config: { type: 'string' },
      out: { type: 'string' },
      masks: { type: 'string' },
    },
  });
  const config = loadDetectorConfig(
    JSON.parse(readFileSync(required(values, 'config'), 'utf-8')),
  );
  const detector = new ColorKeyDetector(config);
  const result = runDetect(required(values, 'images'), detector);
  writeDetectOutputs(result, required(values, 'out'), required(values, 'masks'));
  const total = result.detections.images.reduce(
    (acc, image) => acc + image.detections.length, 0,
  );
  console.log(
    `${result.detections.images.length} images, ${total} detections, ` +
    `${Object.keys(result.archive.masks).length} masks` +
    (result.skipped.length ? `, ${result.skipped.length} skipped` : ''),
  );
  return 0;
}

function cmdEmbedCrops(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      'crop-specs': { type: 'string', multiple: true },
      images: { type: 'string' },
      masks: { type: 'string' },
      'out-dir': { type: 'string' },
      encoder: { type: 'string', default: 'grid-stats-v1' },
      dim: { type: 'string', default: '64' },
    },
  });
  const specs = (values['crop-specs'] ?? []) as string[];
  if (specs.length === 0) {
    console.error('error: --crop-specs is required');
    usage();
  }
  const archive = loadMaskArchive(required(values, 'masks'));
  const encoder = imageEncoderByName(values.encoder as string, Number(values.dim));
  const result = runEmbedCrops(
    specs, required(values, 'images'), archive, encoder, required(values, 'out-dir'),
  );
  console.log(`${result.written.length} embedding files written`);
  if (result.failed.length > 0) {
    console.error(`error: ${result.failed.length} image(s) skipped: ${result.failed.join(', ')}`);
    return 1;
  }
  return 0;
}

function cmdEmbedTemplates(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      templates: { type: 'string' },
      'out-t1': { type: 'string' },
      'out-t2': { type: 'string' },
      encoder: { type: 'string', default: 'char-trigram-v1' },
      dim: { type: 'string', default: '64' },
    },
  });
  const templates = readTemplates(required(values, 'templates'));
  const encoder = textEncoderByName(values.encoder as string, Number(values.dim));
  runEmbedTemplates(templates, encoder, required(values, 'out-t1'), required(values, 'out-t2'));
  console.log(`${templates.length} rows x ${encoder.dim} dims written to both text files`);
  return 0;
}

function cmdMakeSamples(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      out: { type: 'string' },
      count: { type: 'string', default: '5' },
      seed: { type: 'string', default: '1234' },
    },
  });
  const written = makeSampleImages(
    required(values, 'out'), Number(values.count), Number(values.seed),
  );
  console.log(`${written.length} sample images written (plus detector_config.json)`);
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case 'detect':
        return cmdDetect(rest);
      case 'embed-crops':
        return cmdEmbedCrops(rest);
      case 'embed-templates':
        return cmdEmbedTemplates(rest);
      case 'make-samples':
        return cmdMakeSamples(rest);
      default:
        usage();
    }
  } catch (error) {
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
