#!/usr/bin/env node
import { parseArgs } from 'node:util';
import { writeFileSync } from 'node:fs';
import { readPpm } from './pnm.js';
import { exportKeypoints, KEYPOINT_MODELS } from './keypoints.js';
import { computeEmbedding, EMBEDDING_MODELS } from './embedding.js';
import { computeFeatures, FEATURE_MODELS } from './features.js';
import { writeTensor } from './ggt.js';
import { defaultJob, runExport } from './exportJob.js';
import { ExportError } from './errors.js';

const USAGE = `usage: gesturegrasp-export <command> [options]

commands:
  export     batch-export images into a bank directory
  keypoints  emit one image's hand keypoints as JSON
  embedding  emit one image's embedding as JSON
  features   emit one image's dense feature tensor as .ggt

run 'gesturegrasp-export <command> --help' for per-command options.`;

function emitJson(payload: unknown, out: string | undefined): void {
  const text = JSON.stringify(payload, null, 2) + '\n';
  if (out) {
    writeFileSync(out, text);
  } else {
    process.stdout.write(text);
  }
}

function intOption(raw: string | undefined, fallback: number, name: string): number {
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isInteger(value) || value < 1) {
    throw new RangeError(`--${name} must be a positive integer, got '${raw}'`);
  }
  return value;
}

function cmdExport(argv: string[]): number {
  const { values, positionals } = parseArgs({
    args: argv,
    allowPositionals: true,
    options: {
      out: { type: 'string' },
      append: { type: 'boolean', default: false },
      'embedding-dim': { type: 'string' },
      grid: { type: 'string' },
      depth: { type: 'string' },
      'keypoint-model': { type: 'string', default: KEYPOINT_MODELS[0] },
      'embedding-model': { type: 'string', default: EMBEDDING_MODELS[0] },
      'feature-model': { type: 'string', default: FEATURE_MODELS[0] },
      device: { type: 'string', default: 'cpu' },
      help: { type: 'boolean', default: false },
    },
  });
  if (values.help) {
    process.stdout.write(
      'usage: gesturegrasp-export export --out BANK_DIR [--append] [--embedding-dim N]\n'
      + '         [--grid N] [--depth N] [--keypoint-model M] [--embedding-model M]\n'
      + '         [--feature-model M] [--device D] IMAGE [IMAGE ...]\n');
    return 0;
  }
  if (!values.out) throw new RangeError('--out BANK_DIR is required');
  if (positionals.length === 0) throw new RangeError('at least one input image is required');

  const job = defaultJob(positionals, values.out);
  job.append = values.append;
  job.embeddingDim = intOption(values['embedding-dim'], job.embeddingDim, 'embedding-dim');
  job.featureGrid = intOption(values.grid, job.featureGrid, 'grid');
  job.featureDepth = intOption(values.depth, job.featureDepth, 'depth');
  job.keypointModel = values['keypoint-model'];
  job.embeddingModel = values['embedding-model'];
  job.featureModel = values['feature-model'];
  job.device = values.device;

  const result = runExport(job);
  for (const entry of result.entries) {
    process.stdout.write(`exported ${entry.id} -> ${result.bankDir}\n`);
  }
  return 0;
}

function cmdKeypoints(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      image: { type: 'string' },
      model: { type: 'string', default: KEYPOINT_MODELS[0] },
      out: { type: 'string' },
      help: { type: 'boolean', default: false },
    },
  });
  if (values.help) {
    process.stdout.write(
      'usage: gesturegrasp-export keypoints --image IMG [--model M] [--out FILE]\n');
    return 0;
  }
  if (!values.image) throw new RangeError('--image is required');
  emitJson(exportKeypoints(values.image, values.model), values.out);
  return 0;
}

function cmdEmbedding(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      image: { type: 'string' },
      dim: { type: 'string' },
      model: { type: 'string', default: EMBEDDING_MODELS[0] },
      out: { type: 'string' },
      help: { type: 'boolean', default: false },
    },
  });
  if (values.help) {
    process.stdout.write(
      'usage: gesturegrasp-export embedding --image IMG [--dim N] [--model M] [--out FILE]\n');
    return 0;
  }
  if (!values.image) throw new RangeError('--image is required');
  const dim = intOption(values.dim, 32, 'dim');
  const vec = computeEmbedding(readPpm(values.image), dim, values.model);
  emitJson({ embedding: Array.from(vec) }, values.out);
  return 0;
}

function cmdFeatures(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      image: { type: 'string' },
      out: { type: 'string' },
      grid: { type: 'string' },
      depth: { type: 'string' },
      model: { type: 'string', default: FEATURE_MODELS[0] },
      help: { type: 'boolean', default: false },
    },
  });
  if (values.help) {
    process.stdout.write(
      'usage: gesturegrasp-export features --image IMG --out FILE.ggt'
      + ' [--grid N] [--depth N] [--model M]\n');
    return 0;
  }
  if (!values.image) throw new RangeError('--image is required');
  if (!values.out) throw new RangeError('--out FILE.ggt is required');
  const grid = intOption(values.grid, 16, 'grid');
  const depth = intOption(values.depth, 16, 'depth');
  const fm = computeFeatures(readPpm(values.image), grid, depth, values.model);
  writeTensor(values.out, fm.dims, fm.data);
  process.stdout.write(`wrote ${fm.dims.join('x')} tensor to ${values.out}\n`);
  return 0;
}

export function main(argv: string[]): number {
  const command = argv[0];
  const rest = argv.slice(1);
  try {
    switch (command) {
      case 'export': return cmdExport(rest);
      case 'keypoints': return cmdKeypoints(rest);
      case 'embedding': return cmdEmbedding(rest);
      case 'features': return cmdFeatures(rest);
      case '--help':
        process.stdout.write(USAGE + '\n');
        return 0;
      case undefined:
        process.stderr.write(USAGE + '\n');
        return 2;
      default:
        process.stderr.write(`gesturegrasp-export: unknown command '${command}'\n${USAGE}\n`);
        return 2;
    }
  } catch (err) {
    if (err instanceof ExportError) {
      process.stderr.write(
        `gesturegrasp-export ${command}: error: ${err.constructor.name}: ${err.message}\n`);
      return 1;
    }
    if (err instanceof RangeError || (err as { code?: string }).code?.startsWith('ERR_PARSE_ARGS')) {
      process.stderr.write(`gesturegrasp-export ${command}: error: ${(err as Error).message}\n`);
      return 2;
    }
    if ((err as NodeJS.ErrnoException).code === 'ENOENT') {
      process.stderr.write(`gesturegrasp-export ${command}: error: ${(err as Error).message}\n`);
      return 1;
    }
    throw err;
  }
}

process.exitCode = main(process.argv.slice(2));
