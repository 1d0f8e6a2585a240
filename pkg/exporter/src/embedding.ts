import { cellStats } from './image.js';
import { RgbImage } from './pnm.js';
import { projectionMatrix } from './prng.js';
import { requireModel } from './keypoints.js';

export const EMBEDDING_MODELS = ['patchstats-v1'] as const;

const STAT_GRID = 8;

/*
 Stand-in image encoder: 8x8 cell statistics projected through a fixed
 seeded matrix, then L2-normalized. Same pixels in, same bytes out, which
 is the property the bank build actually depends on; a learned encoder can
 register under a new model id without touching callers.
*/
export function computeEmbedding(image: RgbImage, dim: number, model = 'patchstats-v1'): number[] {
  requireModel(model, EMBEDDING_MODELS, 'embedding');
  if (!Number.isInteger(dim) || dim < 2) {
    throw new RangeError(`embedding dim must be an integer >= 2, got ${dim}`);
  }
  const stats = cellStats(image, STAT_GRID, STAT_GRID);
  const raw: number[] = [1.0]; // constant term keeps flat images off the zero vector
  for (const c of stats) {
    raw.push(c.meanR, c.meanG, c.meanB, c.spread);
  }
  const m = projectionMatrix(model, dim, raw.length);
  const out = new Array<number>(dim).fill(0);
  for (let j = 0; j < dim; j++) {
    let acc = 0;
    for (let i = 0; i < raw.length; i++) acc += m[j * raw.length + i] * raw[i];
    out[j] = acc;
  }
  let norm = 0;
  for (const v of out) norm += v * v;
  norm = Math.sqrt(norm);
  if (norm < 1e-12) {
    // unreachable with the constant term, but never emit a zero vector
    out[0] = 1.0;
    norm = 1.0;
  }
  return out.map(v => v / norm);
}
