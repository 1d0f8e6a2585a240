import { cellStats } from './image.js';
import { RgbImage } from './pnm.js';
import { projectionMatrix } from './prng.js';
import { requireModel } from './keypoints.js';

export const FEATURE_MODELS = ['patchgrid-v1'] as const;

export interface FeatureGrid {
  dims: [number, number, number];
  /** Row-major (grid, grid, depth). */
  data: Float32Array;
}

/*
 Dense descriptor grid from per-cell statistics plus a position encoding,
 projected to the requested channel depth. The position terms keep spatially
 distant cells separable even on texture-flat regions, so correspondence
 over these maps stays meaningful.
*/
export function computeFeatures(
  image: RgbImage,
  grid: number,
  depth: number,
  model = 'patchgrid-v1',
): FeatureGrid {
  requireModel(model, FEATURE_MODELS, 'features');
  if (!Number.isInteger(grid) || grid < 2) {
    throw new RangeError(`feature grid must be an integer >= 2, got ${grid}`);
  }
  if (!Number.isInteger(depth) || depth < 8) {
    throw new RangeError(`feature depth must be an integer >= 8, got ${depth}`);
  }
  const stats = cellStats(image, grid, grid);
  const rawLen = 9;
  const m = projectionMatrix(model, depth, rawLen);
  const data = new Float32Array(grid * grid * depth);
  const raw = new Float64Array(rawLen);
  for (let row = 0; row < grid; row++) {
    for (let col = 0; col < grid; col++) {
      const c = stats[row * grid + col];
      raw[0] = 1.0;
      raw[1] = c.meanR;
      raw[2] = c.meanG;
      raw[3] = c.meanB;
      raw[4] = c.spread;
      raw[5] = c.gradX;
      raw[6] = c.gradY;
      raw[7] = Math.sin((Math.PI * (row + 0.5)) / grid);
      raw[8] = Math.cos((Math.PI * (col + 0.5)) / grid);
      const base = (row * grid + col) * depth;
      for (let j = 0; j < depth; j++) {
        let acc = 0;
        for (let i = 0; i < rawLen; i++) acc += m[j * rawLen + i] * raw[i];
        data[base + j] = acc;
      }
    }
  }
  return { dims: [grid, grid, depth], data };
}
