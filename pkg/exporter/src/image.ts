import { RgbImage } from './pnm.js';

export interface CellStats {
  meanR: number;
  meanG: number;
  meanB: number;
  /** Luminance standard deviation inside the cell. */
  spread: number;
  gradX: number;
  gradY: number;
}

function luminance(r: number, g: number, b: number): number {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

/*
 Area-weighted cell statistics over a rows x cols partition. Pixel p belongs
 to cell floor(p * cells / extent); no interpolation, so results are exact
 integer sums scaled once at the end and replay identically.
*/
export function cellStats(image: RgbImage, rows: number, cols: number): CellStats[] {
  const { width, height, pixels } = image;
  const sums = new Float64Array(rows * cols * 4); // r, g, b, count
  const lumSum = new Float64Array(rows * cols);
  const lumSq = new Float64Array(rows * cols);
  for (let y = 0; y < height; y++) {
    const cy = Math.min(rows - 1, Math.floor((y * rows) / height));
    for (let x = 0; x < width; x++) {
      const cx = Math.min(cols - 1, Math.floor((x * cols) / width));
      const cell = cy * cols + cx;
      const o = (y * width + x) * 3;
      const r = pixels[o] / 255;
      const g = pixels[o + 1] / 255;
      const b = pixels[o + 2] / 255;
      sums[cell * 4] += r;
      sums[cell * 4 + 1] += g;
      sums[cell * 4 + 2] += b;
      sums[cell * 4 + 3] += 1;
      const lum = luminance(r, g, b);
      lumSum[cell] += lum;
      lumSq[cell] += lum * lum;
    }
  }
  const out: CellStats[] = [];
  for (let cy = 0; cy < rows; cy++) {
    for (let cx = 0; cx < cols; cx++) {
      const cell = cy * cols + cx;
      const n = sums[cell * 4 + 3] || 1;
      const meanLum = lumSum[cell] / n;
      const variance = Math.max(0, lumSq[cell] / n - meanLum * meanLum);
      out.push({
        meanR: sums[cell * 4] / n,
        meanG: sums[cell * 4 + 1] / n,
        meanB: sums[cell * 4 + 2] / n,
        spread: Math.sqrt(variance),
        gradX: 0,
        gradY: 0,
      });
    }
  }
  // central differences of cell luminance, clamped at the borders
  const lum = out.map(c => luminance(c.meanR, c.meanG, c.meanB));
  for (let cy = 0; cy < rows; cy++) {
    for (let cx = 0; cx < cols; cx++) {
      const cell = cy * cols + cx;
      const xm = cy * cols + Math.max(0, cx - 1);
      const xp = cy * cols + Math.min(cols - 1, cx + 1);
      const ym = Math.max(0, cy - 1) * cols + cx;
      const yp = Math.min(rows - 1, cy + 1) * cols + cx;
      out[cell].gradX = (lum[xp] - lum[xm]) / 2;
      out[cell].gradY = (lum[yp] - lum[ym]) / 2;
    }
  }
  return out;
}
