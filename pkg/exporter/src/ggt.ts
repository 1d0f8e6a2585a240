import { readFileSync, writeFileSync } from 'node:fs';
import { FormatError } from './errors.js';

const MAGIC = 'GGT1';
const MAX_RANK = 8;

/*
 Binary tensor container consumed by the pipeline: 4 magic bytes, uint32
 little-endian rank then dims, float32 little-endian row-major payload.
 DataView keeps the byte order explicit regardless of host endianness.
*/
export function encodeTensor(dims: number[], data: Float32Array | number[]): Buffer {
  if (dims.length < 1 || dims.length > MAX_RANK) {
    throw new FormatError(`tensor rank must be 1..${MAX_RANK}, got ${dims.length}`);
  }
  let count = 1;
  for (const d of dims) {
    if (!Number.isInteger(d) || d < 1) throw new FormatError(`bad dim ${d}`);
    count *= d;
  }
  if (data.length !== count) {
    throw new FormatError(`payload has ${data.length} values, dims need ${count}`);
  }
  const buf = Buffer.alloc(4 + 4 * (1 + dims.length) + 4 * count);
  buf.write(MAGIC, 0, 'ascii');
  const view = new DataView(buf.buffer, buf.byteOffset);
  view.setUint32(4, dims.length, true);
  dims.forEach((d, i) => view.setUint32(8 + 4 * i, d, true));
  const base = 8 + 4 * dims.length;
  for (let i = 0; i < count; i++) {
    view.setFloat32(base + 4 * i, Number(data[i]), true);
  }
  return buf;
}

export function writeTensor(path: string, dims: number[], data: Float32Array | number[]): void {
  writeFileSync(path, encodeTensor(dims, data));
}

export function readTensor(path: string): { dims: number[]; data: Float32Array } {
  const blob = readFileSync(path);
  if (blob.length < 8 || blob.toString('ascii', 0, 4) !== MAGIC) {
    throw new FormatError(`not a GGT1 tensor: ${path}`);
  }
  const view = new DataView(blob.buffer, blob.byteOffset, blob.byteLength);
  const rank = view.getUint32(4, true);
  if (rank < 1 || rank > MAX_RANK) throw new FormatError(`implausible rank ${rank}: ${path}`);
  if (blob.length < 8 + 4 * rank) throw new FormatError(`truncated dims: ${path}`);
  const dims: number[] = [];
  let count = 1;
  for (let i = 0; i < rank; i++) {
    const d = view.getUint32(8 + 4 * i, true);
    dims.push(d);
    count *= d;
  }
  const base = 8 + 4 * rank;
  if (blob.length - base !== 4 * count) {
    throw new FormatError(`payload size mismatch: ${path}`);
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) data[i] = view.getFloat32(base + 4 * i, true);
  return { dims, data };
}
