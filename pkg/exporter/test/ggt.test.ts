import { describe, expect, it } from 'vitest';
import { readFileSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';
import { encodeTensor, readTensor, writeTensor } from '../src/ggt.js';
import { FormatError } from '../src/errors.js';
import { SplitMix32 } from '../src/prng.js';
import { tmp } from './util.js';

describe('tensor container', () => {
  it('freezes the byte layout', () => {
    // magic, rank, dims as uint32 LE, then float32 LE payload
    const buf = encodeTensor([2, 1, 2], [1.5, -2.0, 0.25, 7.0]);
    expect(buf.toString('hex')).toBe(
      '47475431'
      + '03000000'
      + '02000000' + '01000000' + '02000000'
      + '0000c03f' + '000000c0' + '0000803e' + '0000e040',
    );
  });

  it('round-trips random tensors through disk', () => {
    const dir = tmp();
    const rng = new SplitMix32(991);
    for (let trial = 0; trial < 20; trial++) {
      const rank = 1 + (rng.nextUint32() % 4);
      const dims: number[] = [];
      for (let i = 0; i < rank; i++) dims.push(1 + (rng.nextUint32() % 5));
      const count = dims.reduce((a, b) => a * b, 1);
      const data = new Float32Array(count);
      for (let i = 0; i < count; i++) data[i] = Math.fround(rng.nextSigned() * 10);
      const path = join(dir, `t${trial}.ggt`);
      writeTensor(path, dims, data);
      const back = readTensor(path);
      expect(back.dims).toEqual(dims);
      expect(Array.from(back.data)).toEqual(Array.from(data));
    }
  });

  it('rejects bad ranks and mismatched payloads on encode', () => {
    expect(() => encodeTensor([], [])).toThrow(FormatError);
    expect(() => encodeTensor(new Array(9).fill(1), [0])).toThrow(FormatError);
    expect(() => encodeTensor([2, 2], [1, 2, 3])).toThrow(FormatError);
    expect(() => encodeTensor([0], [])).toThrow(FormatError);
  });

  it('rejects corrupt files on read', () => {
    const dir = tmp();
    const good = encodeTensor([2, 2], [1, 2, 3, 4]);

    const cases: [string, Buffer][] = [
      ['magic.ggt', Buffer.concat([Buffer.from('NOPE'), good.subarray(4)])],
      ['rank0.ggt', patchUint32(good, 4, 0)],
      ['rank9.ggt', patchUint32(good, 4, 9)],
      ['short.ggt', good.subarray(0, good.length - 4)],
      ['long.ggt', Buffer.concat([good, Buffer.from([0, 0, 0, 0])])],
      ['header.ggt', good.subarray(0, 6)],
    ];
    for (const [name, bytes] of cases) {
      const path = join(dir, name);
      writeFileSync(path, bytes);
      expect(() => readTensor(path), name).toThrow(FormatError);
    }
  });

  it('writes are stable across repeat calls', () => {
    const dir = tmp();
    const dims = [3, 2, 4];
    const data = Array.from({ length: 24 }, (_, i) => Math.sin(i));
    writeTensor(join(dir, 'a.ggt'), dims, data);
    writeTensor(join(dir, 'b.ggt'), dims, data);
    expect(readFileSync(join(dir, 'a.ggt')).equals(readFileSync(join(dir, 'b.ggt')))).toBe(true);
  });
});

function patchUint32(src: Buffer, offset: number, value: number): Buffer {
  const copy = Buffer.from(src);
  copy.writeUInt32LE(value, offset);
  return copy;
}
