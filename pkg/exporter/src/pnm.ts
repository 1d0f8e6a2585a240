import { readFileSync } from 'node:fs';
import { FormatError } from './errors.js';

export interface RgbImage {
  width: number;
  height: number;
  /** Row-major RGB bytes, 3 per pixel. */
  pixels: Uint8Array;
}

/*
 Binary PPM (P6) reader, 8-bit only. Header tokens may be separated by any
 whitespace and '#' comments, same family as the PGM masks the pipeline
 reads.
*/
export function readPpm(path: string): RgbImage {
  const blob = readFileSync(path);
  if (blob.length < 2 || blob[0] !== 0x50 || blob[1] !== 0x36) {
    throw new FormatError(`not a binary PPM (P6) file: ${path}`);
  }
  let pos = 2;
  const nextToken = (): number => {
    for (;;) {
      while (pos < blob.length && isSpace(blob[pos])) pos++;
      if (pos < blob.length && blob[pos] === 0x23) {
        while (pos < blob.length && blob[pos] !== 0x0a) pos++;
        continue;
      }
      break;
    }
    const start = pos;
    while (pos < blob.length && !isSpace(blob[pos])) pos++;
    if (pos === start) throw new FormatError(`truncated PPM header: ${path}`);
    const value = Number(blob.subarray(start, pos).toString('ascii'));
    if (!Number.isInteger(value) || value < 0) {
      throw new FormatError(`bad PPM header token: ${path}`);
    }
    return value;
  };
  const width = nextToken();
  const height = nextToken();
  const maxval = nextToken();
  if (maxval !== 255) throw new FormatError(`only 8-bit PPM supported: ${path}`);
  pos++; // single whitespace byte after maxval
  const need = width * height * 3;
  if (blob.length - pos < need) {
    throw new FormatError(`truncated PPM payload: ${path}`);
  }
  return { width, height, pixels: new Uint8Array(blob.subarray(pos, pos + need)) };
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}
