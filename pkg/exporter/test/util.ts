import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

export const TEST_DIR = dirname(fileURLToPath(import.meta.url));
export const PKG_DIR = dirname(TEST_DIR);
export const FIXTURES = join(TEST_DIR, 'fixtures');

export function fixtureImage(stem: string): string {
  return join(FIXTURES, `${stem}.ppm`);
}

export function tmp(prefix = 'ggexp-'): string {
  return mkdtempSync(join(tmpdir(), prefix));
}

/** Minimal P6 bytes for hand-built reader tests. */
export function ppmBytes(width: number, height: number, rgb: number[]): Buffer {
  return Buffer.concat([
    Buffer.from(`P6\n${width} ${height}\n255\n`, 'ascii'),
    Buffer.from(rgb),
  ]);
}
