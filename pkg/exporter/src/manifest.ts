import { existsSync, readFileSync, appendFileSync, writeFileSync } from 'node:fs';
import { DuplicateId, FormatError } from './errors.js';

export interface EntryRecord {
  id: string;
  chirality: 'R' | 'L';
  joints: number[][];
  embedding: number[];
  contact: [number, number];
  image_dims: [number, number];
  feature_ref: string;
  image_ref?: string;
  category?: string;
}

export function manifestPath(bankDir: string): string {
  return `${bankDir}/manifest.jsonl`;
}

export function existingIds(bankDir: string): Set<string> {
  const path = manifestPath(bankDir);
  const ids = new Set<string>();
  if (!existsSync(path)) return ids;
  const lines = readFileSync(path, 'utf8').split('\n');
  for (let i = 0; i < lines.length; i++) {
    if (!lines[i].trim()) continue;
    let rec: { id?: string };
    try {
      rec = JSON.parse(lines[i]);
    } catch (e) {
      throw new FormatError(`${path}:${i + 1}: ${(e as Error).message}`);
    }
    if (typeof rec.id !== 'string') throw new FormatError(`${path}:${i + 1}: entry without id`);
    ids.add(rec.id);
  }
  return ids;
}

/*
 One JSON object per line, keys in the bank's documented order. Contact must
 sit inside the pixel grid (inclusive half-pixel border), same bound the
 ingestion side enforces, so a bad annotation fails here with the file name
 instead of later inside the pipeline.
*/
export function checkRecord(rec: EntryRecord): void {
  if (!rec.id) throw new FormatError('entry id must be non-empty');
  const [w, h] = rec.image_dims;
  if (!(w >= 1 && h >= 1)) throw new FormatError(`entry ${rec.id}: bad image_dims`);
  const [u, v] = rec.contact;
  if (u < -0.5 || u > w - 0.5 || v < -0.5 || v > h - 0.5) {
    throw new FormatError(`entry ${rec.id}: contact (${u}, ${v}) outside ${w}x${h}`);
  }
  const wrist = rec.joints[0];
  const indexMcp = rec.joints[5];
  const span = Math.hypot(
    indexMcp[0] - wrist[0], indexMcp[1] - wrist[1], indexMcp[2] - wrist[2],
  );
  if (span >= 0.5) {
    throw new FormatError(`entry ${rec.id}: hand span ${span.toFixed(3)} m exceeds 0.5 m`);
  }
}

export function appendEntries(bankDir: string, records: EntryRecord[], append: boolean): void {
  const known = append ? existingIds(bankDir) : new Set<string>();
  for (const rec of records) {
    checkRecord(rec);
    if (known.has(rec.id)) throw new DuplicateId(`entry id '${rec.id}' already in bank`);
    known.add(rec.id);
  }
  const text = records.map(r => JSON.stringify(r)).join('\n') + '\n';
  if (append) {
    appendFileSync(manifestPath(bankDir), text);
  } else {
    writeFileSync(manifestPath(bankDir), text);
  }
}
