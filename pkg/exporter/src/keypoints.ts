import { existsSync, readFileSync } from 'node:fs';
import { FormatError, NoHandDetected } from './errors.js';

export interface HandAnnotation {
  chirality: 'R' | 'L';
  joints: number[][];
  contact: [number, number];
  category?: string;
}

export interface KeypointRecord {
  chirality: 'R' | 'L';
  joints: number[][];
}

export const KEYPOINT_MODELS = ['annotation-v1'] as const;

/*
 The hand-pose stage is an adapter over sidecar annotations: <image>.hand.json
 next to the image holds the 21x3 joints (meters, camera frame), chirality,
 and the annotated contact pixel. Detector-and-lift integration can slot in
 as another model id later; contact points stay manual either way.
*/
export function sidecarPath(imagePath: string): string {
  return imagePath.replace(/\.[^./]+$/, '') + '.hand.json';
}

export function loadAnnotation(imagePath: string): HandAnnotation {
  const path = sidecarPath(imagePath);
  if (!existsSync(path)) {
    throw new NoHandDetected(`no hand annotation for ${imagePath} (expected ${path})`);
  }
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, 'utf8'));
  } catch (e) {
    throw new FormatError(`unreadable annotation ${path}: ${(e as Error).message}`);
  }
  const rec = raw as Partial<HandAnnotation>;
  if (!Array.isArray(rec.joints) || rec.joints.length === 0) {
    throw new NoHandDetected(`annotation ${path} has no joints`);
  }
  if (rec.joints.length !== 21) {
    throw new FormatError(`annotation ${path}: expected 21 joints, got ${rec.joints.length}`);
  }
  for (const row of rec.joints) {
    if (!Array.isArray(row) || row.length !== 3 || !row.every(v => Number.isFinite(v))) {
      throw new FormatError(`annotation ${path}: joints must be finite triples`);
    }
  }
  if (rec.chirality !== 'R' && rec.chirality !== 'L') {
    throw new FormatError(`annotation ${path}: chirality must be "R" or "L"`);
  }
  if (!Array.isArray(rec.contact) || rec.contact.length !== 2
      || !rec.contact.every(v => Number.isFinite(v))) {
    throw new FormatError(`annotation ${path}: contact must be [u, v]`);
  }
  return {
    chirality: rec.chirality,
    joints: rec.joints,
    contact: [rec.contact[0], rec.contact[1]],
    category: typeof rec.category === 'string' ? rec.category : undefined,
  };
}

/** Keypoint record in the pipeline's keypoints.json schema. */
export function exportKeypoints(imagePath: string, model = 'annotation-v1'): KeypointRecord {
  requireModel(model, KEYPOINT_MODELS, 'keypoints');
  const ann = loadAnnotation(imagePath);
  return { chirality: ann.chirality, joints: ann.joints };
}

export function requireModel(id: string, known: readonly string[], kind: string): void {
  if (!known.includes(id)) {
    throw new FormatError(`unknown ${kind} model '${id}' (known: ${known.join(', ')})`);
  }
}
