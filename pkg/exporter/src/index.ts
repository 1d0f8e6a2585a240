export { ExportError, NoHandDetected, FormatError, DuplicateId } from './errors.js';
export { readPpm } from './pnm.js';
export type { RgbImage } from './pnm.js';
export { encodeTensor, writeTensor, readTensor } from './ggt.js';
export { exportKeypoints, loadAnnotation, sidecarPath, KEYPOINT_MODELS } from './keypoints.js';
export type { HandAnnotation } from './keypoints.js';
export { computeEmbedding, EMBEDDING_MODELS } from './embedding.js';
export { computeFeatures, FEATURE_MODELS } from './features.js';
export type { FeatureGrid } from './features.js';
export { appendEntries, existingIds, manifestPath } from './manifest.js';
export type { EntryRecord } from './manifest.js';
export {
  defaultJob, entryId, runExport,
  DEFAULT_EMBEDDING_DIM, DEFAULT_FEATURE_GRID, DEFAULT_FEATURE_DEPTH,
} from './exportJob.js';
export type { ExportJob, ExportResult } from './exportJob.js';
