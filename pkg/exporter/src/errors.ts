export class ExportError extends Error {}

export class NoHandDetected extends ExportError {}

export class FormatError extends ExportError {}

export class DuplicateId extends ExportError {}
