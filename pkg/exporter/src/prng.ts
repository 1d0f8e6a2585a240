/*
 Deterministic PRNG for provider projection matrices. splitmix32 over a
 string seed; pure integer ops so every platform produces the same stream.
 Never use Math.random in providers: re-running an export must be
 byte-identical.
*/

export function hashSeed(text: string): number {
  let h = 0x9e3779b9;
  for (let i = 0; i < text.length; i++) {
    h = Math.imul(h ^ text.charCodeAt(i), 0x85ebca6b);
    h = (h << 13) | (h >>> 19);
  }
  return h >>> 0;
}

export class SplitMix32 {
  private state: number;

  constructor(seed: number) {
    this.state = seed >>> 0;
  }

  nextUint32(): number {
    this.state = (this.state + 0x9e3779b9) >>> 0;
    let z = this.state;
    z = Math.imul(z ^ (z >>> 16), 0x21f0aaad);
    z = Math.imul(z ^ (z >>> 15), 0x735a2d97);
    return (z ^ (z >>> 15)) >>> 0;
  }

  /** Uniform in [-1, 1). */
  nextSigned(): number {
    return (this.nextUint32() / 0x80000000) - 1.0;
  }
}

/** Fixed rows x cols matrix keyed by name, row-major. */
export function projectionMatrix(name: string, rows: number, cols: number): Float64Array {
  const rng = new SplitMix32(hashSeed(`${name}:${rows}x${cols}`));
  const m = new Float64Array(rows * cols);
  for (let i = 0; i < m.length; i++) {
    m[i] = rng.nextSigned();
  }
  return m;
}
