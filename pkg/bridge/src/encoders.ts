/**
 * Sentence encoders behind one async interface, selected by model id.
 *
 * - "hash:<dim>" is a built-in deterministic feature-hashing encoder: no
 *   model download, identical output on every machine. Meant for tests,
 *   CI, and plumbing checks, not for semantic quality.
 * - Any other id is treated as a sentence-transformer identifier and loaded
 *   through transformers.js (feature-extraction pipeline, mean pooling).
 *   The dependency is resolved dynamically so offline installs stay lean.
 */

export class ModelLoadError extends Error {}

export interface Encoder {
  dim: number;
  encodeBatch(sentences: string[]): Promise<Float32Array[]>;
}

const MAX_TOKENS = 256;

/** FNV-1a, 32-bit. */
function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

export function hashEncoder(dim: number): Encoder {
  if (!Number.isInteger(dim) || dim < 2) {
    throw new ModelLoadError(`hash encoder needs an integer dim >= 2, got ${dim}`);
  }
  return {
    dim,
    async encodeBatch(sentences: string[]): Promise<Float32Array[]> {
      return sentences.map((sentence, index) => {
        const vec = new Float32Array(dim);
        let tokens: string[] = sentence.toLowerCase().match(/[a-z0-9]+/g) ?? [];
        if (tokens.length > MAX_TOKENS) {
          console.warn(
            `truncating sentence ${index} from ${tokens.length} to ${MAX_TOKENS} tokens`,
          );
          tokens = tokens.slice(0, MAX_TOKENS);
        }
        for (const token of tokens) {
          const h = fnv1a(token);
          const bucket = h % dim;
          vec[bucket] += h & 0x80000000 ? -1 : 1;
        }
        if (tokens.length === 0) {
          vec[0] = 1; // keep empty sentences representable and nonzero
        }
        return vec;
      });
    },
  };
}

async function transformersEncoder(modelId: string, device?: string): Promise<Encoder> {
  let pipeline: any;
  try {
    // dynamic specifier keeps the backend an optional install
    const backend = "@xenova/transformers";
    ({ pipeline } = await import(/* @vite-ignore */ backend));
  } catch (err) {
    throw new ModelLoadError(
      `transformers.js is not installed; "npm install @xenova/transformers" ` +
        `to encode with model "${modelId}" (${(err as Error).message})`,
    );
  }
  let extractor: any;
  try {
    extractor = await pipeline("feature-extraction", modelId, {
      ...(device ? { device } : {}),
    });
  } catch (err) {
    throw new ModelLoadError(
      `could not load model "${modelId}": ${(err as Error).message}`,
    );
  }
  let dim = 0;
  return {
    get dim() {
      return dim;
    },
    async encodeBatch(sentences: string[]): Promise<Float32Array[]> {
      // normalization happens downstream so raw and normalized runs share a path
      const output = await extractor(sentences, { pooling: "mean", normalize: false });
      const [n, d] = output.dims.slice(-2);
      dim = d;
      const flat: Float32Array = output.data;
      const rows: Float32Array[] = [];
      for (let i = 0; i < n; i++) {
        rows.push(flat.slice(i * d, (i + 1) * d));
      }
      return rows;
    },
  } as Encoder;
}

export async function loadEncoder(modelId: string, device?: string): Promise<Encoder> {
  if (modelId.startsWith("hash:")) {
    return hashEncoder(Number(modelId.slice("hash:".length)));
  }
  if (!modelId) {
    throw new ModelLoadError("empty model identifier");
  }
  return transformersEncoder(modelId, device);
}
