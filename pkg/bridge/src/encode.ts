import { readFileSync } from "node:fs";

import { loadEncoder } from "./encoders.js";
import { writeVectorsAtomic } from "./ftsvec.js";

export class EmptyInput extends Error {}

export interface BridgeConfig {
  model: string;
  input: string;
  output: string;
  batchSize?: number; // default 200
  normalize?: boolean; // default true
  device?: string;
}

interface InputSentence {
  key: string;
  text: string;
}

/**
 * Parse the JSONL sentence file. Each line needs a text field ("cleaned",
 * falling back to "text") and a key: either an explicit "key" field or the
 * pipeline's doc_id/index pair, joined as "doc_id:index".
 */
export function readSentenceFile(path: string): InputSentence[] {
  const out: InputSentence[] = [];
  for (const line of readFileSync(path, "utf-8").split("\n")) {
    if (!line.trim()) continue;
    const record = JSON.parse(line);
    const text = record.cleaned ?? record.text;
    if (typeof text !== "string") {
      throw new Error(`line ${out.length + 1}: no "cleaned" or "text" field`);
    }
    let key = record.key;
    if (key === undefined && record.doc_id !== undefined && record.index !== undefined) {
      key = `${record.doc_id}:${record.index}`;
    }
    if (typeof key !== "string") {
      throw new Error(`line ${out.length + 1}: no usable key`);
    }
    out.push({ key, text });
  }
  return out;
}

function normalizeRow(row: Float32Array): Float32Array {
  let sumSquares = 0;
  for (const v of row) sumSquares += v * v;
  const norm = Math.sqrt(sumSquares);
  if (norm === 0) {
    throw new Error("cannot normalize a zero embedding row");
  }
  const out = new Float32Array(row.length);
  for (let i = 0; i < row.length; i++) out[i] = row[i] / norm;
  return out;
}

/** Encode a sentence file into an FTSVEC01 vector file, keys in input order. */
export async function encodeFile(config: BridgeConfig): Promise<{ rows: number; dim: number }> {
  const batchSize = config.batchSize ?? 200;
  const normalize = config.normalize ?? true;
  if (batchSize < 1) {
    throw new Error(`batch size must be >= 1, got ${batchSize}`);
  }
  const sentences = readSentenceFile(config.input);
  if (sentences.length === 0) {
    throw new EmptyInput(`${config.input}: no sentences to encode`);
  }
  const encoder = await loadEncoder(config.model, config.device);
  const rows: Float32Array[] = [];
  for (let start = 0; start < sentences.length; start += batchSize) {
    const batch = sentences.slice(start, start + batchSize);
    const encoded = await encoder.encodeBatch(batch.map((s) => s.text));
    for (const row of encoded) {
      rows.push(normalize ? normalizeRow(row) : row);
    }
  }
  writeVectorsAtomic(
    config.output,
    rows,
    sentences.map((s) => s.key),
  );
  return { rows: rows.length, dim: rows[0].length };
}
