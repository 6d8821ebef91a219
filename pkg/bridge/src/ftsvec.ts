/**
 * FTSVEC01 binary vector format (the contract with the pipeline side):
 *
 *   bytes 0..7    magic "FTSVEC01"
 *   bytes 8..11   dim   (u32 little-endian)
 *   bytes 12..19  rows  (u64 little-endian)
 *   rows*dim float32 values, row-major, little-endian
 *   one length-prefixed UTF-8 key per row (u32 length + bytes)
 */

import { renameSync, writeFileSync } from "node:fs";

export const MAGIC = "FTSVEC01";

export function serializeVectors(rows: Float32Array[], keys: string[]): Buffer {
  if (rows.length !== keys.length) {
    throw new Error(`${rows.length} rows but ${keys.length} keys`);
  }
  const dim = rows.length > 0 ? rows[0].length : 0;
  for (const row of rows) {
    if (row.length !== dim) {
      throw new Error(`ragged rows: expected dim ${dim}, got ${row.length}`);
    }
    for (const value of row) {
      if (!Number.isFinite(value)) {
        throw new Error("refusing to serialize NaN/Inf vector entries");
      }
    }
  }
  const header = Buffer.alloc(8 + 4 + 8);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt32LE(dim, 8);
  header.writeBigUInt64LE(BigInt(rows.length), 12);

  const floats = Buffer.alloc(rows.length * dim * 4);
  rows.forEach((row, r) => {
    const base = r * dim * 4;
    for (let c = 0; c < dim; c++) {
      floats.writeFloatLE(row[c], base + c * 4);
    }
  });

  const keyChunks: Buffer[] = [];
  for (const key of keys) {
    const utf8 = Buffer.from(key, "utf-8");
    const len = Buffer.alloc(4);
    len.writeUInt32LE(utf8.length, 0);
    keyChunks.push(len, utf8);
  }
  return Buffer.concat([header, floats, ...keyChunks]);
}

/** Write atomically: serialize to a sibling temp file, then rename over. */
export function writeVectorsAtomic(
  path: string,
  rows: Float32Array[],
  keys: string[],
): void {
  const blob = serializeVectors(rows, keys);
  const tmp = `${path}.tmp-${process.pid}`;
  writeFileSync(tmp, blob);
  renameSync(tmp, path);
}
