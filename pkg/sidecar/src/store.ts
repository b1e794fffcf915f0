/**
 * CAES embedding-store writer and reader.
 *
 * Layout (all little-endian): 4-byte magic "CAES", u16 format version,
 * u32 dimension, u64 record count, then per record a u16 id length,
 * the UTF-8 id bytes, and dimension float32 components. Records are
 * sorted by raw id bytes. The pipeline reads these files; its loader
 * is the authority, and the interop test round-trips through it.
 */

import * as fs from "fs";

export const MAGIC = Buffer.from("CAES", "ascii");
export const FORMAT_VERSION = 1;

export class StoreError extends Error {
  constructor(message: string, readonly offset: number) {
    super(`${message} (byte offset ${offset})`);
  }
}

export interface StoreEntry {
  id: string;
  vector: Float32Array;
}

export function writeStore(path: string, dimension: number, entries: StoreEntry[]): void {
  if (dimension < 1) {
    throw new RangeError("store dimension must be >= 1");
  }
  const encoded: Array<{ id: Buffer; payload: Buffer }> = [];
  const seen = new Set<string>();
  for (const { id, vector } of entries) {
    if (seen.has(id)) {
      throw new RangeError(`duplicate id ${JSON.stringify(id)}`);
    }
    seen.add(id);
    if (vector.length !== dimension) {
      throw new RangeError(
        `vector for id ${JSON.stringify(id)} has dimension ${vector.length}, store dimension is ${dimension}`,
      );
    }
    for (const x of vector) {
      if (!Number.isFinite(x)) {
        throw new RangeError(`vector for id ${JSON.stringify(id)} has non-finite entries`);
      }
    }
    const idBytes = Buffer.from(id, "utf-8");
    if (idBytes.length > 0xffff) {
      throw new RangeError(`id ${JSON.stringify(id)} exceeds 65535 UTF-8 bytes`);
    }
    const payload = Buffer.alloc(4 * dimension);
    for (let i = 0; i < dimension; i++) {
      payload.writeFloatLE(vector[i]!, 4 * i);
    }
    encoded.push({ id: idBytes, payload });
  }
  encoded.sort((a, b) => Buffer.compare(a.id, b.id));

  const header = Buffer.alloc(4 + 2 + 4 + 8);
  MAGIC.copy(header, 0);
  header.writeUInt16LE(FORMAT_VERSION, 4);
  header.writeUInt32LE(dimension, 6);
  header.writeBigUInt64LE(BigInt(encoded.length), 10);

  const parts: Buffer[] = [header];
  for (const { id, payload } of encoded) {
    const len = Buffer.alloc(2);
    len.writeUInt16LE(id.length, 0);
    parts.push(len, id, payload);
  }
  fs.writeFileSync(path, Buffer.concat(parts));
}

export function readStore(path: string): { dimension: number; entries: StoreEntry[] } {
  const data = fs.readFileSync(path);
  if (data.length < 18 || !data.subarray(0, 4).equals(MAGIC)) {
    throw new StoreError("bad magic", 0);
  }
  const version = data.readUInt16LE(4);
  if (version !== FORMAT_VERSION) {
    throw new StoreError(`unsupported format version ${version}`, 4);
  }
  const dimension = data.readUInt32LE(6);
  const count = data.readBigUInt64LE(10);
  const entries: StoreEntry[] = [];
  let pos = 18;
  let previous: Buffer | null = null;
  for (let i = 0n; i < count; i++) {
    const recordStart = pos;
    if (pos + 2 > data.length) {
      throw new StoreError("truncated record header", recordStart);
    }
    const idLen = data.readUInt16LE(pos);
    pos += 2;
    if (pos + idLen + 4 * dimension > data.length) {
      throw new StoreError("truncated record", recordStart);
    }
    const idBytes = data.subarray(pos, pos + idLen);
    if (previous !== null && Buffer.compare(previous, idBytes) >= 0) {
      throw new StoreError("record ids out of order", recordStart);
    }
    previous = Buffer.from(idBytes);
    pos += idLen;
    const vector = new Float32Array(dimension);
    for (let j = 0; j < dimension; j++) {
      vector[j] = data.readFloatLE(pos + 4 * j);
    }
    pos += 4 * dimension;
    entries.push({ id: idBytes.toString("utf-8"), vector });
  }
  if (pos !== data.length) {
    throw new StoreError("trailing data after last record", pos);
  }
  return { dimension, entries };
}
