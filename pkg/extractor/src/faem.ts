/**
 * Writer (and reader, for tests) of the core's binary embedding container:
 * "FAEM" magic, u32 LE version 1, u8 kind, 3 zero bytes, u32 LE rows,
 * u32 LE cols, then rows*cols float32 LE row-major.
 */

import { readFileSync } from 'node:fs';
import { atomicWriteFile } from './util.js';

export const KIND_CANDIDATE = 0;
export const KIND_TEXT_T1 = 1;
export const KIND_TEXT_T2 = 2;

const HEADER_BYTES = 20;

export function writeFaem(path: string, kind: number, rows: Float32Array[]): void {
  const count = rows.length;
  const cols = count > 0 ? rows[0].length : 0;
  for (const row of rows) {
    if (row.length !== cols) {
      throw new Error(`ragged embedding rows: ${row.length} vs ${cols}`);
    }
    for (const value of row) {
      if (!Number.isFinite(value)) {
        throw new Error('non-finite embedding value');
      }
    }
  }
  const buffer = Buffer.alloc(HEADER_BYTES + count * cols * 4);
  buffer.write('FAEM', 0, 'ascii');
  buffer.writeUInt32LE(1, 4);
  buffer.writeUInt8(kind, 8);
  buffer.writeUInt32LE(count, 12);
  buffer.writeUInt32LE(cols, 16);
  for (let r = 0; r < count; r++) {
    for (let c = 0; c < cols; c++) {
      buffer.writeFloatLE(rows[r][c], HEADER_BYTES + (r * cols + c) * 4);
    }
  }
  atomicWriteFile(path, buffer);
}

export function readFaem(path: string): { kind: number; rows: Float32Array[] } {
  const buffer = readFileSync(path);
  if (buffer.length < HEADER_BYTES || buffer.toString('ascii', 0, 4) !== 'FAEM') {
    throw new Error(`${path}: not an embedding file`);
  }
  if (buffer.readUInt32LE(4) !== 1) {
    throw new Error(`${path}: unsupported version`);
  }
  const kind = buffer.readUInt8(8);
  const count = buffer.readUInt32LE(12);
  const cols = buffer.readUInt32LE(16);
  if (buffer.length !== HEADER_BYTES + count * cols * 4) {
    throw new Error(`${path}: truncated payload`);
  }
  const rows: Float32Array[] = [];
  for (let r = 0; r < count; r++) {
    const row = new Float32Array(cols);
    for (let c = 0; c < cols; c++) {
      row[c] = buffer.readFloatLE(HEADER_BYTES + (r * cols + c) * 4);
    }
    rows.push(row);
  }
  return { kind, rows };
}
