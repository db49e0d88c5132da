/**
 * Manifest-driven case loading. Consumes the generator's JSON-lines
 * manifest and PNG pairs verbatim; masks resample nearest-neighbor if the
 * network input size differs from the stored resolution.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';

import { GrayImage, loadPngGray } from './image.js';
import { PreparedImage, preprocess, PreprocessOptions } from './preprocess.js';

export interface ManifestEntry {
  case_id: string;
  source_case_id?: string;
  label: number;
  image_file: string;
  mask_file?: string;
  [key: string]: unknown;
}

export interface TrainCase {
  id: string;
  /** preprocessed single-channel plane; replicated to 3 channels at batch time */
  x: Float32Array;
  /** binary target mask at input resolution */
  mask: Float32Array;
  label: number;
}

export function readManifest(manifestPath: string): ManifestEntry[] {
  const lines = fs.readFileSync(manifestPath, 'utf-8').split('\n');
  const entries: ManifestEntry[] = [];
  for (const line of lines) {
    if (!line.trim()) continue;
    const entry = JSON.parse(line) as ManifestEntry;
    if (entry.case_id === undefined || entry.image_file === undefined || entry.label === undefined) {
      throw new Error(`manifest line missing case_id/image_file/label: ${line.slice(0, 120)}`);
    }
    entries.push(entry);
  }
  return entries;
}

export function maskToBinary(image: GrayImage, size: number): Float32Array {
  const out = new Float32Array(size * size);
  for (let y = 0; y < size; y++) {
    const sy = size === image.height ? y : Math.min(image.height - 1, Math.round((y * image.height) / size));
    for (let x = 0; x < size; x++) {
      const sx = size === image.width ? x : Math.min(image.width - 1, Math.round((x * image.width) / size));
      out[y * size + x] = image.data[sy * image.width + sx] > 127 ? 1 : 0;
    }
  }
  return out;
}

export function loadTrainCases(
  rootDir: string,
  entries: ManifestEntry[],
  prep: PreprocessOptions,
): TrainCase[] {
  return entries.map((entry) => {
    const image = loadPngGray(path.join(rootDir, entry.image_file));
    const prepared: PreparedImage = preprocess(image, prep);
    let mask: Float32Array;
    if (entry.mask_file) {
      mask = maskToBinary(loadPngGray(path.join(rootDir, entry.mask_file)), prep.inputSize);
    } else {
      mask = new Float32Array(prep.inputSize * prep.inputSize);
    }
    return { id: entry.case_id, x: prepared.plane, mask, label: entry.label };
  });
}

/** A label that disagrees with its mask poisons both heads; refuse to train. */
export function assertLabelConsistency(cases: TrainCase[]): void {
  for (const c of cases) {
    const nonzero = c.mask.some((v) => v > 0);
    if ((c.label === 1) !== nonzero) {
      throw new Error(`case ${c.id}: label ${c.label} inconsistent with mask (nonzero=${nonzero})`);
    }
  }
}
