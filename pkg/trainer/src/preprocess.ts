/**
 * Network input preparation: resize, local contrast enhancement, per-image
 * standardization, channel replication.
 */

import { clahe, ClaheOptions } from './clahe.js';
import { GrayImage, resizeBilinearU8 } from './image.js';

export const STD_FLOOR = 1e-6;

export interface PreprocessOptions extends ClaheOptions {
  inputSize: number;
}

export interface PreparedImage {
  size: number;
  /** standardized luminance, length size*size */
  plane: Float32Array;
  /** plane replicated to 3 channels, HWC layout, length size*size*3 */
  channels: Float32Array;
}

export function standardize(values: Float32Array): Float32Array {
  let mean = 0;
  for (const v of values) mean += v;
  mean /= values.length;
  let varsum = 0;
  for (const v of values) varsum += (v - mean) * (v - mean);
  const std = Math.max(Math.sqrt(varsum / values.length), STD_FLOOR);
  const out = new Float32Array(values.length);
  for (let i = 0; i < values.length; i++) out[i] = (values[i] - mean) / std;
  return out;
}

export function replicateChannels(plane: Float32Array): Float32Array {
  const out = new Float32Array(plane.length * 3);
  for (let i = 0; i < plane.length; i++) {
    out[i * 3] = plane[i];
    out[i * 3 + 1] = plane[i];
    out[i * 3 + 2] = plane[i];
  }
  return out;
}

export function preprocess(image: GrayImage, options: PreprocessOptions): PreparedImage {
  const size = options.inputSize;
  const resized = resizeBilinearU8(image, size);
  const equalized = clahe(resized.data, size, size, options);
  const asFloat = new Float32Array(equalized.length);
  for (let i = 0; i < equalized.length; i++) asFloat[i] = equalized[i] / 255;
  const plane = standardize(asFloat);
  return { size, plane, channels: replicateChannels(plane) };
}
