/**
 * Paired training augmentation: one random draw drives both the image and
 * its mask, so the pair stays aligned. Images resample bilinearly, masks
 * nearest-neighbor to stay binary.
 */

import { flipHorizontal, rotateBilinear, rotateNearest } from './image.js';
import { Rng, uniform } from './rng.js';

export interface AugmentOptions {
  maxRotationDeg?: number; // rotation drawn uniformly in +/- this
  flipProbability?: number;
}

export function augmentPair(
  image: Float32Array,
  mask: Float32Array,
  size: number,
  rng: Rng,
  options: AugmentOptions = {},
): { image: Float32Array; mask: Float32Array } {
  const maxRot = options.maxRotationDeg ?? 10;
  const flipP = options.flipProbability ?? 0.5;

  let img = image;
  let msk = mask;
  if (rng() < flipP) {
    img = flipHorizontal(img, size, size);
    msk = flipHorizontal(msk, size, size);
  }
  const angle = uniform(rng, -maxRot, maxRot);
  if (angle !== 0) {
    img = rotateBilinear(img, size, size, angle, 0);
    msk = rotateNearest(msk, size, size, angle, 0);
  }
  return { image: img, mask: msk };
}
