/**
 * Second-phase mining: run the phase-1 model over unlabeled cases, keep
 * only the confidently-positive and confidently-negative ones, balance the
 * two sets, and fine-tune. Mined positives train against the model's own
 * binarized score map; mined negatives against an empty mask.
 */

import * as tf from '@tensorflow/tfjs';

import { TrainCase } from './data.js';
import { forward } from './model.js';
import { mulberry32, Rng, sampleWithout, shuffle } from './rng.js';
import { trainPhase, TrainOptions, TrainResult } from './train.js';

export interface PseudoLabelRule {
  posProbThreshold: number;
  negProbThreshold: number;
  requireNonzeroMaskForPos: boolean;
  requireZeroMaskForNeg: boolean;
  maskBinarizeThreshold: number;
}

export const DEFAULT_RULE: PseudoLabelRule = {
  posProbThreshold: 0.8,
  negProbThreshold: 0.01,
  requireNonzeroMaskForPos: true,
  requireZeroMaskForNeg: true,
  maskBinarizeThreshold: 0.5,
};

export function validateRule(rule: PseudoLabelRule): void {
  if (!(0 <= rule.negProbThreshold && rule.negProbThreshold < rule.posProbThreshold && rule.posProbThreshold <= 1)) {
    throw new Error(
      `need 0 <= negProbThreshold < posProbThreshold <= 1, got ${rule.negProbThreshold} / ${rule.posProbThreshold}`,
    );
  }
}

export interface ScoredCase {
  id: string;
  prob: number;
  maskNonzero: boolean;
}

/** Pure gate: cases matching neither confidence condition are dropped. */
export function applyRule<T extends ScoredCase>(
  scored: T[],
  rule: PseudoLabelRule = DEFAULT_RULE,
): { positives: T[]; negatives: T[] } {
  validateRule(rule);
  const positives = scored.filter(
    (c) => c.prob > rule.posProbThreshold && (!rule.requireNonzeroMaskForPos || c.maskNonzero),
  );
  const negatives = scored.filter(
    (c) => c.prob < rule.negProbThreshold && (!rule.requireZeroMaskForNeg || !c.maskNonzero),
  );
  return { positives, negatives };
}

export interface MinedCase extends ScoredCase {
  /** input plane, unchanged */
  x: Float32Array;
  /** binarized predicted score map (the pseudo segmentation target) */
  pseudoMask: Float32Array;
}

/** Inference over unlabeled cases followed by the confidence gate. */
export function minePseudolabels(
  model: tf.LayersModel,
  cases: { id: string; x: Float32Array }[],
  rule: PseudoLabelRule = DEFAULT_RULE,
  batchSize = 16,
): { positives: MinedCase[]; negatives: MinedCase[] } {
  validateRule(rule);
  const scored: MinedCase[] = [];
  for (let start = 0; start < cases.length; start += batchSize) {
    let slice = cases.slice(start, start + batchSize);
    const size = Math.sqrt(slice[0].x.length);
    const bad = slice.filter((c) => c.x.length !== size * size);
    if (bad.length > 0) {
      console.warn(`skipping ${bad.length} case(s) with unexpected input size: ${bad.map((c) => c.id).join(', ')}`);
      slice = slice.filter((c) => c.x.length === size * size);
      if (slice.length === 0) continue;
    }
    const xs = new Float32Array(slice.length * size * size * 3);
    slice.forEach((c, i) => {
      const base = i * size * size * 3;
      for (let p = 0; p < size * size; p++) {
        xs[base + p * 3] = c.x[p];
        xs[base + p * 3 + 1] = c.x[p];
        xs[base + p * 3 + 2] = c.x[p];
      }
    });
    const input = tf.tensor4d(xs, [slice.length, size, size, 3]);
    const { probs, maps } = tf.tidy(() => {
      const [seg, cls] = forward(model, input, false);
      return { probs: cls.dataSync(), maps: seg.dataSync() };
    });
    input.dispose();
    slice.forEach((c, i) => {
      const pseudoMask = new Float32Array(size * size);
      let nonzero = false;
      for (let p = 0; p < size * size; p++) {
        const on = maps[i * size * size + p] >= rule.maskBinarizeThreshold;
        pseudoMask[p] = on ? 1 : 0;
        nonzero ||= on;
      }
      scored.push({ id: c.id, x: c.x, prob: probs[i], maskNonzero: nonzero, pseudoMask });
    });
  }
  return applyRule(scored, rule);
}

/**
 * Undersample the larger side to the smaller without replacement and
 * shuffle; output size is exactly twice the smaller side.
 */
export function balance<T>(positives: T[], negatives: T[], rng: Rng): T[] {
  if (positives.length === 0 || negatives.length === 0) {
    throw new Error(
      `balance needs both classes, got ${positives.length} positives / ${negatives.length} negatives`,
    );
  }
  const n = Math.min(positives.length, negatives.length);
  const pos = positives.length === n ? positives.slice() : sampleWithout(positives, n, rng);
  const neg = negatives.length === n ? negatives.slice() : sampleWithout(negatives, n, rng);
  return shuffle([...pos, ...neg], rng);
}

export function minedToTrainCases(mined: MinedCase[], positives: Set<string>): TrainCase[] {
  return mined.map((c) => {
    const isPos = positives.has(c.id);
    return {
      id: c.id,
      x: c.x,
      mask: isPos ? c.pseudoMask : new Float32Array(c.pseudoMask.length),
      label: isPos ? 1 : 0,
    };
  });
}

/** Same loop as the first phase, starting from the phase-1 weights. */
export async function fineTune(
  model: tf.LayersModel,
  positives: MinedCase[],
  negatives: MinedCase[],
  options: TrainOptions,
): Promise<TrainResult> {
  const rng = mulberry32((options.seed ?? 0) ^ 0xb417ce);
  const balanced = balance(positives, negatives, rng);
  const posIds = new Set(positives.map((c) => c.id));
  const cases = minedToTrainCases(balanced, posIds);
  return trainPhase(model, cases, options);
}
