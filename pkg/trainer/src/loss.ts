/**
 * Combined detection/segmentation loss: binary cross-entropy on the scalar
 * presence output plus a weighted soft-Dice loss on the score map.
 *
 * Two routes are provided on purpose: a float64 reference with hand-derived
 * analytic gradients (used by the gradient acceptance checks and anywhere
 * exact numbers matter) and tensor ops for the training graph.
 */

import * as tf from '@tensorflow/tfjs';

export const DICE_EPS = 1.0;
export const PROB_EPS = 1e-7;
export const DEFAULT_LAMBDA = 0.1;

export interface LossParts {
  total: number;
  bce: number;
  dice: number;
}

function clampProb(p: number): number {
  return Math.min(Math.max(p, PROB_EPS), 1 - PROB_EPS);
}

export function bceRef(predLabel: number, trueLabel: number): number {
  const p = clampProb(predLabel);
  return -(trueLabel * Math.log(p) + (1 - trueLabel) * Math.log(1 - p));
}

/** Soft Dice loss for one mask pair: 1 - (2*sum(p*g)+eps) / (sum(p)+sum(g)+eps). */
export function diceLossRef(predMask: ArrayLike<number>, trueMask: ArrayLike<number>): number {
  let inter = 0;
  let sums = 0;
  for (let i = 0; i < predMask.length; i++) {
    inter += predMask[i] * trueMask[i];
    sums += predMask[i] + trueMask[i];
  }
  return 1 - (2 * inter + DICE_EPS) / (sums + DICE_EPS);
}

export function combinedLossRef(
  predLabel: number,
  trueLabel: number,
  predMask: ArrayLike<number>,
  trueMask: ArrayLike<number>,
  lambda: number = DEFAULT_LAMBDA,
): LossParts {
  if (predMask.length !== trueMask.length) {
    throw new Error(`mask shape mismatch: ${predMask.length} vs ${trueMask.length}`);
  }
  const bce = bceRef(predLabel, trueLabel);
  const dice = diceLossRef(predMask, trueMask);
  return { total: bce + lambda * dice, bce, dice };
}

export interface LossGrads {
  dLabel: number;
  dMask: Float64Array;
}

/** Analytic gradients of the combined loss w.r.t. the predictions. */
export function combinedLossGradRef(
  predLabel: number,
  trueLabel: number,
  predMask: ArrayLike<number>,
  trueMask: ArrayLike<number>,
  lambda: number = DEFAULT_LAMBDA,
): LossGrads {
  const p = clampProb(predLabel);
  const dLabel = -trueLabel / p + (1 - trueLabel) / (1 - p);

  let inter = 0;
  let sums = 0;
  for (let i = 0; i < predMask.length; i++) {
    inter += predMask[i] * trueMask[i];
    sums += predMask[i] + trueMask[i];
  }
  const denom = sums + DICE_EPS;
  const numer = 2 * inter + DICE_EPS;
  const dMask = new Float64Array(predMask.length);
  for (let i = 0; i < predMask.length; i++) {
    // d/dp_i of -(numer/denom); both numer and denom depend on p_i
    dMask[i] = lambda * (-(2 * trueMask[i] * denom - numer) / (denom * denom));
  }
  return { dLabel, dMask };
}

/** BCE between sigmoid scalars and labels, averaged over the batch. */
export function bceTf(predLabels: tf.Tensor, trueLabels: tf.Tensor): tf.Scalar {
  return tf.tidy(() => {
    const p = predLabels.clipByValue(PROB_EPS, 1 - PROB_EPS);
    const one = tf.scalar(1);
    const ll = trueLabels.mul(p.log()).add(one.sub(trueLabels).mul(one.sub(p).log()));
    return ll.neg().mean() as tf.Scalar;
  });
}

/**
 * Soft Dice loss pooled over the whole batch (one quotient, all pixels).
 *
 * Pooling matters: a per-sample average gives every empty-mask negative its
 * own 1 - eps/(sum(p)+eps) term whose gradient grows without bound as
 * predictions shrink, which drives small-batch training into an all-zero
 * collapse. One batch-level quotient keeps empty-mask cases as plain
 * background pixels.
 */
export function diceLossTf(predMasks: tf.Tensor, trueMasks: tf.Tensor): tf.Scalar {
  return tf.tidy(() => {
    const inter = predMasks.mul(trueMasks).sum();
    const sums = predMasks.sum().add(trueMasks.sum());
    const coeff = inter.mul(2).add(DICE_EPS).div(sums.add(DICE_EPS));
    return tf.scalar(1).sub(coeff) as tf.Scalar;
  });
}

export function combinedLossTf(
  predLabels: tf.Tensor,
  trueLabels: tf.Tensor,
  predMasks: tf.Tensor,
  trueMasks: tf.Tensor,
  lambda: number = DEFAULT_LAMBDA,
): tf.Scalar {
  return tf.tidy(
    () => bceTf(predLabels, trueLabels).add(diceLossTf(predMasks, trueMasks).mul(lambda)) as tf.Scalar,
  );
}
