/**
 * Training loop shared by the synthetic phase and real-data fine-tuning:
 * Adam with default parameters on the combined BCE + weighted Dice loss,
 * seeded shuffling and augmentation, per-epoch metrics and checkpoints.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import * as tf from '@tensorflow/tfjs';

import { augmentPair } from './augment.js';
import { saveCheckpoint } from './checkpoint.js';
import { assertLabelConsistency, TrainCase } from './data.js';
import { combinedLossTf, bceTf, diceLossTf, DEFAULT_LAMBDA } from './loss.js';
import { auc } from './metrics.js';
import { forward } from './model.js';
import { epochSeed, mulberry32, shuffle } from './rng.js';

export interface TrainOptions {
  epochs: number;
  batchSize?: number;
  lambda?: number;
  seed?: number;
  /** fraction of cases held out for the epoch AUC log */
  valFraction?: number;
  augment?: boolean;
  maxRotationDeg?: number;
  /** write checkpoints every n epochs (0 = only final when outDir given) */
  checkpointEvery?: number;
  /** first epoch index, for seed-faithful resumes from a checkpoint */
  startEpoch?: number;
  outDir?: string;
  optimizer?: tf.Optimizer;
  /** return true to stop before epochs run out */
  earlyStop?: (metrics: EpochMetrics) => boolean;
  verbose?: boolean;
}

export interface EpochMetrics {
  epoch: number;
  loss: number;
  bce: number;
  dice: number;
  auc: number;
}

export interface TrainResult {
  history: EpochMetrics[];
  optimizer: tf.Optimizer;
  valIds: string[];
}

function inputSizeOf(cases: TrainCase[]): number {
  const size = Math.sqrt(cases[0].mask.length);
  if (!Number.isInteger(size)) throw new Error('mask is not square');
  return size;
}

/**
 * Adam in tfjs pairs moment tensors with gradients by position, and the
 * engine appends uniquifying suffixes to variable names per process. Keying
 * gradient application on suffix-stripped names in sorted order makes the
 * optimizer state positionally stable across checkpoint save/load.
 */
function canonicalKey(name: string): string {
  return name.replace(/_\d+$/, '');
}

function orderedGrads(grads: tf.NamedTensorMap): tf.NamedTensorMap {
  const ordered: tf.NamedTensorMap = {};
  for (const key of Object.keys(grads).sort((a, b) =>
    canonicalKey(a).localeCompare(canonicalKey(b)),
  )) {
    ordered[key] = grads[key];
  }
  return ordered;
}

function toBatchTensors(batch: { x: Float32Array; mask: Float32Array; label: number }[], size: number) {
  const n = batch.length;
  const xs = new Float32Array(n * size * size * 3);
  const masks = new Float32Array(n * size * size);
  const labels = new Float32Array(n);
  batch.forEach((c, i) => {
    const base = i * size * size * 3;
    for (let p = 0; p < size * size; p++) {
      xs[base + p * 3] = c.x[p];
      xs[base + p * 3 + 1] = c.x[p];
      xs[base + p * 3 + 2] = c.x[p];
    }
    masks.set(c.mask, i * size * size);
    labels[i] = c.label;
  });
  return {
    xs: tf.tensor4d(xs, [n, size, size, 3]),
    masks: tf.tensor4d(masks, [n, size, size, 1]),
    labels: tf.tensor2d(labels, [n, 1]),
  };
}

/** Classification scores for a case list, in eval mode. */
export function scoreCases(model: tf.LayersModel, cases: TrainCase[], batchSize = 16): number[] {
  const size = inputSizeOf(cases);
  const scores: number[] = [];
  for (let start = 0; start < cases.length; start += batchSize) {
    const batch = cases.slice(start, start + batchSize);
    const { xs, masks, labels } = toBatchTensors(batch, size);
    const probs = tf.tidy(() => {
      const [seg, cls] = forward(model, xs, false);
      void seg;
      return cls.dataSync();
    });
    scores.push(...Array.from(probs));
    xs.dispose();
    masks.dispose();
    labels.dispose();
  }
  return scores;
}

export async function trainPhase(
  model: tf.LayersModel,
  cases: TrainCase[],
  options: TrainOptions,
): Promise<TrainResult> {
  assertLabelConsistency(cases);
  const size = inputSizeOf(cases);
  const batchSize = options.batchSize ?? 8;
  const lambda = options.lambda ?? DEFAULT_LAMBDA;
  if (lambda <= 0) throw new Error(`segmentation loss weight must be positive, got ${lambda}`);
  const seed = options.seed ?? 0;
  const valFraction = options.valFraction ?? 0.2;
  const optimizer = options.optimizer ?? tf.train.adam();

  const split = cases.slice();
  shuffle(split, mulberry32(epochSeed(seed, 0x5eed)));
  const nVal = Math.round(valFraction * split.length);
  const valCases = split.slice(0, nVal);
  const trainCases = split.slice(nVal);
  if (trainCases.length === 0) throw new Error('no training cases after split');

  const history: EpochMetrics[] = [];
  for (let epoch = options.startEpoch ?? 1; epoch <= options.epochs; epoch++) {
    const rng = mulberry32(epochSeed(seed, epoch));
    const order = shuffle(trainCases.slice(), rng);

    let lossSum = 0;
    let bceSum = 0;
    let diceSum = 0;
    let seen = 0;
    for (let start = 0; start < order.length; start += batchSize) {
      const slice = order.slice(start, start + batchSize);
      const batch = slice.map((c) => {
        if (!options.augment) return c;
        const a = augmentPair(c.x, c.mask, size, rng, {
          maxRotationDeg: options.maxRotationDeg ?? 10,
        });
        return { x: a.image, mask: a.mask, label: c.label };
      });
      const { xs, masks, labels } = toBatchTensors(batch, size);

      const parts = { bce: 0, dice: 0 };
      const lossVal = tf.tidy(() => {
        const { value, grads } = tf.variableGrads(() => {
          const [seg, cls] = forward(model, xs, true);
          const bce = bceTf(cls, labels);
          const dice = diceLossTf(seg, masks);
          parts.bce = bce.dataSync()[0];
          parts.dice = dice.dataSync()[0];
          return bce.add(dice.mul(lambda)) as tf.Scalar;
        });
        optimizer.applyGradients(orderedGrads(grads));
        return value.dataSync()[0];
      });

      lossSum += lossVal * slice.length;
      bceSum += parts.bce * slice.length;
      diceSum += parts.dice * slice.length;
      seen += slice.length;
      xs.dispose();
      masks.dispose();
      labels.dispose();
    }

    const metricCases = valCases.length > 0 ? valCases : trainCases;
    const scores = scoreCases(model, metricCases, batchSize);
    const labels = metricCases.map((c) => c.label);
    const epochAuc = labels.some((l) => l === 1) && labels.some((l) => l === 0)
      ? auc(scores, labels)
      : NaN;

    const metrics: EpochMetrics = {
      epoch,
      loss: lossSum / seen,
      bce: bceSum / seen,
      dice: diceSum / seen,
      auc: epochAuc,
    };
    history.push(metrics);
    if (options.verbose) {
      console.log(
        `epoch ${epoch}: loss=${metrics.loss.toFixed(4)} bce=${metrics.bce.toFixed(4)} ` +
          `dice=${metrics.dice.toFixed(4)} auc=${Number.isNaN(epochAuc) ? 'n/a' : epochAuc.toFixed(4)}`,
      );
    }

    if (options.outDir && options.checkpointEvery && epoch % options.checkpointEvery === 0) {
      await saveCheckpoint(path.join(options.outDir, 'checkpoints', `epoch_${epoch}`), model, optimizer, {
        epoch,
        seed,
      });
    }
    if (options.earlyStop?.(metrics)) break;
  }

  if (options.outDir) {
    fs.mkdirSync(options.outDir, { recursive: true });
    const rows = history.map(
      (m) => `${m.epoch},${m.loss},${m.bce},${m.dice},${Number.isNaN(m.auc) ? '' : m.auc}`,
    );
    fs.writeFileSync(path.join(options.outDir, 'metrics.csv'), ['epoch,loss,bce,dice,auc', ...rows].join('\n') + '\n');
    await saveCheckpoint(path.join(options.outDir, 'final'), model, optimizer, {
      epoch: history.length,
      seed,
    });
  }
  return { history, optimizer, valIds: valCases.map((c) => c.id) };
}
