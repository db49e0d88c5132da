import { describe, expect, it } from 'vitest';
import * as tf from '@tensorflow/tfjs';

import { bceTf, diceLossTf } from '../src/loss.js';
import { buildEttNet, forward, warmStart } from '../src/model.js';

await tf.setBackend('cpu');

const SMALL = { inputSize: 32, encoderWidths: [4, 8], convsPerBlock: [1, 1], classifierUnits: 8, seed: 3 };

function randomBatch(n: number, size: number) {
  const xs = tf.randomNormal([n, size, size, 3], 0, 1, 'float32', 11) as tf.Tensor4D;
  const masks = tf.randomUniform([n, size, size, 1], 0, 1, 'float32', 12).greater(0.8).cast('float32') as tf.Tensor4D;
  const labels = tf.tensor2d([...Array(n)].map((_, i) => [i % 2]), [n, 1]);
  return { xs, masks, labels };
}

describe('ettnet model', () => {
  it('produces a full-resolution score map and a sigmoid scalar', () => {
    const model = buildEttNet(SMALL);
    const { xs } = randomBatch(2, 32);
    const [seg, cls] = forward(model, xs, false);
    expect(seg.shape).toEqual([2, 32, 32, 1]);
    expect(cls.shape).toEqual([2, 1]);
    const segVals = seg.dataSync();
    for (const v of segVals) {
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThanOrEqual(1);
    }
    for (const v of cls.dataSync()) {
      expect(v).toBeGreaterThan(0);
      expect(v).toBeLessThan(1);
    }
  });

  it('is reproducible from the initializer seed', () => {
    const a = buildEttNet(SMALL);
    const b = buildEttNet(SMALL);
    const wa = a.getWeights().map((w) => w.dataSync());
    const wb = b.getWeights().map((w) => w.dataSync());
    expect(wa.length).toBe(wb.length);
    wa.forEach((w, i) => expect(w).toEqual(wb[i]));
  });

  it('rejects input sizes the pooling stack cannot rebuild', () => {
    expect(() => buildEttNet({ ...SMALL, inputSize: 30 })).toThrow(/divisible/);
  });

  it('zero segmentation weight gives exactly zero decoder gradients', () => {
    const model = buildEttNet(SMALL);
    const { xs, masks, labels } = randomBatch(4, 32);
    const { grads } = tf.variableGrads(() => {
      const [seg, cls] = forward(model, xs, true);
      const bce = bceTf(cls, labels);
      const dice = diceLossTf(seg, masks);
      return bce.add(dice.mul(0)) as tf.Scalar;
    });
    let decoderVars = 0;
    let encoderNonzero = 0;
    for (const [name, grad] of Object.entries(grads)) {
      const values = grad.dataSync();
      if (name.startsWith('dec_')) {
        decoderVars++;
        for (const v of values) expect(v).toBe(0);
      } else if (name.startsWith('enc_') && values.some((v) => v !== 0)) {
        encoderNonzero++;
      }
    }
    expect(decoderVars).toBeGreaterThan(0);
    expect(encoderNonzero).toBeGreaterThan(0);
  });

  it('keeps predictions finite and shape-correct on flipped inputs', () => {
    const model = buildEttNet(SMALL);
    const { xs } = randomBatch(2, 32);
    const flipped = tf.reverse(xs, 2) as tf.Tensor4D;
    const [seg, cls] = forward(model, flipped, false);
    expect(seg.shape).toEqual([2, 32, 32, 1]);
    expect(cls.shape).toEqual([2, 1]);
    for (const v of seg.dataSync()) expect(Number.isFinite(v)).toBe(true);
    for (const v of cls.dataSync()) expect(Number.isFinite(v)).toBe(true);
  });

  it('warm-start copies weights for matching layer names', () => {
    const source = buildEttNet({ ...SMALL, seed: 5 });
    const target = buildEttNet({ ...SMALL, seed: 9 });
    const copied = warmStart(target, source);
    expect(copied).toBeGreaterThan(0);
    const ws = source.getWeights().map((w) => w.dataSync());
    const wt = target.getWeights().map((w) => w.dataSync());
    ws.forEach((w, i) => expect(wt[i]).toEqual(w));
  });
});
