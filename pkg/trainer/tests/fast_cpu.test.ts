import { describe, expect, it } from 'vitest';
import * as tf from '@tensorflow/tfjs';

import { installFastCpuKernels } from '../src/fast_cpu.js';

await tf.setBackend('cpu');

interface Case {
  batch: number;
  size: number;
  ci: number;
  co: number;
  kernel: number;
  stride: number;
  pad: 'same' | 'valid';
}

const CASES: Case[] = [
  { batch: 2, size: 12, ci: 3, co: 5, kernel: 3, stride: 1, pad: 'same' },
  { batch: 1, size: 9, ci: 4, co: 2, kernel: 3, stride: 1, pad: 'valid' },
  { batch: 2, size: 8, ci: 2, co: 3, kernel: 1, stride: 1, pad: 'same' },
  { batch: 1, size: 10, ci: 3, co: 4, kernel: 3, stride: 2, pad: 'same' },
];

function runCase(c: Case) {
  const x = tf.randomNormal([c.batch, c.size, c.size, c.ci], 0, 1, 'float32', 31) as tf.Tensor4D;
  const f = tf.randomNormal([c.kernel, c.kernel, c.ci, c.co], 0, 1, 'float32', 32) as tf.Tensor4D;
  const dyShape = tf.conv2d(x, f, c.stride, c.pad).shape;
  const dyUp = tf.randomNormal(dyShape, 0, 1, 'float32', 33) as tf.Tensor4D;

  const forward = tf.conv2d(x, f, c.stride, c.pad);
  const grads = tf.grads((xi: tf.Tensor, fi: tf.Tensor) =>
    tf.conv2d(xi as tf.Tensor4D, fi as tf.Tensor4D, c.stride, c.pad).mul(dyUp).sum(),
  )([x, f]);
  return {
    forward: forward.dataSync(),
    dx: grads[0].dataSync(),
    df: grads[1].dataSync(),
  };
}

describe('optimized cpu conv kernels', () => {
  it('matches the stock kernels on forward and both gradients', () => {
    const before = CASES.map(runCase);
    installFastCpuKernels();
    const after = CASES.map(runCase);
    for (let i = 0; i < CASES.length; i++) {
      for (const key of ['forward', 'dx', 'df'] as const) {
        const a = before[i][key];
        const b = after[i][key];
        expect(b.length).toBe(a.length);
        let worst = 0;
        for (let j = 0; j < a.length; j++) worst = Math.max(worst, Math.abs(a[j] - b[j]));
        expect(worst).toBeLessThan(1e-4);
      }
    }
  });

  it('is drastically faster on a training-shaped workload', () => {
    installFastCpuKernels();
    const x = tf.randomNormal([5, 64, 64, 8]) as tf.Tensor4D;
    const f = tf.randomNormal([3, 3, 8, 16]) as tf.Tensor4D;
    const dy = tf.randomNormal([5, 64, 64, 16]) as tf.Tensor4D;
    const t0 = Date.now();
    const grads = tf.grads((xi: tf.Tensor, fi: tf.Tensor) =>
      tf.conv2d(xi as tf.Tensor4D, fi as tf.Tensor4D, 1, 'same').mul(dy).sum(),
    )([x, f]);
    grads[0].dataSync();
    grads[1].dataSync();
    // the stock backprop-filter kernel alone needs >10s here
    expect(Date.now() - t0).toBeLessThan(3000);
  });
});
